#include "hyperlens/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "hyperlens/errors.hpp"
#include "hyperlens/numeric.hpp"
#include "hyperlens/rng.hpp"

namespace hyperlens {

namespace {

// Keeps top-level cluster centers within a modest angular spread of a shared
// anchor direction. Slot depth then tracks the planted norm profile instead
// of being washed out by direction averaging when levels are aggregated
// into centroids.
constexpr double kAnchorScale = 3.0;

// RNG stream tags; level/slot ids must not collide across purposes.
constexpr std::uint64_t kAnchorStream = ~0ULL;

void check_config(const SyntheticConfig& c) {
    if (c.slot_dim == 0) throw ConfigError("slot_dim must be >= 1");
    if (c.patch_count == 0) throw ConfigError("patch_count must be >= 1");
    if (c.levels.empty()) throw ConfigError("levels must be nonempty");
    for (std::size_t i = 0; i + 1 < c.levels.size(); ++i)
        if (c.levels[i] >= c.levels[i + 1])
            throw ConfigError("levels must be strictly increasing");
    if (c.levels.front() < 1) throw ConfigError("levels must be >= 1");
    if (!(c.parent_separation > 0.0)) throw ConfigError("parent_separation must be > 0");
    if (!(c.child_noise > 0.0)) throw ConfigError("child_noise must be > 0");
    for (const auto& [level, value] : c.norm_profile)
        if (!(value > 0.0)) throw ConfigError("norm_profile values must be > 0");
}

// Contiguous patch ranges per slot at every level, nested so each parent's
// range is split exactly among its children. Requires every split to divide
// evenly; uneven configurations are rejected up front.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> plan_patch_ranges(
    const std::vector<int>& levels, std::size_t patch_count) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> ranges(levels.size());

    const auto top = static_cast<std::size_t>(levels.front());
    if (patch_count % top != 0)
        throw ConfigError("cannot nest " + std::to_string(top) + " slots into " +
                          std::to_string(patch_count) + " patches: " + std::to_string(top) +
                          " does not divide " + std::to_string(patch_count));
    const std::size_t top_size = patch_count / top;
    for (std::size_t i = 0; i < top; ++i)
        ranges[0].push_back({i * top_size, (i + 1) * top_size});

    for (std::size_t k = 1; k < levels.size(); ++k) {
        const auto counts = plan_child_counts(levels[k], levels[k - 1]);
        for (std::size_t parent = 0; parent < ranges[k - 1].size(); ++parent) {
            const auto [begin, end] = ranges[k - 1][parent];
            const auto n_children = static_cast<std::size_t>(counts[parent]);
            const std::size_t extent = end - begin;
            if (extent % n_children != 0)
                throw ConfigError("cannot nest " + std::to_string(levels[k]) + " slots into " +
                                  std::to_string(patch_count) + " patches at level pair (" +
                                  std::to_string(levels[k - 1]) + "," + std::to_string(levels[k]) +
                                  "): " + std::to_string(n_children) + " does not divide a parent range of " +
                                  std::to_string(extent));
            const std::size_t child_size = extent / n_children;
            for (std::size_t j = 0; j < n_children; ++j)
                ranges[k].push_back({begin + j * child_size, begin + (j + 1) * child_size});
        }
    }
    return ranges;
}

// Planted parent map per consecutive level pair: children are emitted parent
// by parent, so fine index j of pair k has parent index given by the counts.
std::vector<std::vector<int>> plan_parent_maps(const std::vector<int>& levels) {
    std::vector<std::vector<int>> maps;
    for (std::size_t k = 1; k < levels.size(); ++k) {
        const auto counts = plan_child_counts(levels[k], levels[k - 1]);
        std::vector<int> parent_of;
        for (std::size_t parent = 0; parent < counts.size(); ++parent)
            for (int j = 0; j < counts[parent]; ++j) parent_of.push_back(static_cast<int>(parent));
        maps.push_back(std::move(parent_of));
    }
    return maps;
}

std::vector<double> gaussian_vector(SubstreamRng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.next_gaussian();
    return v;
}

std::string scene_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene%05zu", index);
    return buf;
}

} // namespace

std::vector<int> plan_child_counts(int n_children, int n_parents) {
    if (n_parents <= 0 || n_children < n_parents)
        throw ConfigError("plan_child_counts: need n_children >= n_parents >= 1");
    const int base = n_children / n_parents;
    const int remainder = n_children % n_parents;
    std::vector<int> counts(static_cast<std::size_t>(n_parents), base);
    for (int i = 0; i < remainder; ++i) counts[static_cast<std::size_t>(i)] += 1;
    return counts;
}

SlotBundle generate_synthetic(const SyntheticConfig& config) {
    check_config(config);

    const auto patch_ranges = plan_patch_ranges(config.levels, config.patch_count);
    const auto parent_maps = plan_parent_maps(config.levels);

    // Masks are a pure function of (levels, patch_count): binary partition
    // rows shared by every scene.
    std::vector<Matrix> level_masks;
    for (std::size_t k = 0; k < config.levels.size(); ++k) {
        Matrix masks(static_cast<std::size_t>(config.levels[k]), config.patch_count, 0.0);
        for (std::size_t slot = 0; slot < patch_ranges[k].size(); ++slot) {
            const auto [begin, end] = patch_ranges[k][slot];
            for (std::size_t p = begin; p < end; ++p) masks.at(slot, p) = 1.0;
        }
        level_masks.push_back(std::move(masks));
    }

    PlantedTruth planted_template;
    for (std::size_t k = 1; k < config.levels.size(); ++k)
        planted_template.parents[{config.levels[k - 1], config.levels[k]}] = parent_maps[k - 1];
    planted_template.norm_profile = config.norm_profile;

    SlotBundle bundle;
    bundle.manifest.slot_dim = config.slot_dim;
    bundle.manifest.patch_count = config.patch_count;
    bundle.manifest.levels = config.levels;
    bundle.manifest.planted = true;

    const double sep = config.parent_separation;
    const double center_sigma = sep / std::sqrt(2.0 * static_cast<double>(config.slot_dim));
    const double noise_sigma = config.child_noise * sep;

    bundle.scenes.resize(config.n_scenes);
    for (std::size_t s = 0; s < config.n_scenes; ++s) {
        SceneRecord& scene = bundle.scenes[s];
        scene.id = scene_name(s);
        scene.planted = planted_template;

        std::vector<Matrix> level_slots;
        if (config.slot_model == SlotModel::IidGaussian) {
            for (int level : config.levels) {
                Matrix slots(static_cast<std::size_t>(level), config.slot_dim);
                for (std::size_t j = 0; j < slots.rows; ++j) {
                    SubstreamRng rng(config.seed, s, static_cast<std::uint64_t>(level), j);
                    for (std::size_t k = 0; k < slots.cols; ++k)
                        slots.at(j, k) = rng.next_gaussian();
                }
                level_slots.push_back(std::move(slots));
            }
        } else {
            // Shared anchor direction, then top-level centers scattered
            // around it so their pairwise distances land near
            // parent_separation.
            SubstreamRng anchor_rng(config.seed, s, kAnchorStream, 0);
            auto anchor = gaussian_vector(anchor_rng, config.slot_dim);
            const double anchor_norm = norm(anchor);
            for (auto& x : anchor) x *= kAnchorScale * sep / anchor_norm;

            for (std::size_t k = 0; k < config.levels.size(); ++k) {
                const auto level = static_cast<std::size_t>(config.levels[k]);
                Matrix slots(level, config.slot_dim);
                for (std::size_t j = 0; j < level; ++j) {
                    SubstreamRng rng(config.seed, s, static_cast<std::uint64_t>(config.levels[k]), j);
                    if (k == 0) {
                        for (std::size_t c = 0; c < config.slot_dim; ++c)
                            slots.at(j, c) = anchor[c] + center_sigma * rng.next_gaussian();
                    } else {
                        const auto parent = static_cast<std::size_t>(parent_maps[k - 1][j]);
                        const auto parent_row = level_slots[k - 1].row(parent);
                        for (std::size_t c = 0; c < config.slot_dim; ++c)
                            slots.at(j, c) = parent_row[c] + noise_sigma * rng.next_gaussian();
                    }
                }
                level_slots.push_back(std::move(slots));
            }

            for (std::size_t k = 0; k < config.levels.size(); ++k) {
                const auto it = config.norm_profile.find(config.levels[k]);
                if (it == config.norm_profile.end()) continue;
                Matrix& slots = level_slots[k];
                std::vector<double> norms(slots.rows);
                for (std::size_t j = 0; j < slots.rows; ++j) norms[j] = norm(slots.row(j));
                const double current = mean(norms);
                if (current <= 0.0)
                    throw ConfigError("cannot rescale level " + std::to_string(config.levels[k]) +
                                      ": zero mean slot norm");
                const double factor = it->second / current;
                for (auto& x : slots.data) x *= factor;
            }
        }

        for (std::size_t k = 0; k < config.levels.size(); ++k) {
            LevelData data;
            data.slots = std::move(level_slots[k]);
            for (auto& x : data.slots.data) x = quantize_f32(x);
            data.masks = level_masks[k];
            scene.levels.emplace(config.levels[k], std::move(data));
        }
    }
    return bundle;
}

} // namespace hyperlens
