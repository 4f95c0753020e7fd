#include "hyperlens/hierarchy.hpp"

#include <algorithm>
#include <cmath>

#include "hyperlens/errors.hpp"

namespace hyperlens {

std::size_t ParentAssignment::n_evaluated() const {
    std::size_t n = 0;
    for (auto reason : exclusion)
        if (reason == ExclusionReason::None) ++n;
    return n;
}

const ParentAssignment* HierarchyGraph::find(int coarse_level, int fine_level) const {
    for (const auto& a : assignments)
        if (a.coarse_level == coarse_level && a.fine_level == fine_level) return &a;
    return nullptr;
}

BinaryMaskSet binarize_masks(const Matrix& weights, const BinarizeOptions& options) {
    if (weights.rows == 0 || weights.cols == 0)
        throw InvalidInputError("binarize_masks: empty mask matrix");
    for (double w : weights.data) {
        if (!std::isfinite(w) || w < 0.0 || w > 1.0)
            throw InvalidInputError("binarize_masks: attention weight outside [0,1]");
    }
    if (options.policy == BinarizePolicy::Threshold &&
        !(options.threshold > 0.0 && options.threshold < 1.0))
        throw InvalidInputError("binarize_masks: threshold must lie in (0,1), got " +
                                std::to_string(options.threshold));

    BinaryMaskSet out;
    out.slots = weights.rows;
    out.patches = weights.cols;
    out.policy = options;
    out.bits.assign(weights.rows * weights.cols, 0);

    if (options.policy == BinarizePolicy::Argmax) {
        for (std::size_t p = 0; p < weights.cols; ++p) {
            std::size_t best = 0;
            double best_w = weights.at(0, p);
            for (std::size_t i = 1; i < weights.rows; ++i) {
                if (weights.at(i, p) > best_w) {  // strict: ties keep the lowest index
                    best_w = weights.at(i, p);
                    best = i;
                }
            }
            out.bits[best * out.patches + p] = 1;
        }
    } else {
        for (std::size_t i = 0; i < weights.rows; ++i)
            for (std::size_t p = 0; p < weights.cols; ++p)
                out.bits[i * out.patches + p] = weights.at(i, p) >= options.threshold ? 1 : 0;
    }
    return out;
}

double inclusion_score(std::span<const std::uint8_t> child, std::span<const std::uint8_t> parent) {
    if (child.size() != parent.size())
        throw InvalidInputError("inclusion_score: mask length mismatch (" +
                                std::to_string(child.size()) + " vs " +
                                std::to_string(parent.size()) + ")");
    std::size_t child_area = 0;
    std::size_t overlap = 0;
    for (std::size_t p = 0; p < child.size(); ++p) {
        if (child[p]) {
            ++child_area;
            if (parent[p]) ++overlap;
        }
    }
    if (child_area == 0) throw DegenerateInputError("inclusion_score: empty child mask");
    return static_cast<double>(overlap) / static_cast<double>(child_area);
}

ParentAssignment assign_parents(const BinaryMaskSet& fine, const BinaryMaskSet& coarse,
                                double tau_excl) {
    if (fine.patches != coarse.patches)
        throw InvalidInputError("assign_parents: patch count mismatch (" +
                                std::to_string(fine.patches) + " vs " +
                                std::to_string(coarse.patches) + ")");
    if (fine.slots <= coarse.slots)
        throw InvalidInputError("assign_parents: fine level must have more slots than coarse (" +
                                std::to_string(fine.slots) + " vs " +
                                std::to_string(coarse.slots) + ")");
    if (!(tau_excl > 0.0 && tau_excl <= 1.0))
        throw InvalidInputError("assign_parents: tau_excl must lie in (0,1], got " +
                                std::to_string(tau_excl));

    ParentAssignment out;
    out.coarse_level = static_cast<int>(coarse.slots);
    out.fine_level = static_cast<int>(fine.slots);
    out.tau_excl = tau_excl;
    out.parent_of.resize(fine.slots, 0);
    out.inclusion.resize(fine.slots, 0.0);
    out.exclusion.resize(fine.slots, ExclusionReason::None);

    for (std::size_t j = 0; j < fine.slots; ++j) {
        const auto child = fine.row(j);
        const bool empty = std::all_of(child.begin(), child.end(),
                                       [](std::uint8_t b) { return b == 0; });
        if (empty) {
            out.parent_of[j] = 0;
            out.inclusion[j] = 0.0;
            out.exclusion[j] = ExclusionReason::EmptyChild;
            continue;
        }
        int best = 0;
        double best_score = -1.0;
        for (std::size_t i = 0; i < coarse.slots; ++i) {
            const double score = inclusion_score(child, coarse.row(i));
            if (score > best_score) {  // strict: ties keep the lowest coarse index
                best_score = score;
                best = static_cast<int>(i);
            }
        }
        out.parent_of[j] = best;
        out.inclusion[j] = best_score;
        if (best_score > tau_excl) out.exclusion[j] = ExclusionReason::NearDuplicate;
    }
    return out;
}

HierarchyGraph build_hierarchy(const std::string& scene_id,
                               const std::map<int, Matrix>& masks_by_level,
                               const std::vector<int>& levels, const BinarizeOptions& options,
                               double tau_excl) {
    if (levels.size() < 2)
        throw InvalidInputError("build_hierarchy: need at least two levels, got " +
                                std::to_string(levels.size()));
    std::map<int, BinaryMaskSet> binary;
    for (int level : levels) {
        const auto it = masks_by_level.find(level);
        if (it == masks_by_level.end())
            throw InvalidInputError("build_hierarchy: scene '" + scene_id +
                                    "' is missing level " + std::to_string(level));
        binary.emplace(level, binarize_masks(it->second, options));
    }

    HierarchyGraph graph;
    graph.scene_id = scene_id;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        auto assignment =
            assign_parents(binary.at(levels[k + 1]), binary.at(levels[k]), tau_excl);
        assignment.coarse_level = levels[k];
        assignment.fine_level = levels[k + 1];
        graph.assignments.push_back(std::move(assignment));
    }
    return graph;
}

} // namespace hyperlens
