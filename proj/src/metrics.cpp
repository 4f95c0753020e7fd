#include "hyperlens/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hyperlens/errors.hpp"

namespace hyperlens {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Retrieval geometry: cosine distance on raw slots for Euclidean, geodesic
// distance between exp-mapped slots for Lorentz. Rows of the result are fine
// slots, columns are coarse slots.
Matrix retrieval_distances(const Matrix& coarse, const Matrix& fine, const ManifoldSpec& m) {
    Matrix d(fine.rows, coarse.rows);
    if (m.kind == ManifoldKind::Euclidean) {
        for (std::size_t j = 0; j < fine.rows; ++j)
            for (std::size_t i = 0; i < coarse.rows; ++i)
                d.at(j, i) = cosine_distance(fine.row(j), coarse.row(i));
        return d;
    }
    std::vector<LorentzPoint> coarse_points(coarse.rows);
    std::vector<LorentzPoint> fine_points(fine.rows);
    for (std::size_t i = 0; i < coarse.rows; ++i)
        coarse_points[i] = exp_map_origin(coarse.row(i), m.curvature);
    for (std::size_t j = 0; j < fine.rows; ++j)
        fine_points[j] = exp_map_origin(fine.row(j), m.curvature);
    for (std::size_t j = 0; j < fine.rows; ++j)
        for (std::size_t i = 0; i < coarse.rows; ++i)
            d.at(j, i) = lorentz_distance(fine_points[j], coarse_points[i]);
    return d;
}

// Raw point-set geometry (used by the hyperbolicity score): plain l2 for
// Euclidean, geodesic for Lorentz. Distinct from the retrieval distance on
// purpose; angular and metric structure are separate questions.
Matrix self_distances(const Matrix& points, const ManifoldSpec& m) {
    Matrix d(points.rows, points.rows, 0.0);
    if (m.kind == ManifoldKind::Euclidean) {
        for (std::size_t a = 0; a < points.rows; ++a) {
            const auto ra = points.row(a);
            for (std::size_t b = a + 1; b < points.rows; ++b) {
                const auto rb = points.row(b);
                const double dist = std::sqrt(detail::pairwise_reduce(
                    0, points.cols, [&](std::size_t k) {
                        const double diff = ra[k] - rb[k];
                        return diff * diff;
                    }));
                d.at(a, b) = dist;
                d.at(b, a) = dist;
            }
        }
        return d;
    }
    std::vector<LorentzPoint> mapped(points.rows);
    for (std::size_t a = 0; a < points.rows; ++a)
        mapped[a] = exp_map_origin(points.row(a), m.curvature);
    for (std::size_t a = 0; a < points.rows; ++a)
        for (std::size_t b = a + 1; b < points.rows; ++b) {
            const double dist = lorentz_distance(mapped[a], mapped[b]);
            d.at(a, b) = dist;
            d.at(b, a) = dist;
        }
    return d;
}

std::vector<std::pair<int, int>> consecutive_pairs(const std::vector<int>& levels) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k)
        pairs.emplace_back(levels[k], levels[k + 1]);
    return pairs;
}

HyperbolicitySummary summarize(std::vector<double> values) {
    HyperbolicitySummary s;
    if (values.empty()) return s;
    s.mean = mean(values);
    s.stddev = sample_std(values);
    std::sort(values.begin(), values.end());
    s.q25 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.50);
    s.q75 = quantile_sorted(values, 0.75);
    return s;
}

Matrix pooled_slots(const SceneRecord& scene, const std::vector<int>& levels, std::size_t dim) {
    std::size_t total = 0;
    for (int level : levels) total += static_cast<std::size_t>(level);
    Matrix pooled(total, dim);
    std::size_t row = 0;
    for (int level : levels) {
        const Matrix& slots = scene.levels.at(level).slots;
        for (std::size_t j = 0; j < slots.rows; ++j, ++row)
            std::copy(slots.row(j).begin(), slots.row(j).end(), pooled.row(row).begin());
    }
    return pooled;
}

} // namespace

// ---------------------------------------------------------------------------
// Retrieval
// ---------------------------------------------------------------------------

RetrievalResult hit_at_1(const Matrix& coarse_slots, const Matrix& fine_slots,
                         const ParentAssignment& gt, const ManifoldSpec& manifold) {
    if (coarse_slots.rows != static_cast<std::size_t>(gt.coarse_level) ||
        fine_slots.rows != static_cast<std::size_t>(gt.fine_level))
        throw InvalidInputError("hit_at_1: slot counts (" + std::to_string(coarse_slots.rows) +
                                ", " + std::to_string(fine_slots.rows) +
                                ") do not match the assignment's level pair (" +
                                std::to_string(gt.coarse_level) + ", " +
                                std::to_string(gt.fine_level) + ")");
    if (coarse_slots.cols != fine_slots.cols)
        throw InvalidInputError("hit_at_1: slot dimension mismatch");

    RetrievalResult result;
    result.level_pair = {gt.coarse_level, gt.fine_level};
    result.manifold = manifold;
    result.random_baseline = 100.0 / static_cast<double>(gt.coarse_level);

    const Matrix d = retrieval_distances(coarse_slots, fine_slots, manifold);
    for (std::size_t j = 0; j < fine_slots.rows; ++j) {
        if (gt.is_excluded(j)) continue;
        ++result.n_evaluated;
        const auto parent = static_cast<std::size_t>(gt.parent_of[j]);
        const double parent_distance = d.at(j, parent);
        bool strictly_closest = true;
        for (std::size_t i = 0; i < coarse_slots.rows; ++i) {
            if (i == parent) continue;
            if (d.at(j, i) <= parent_distance) {  // rank-1 tie counts as a miss
                strictly_closest = false;
                break;
            }
        }
        if (strictly_closest) ++result.n_hits;
    }
    if (result.n_evaluated > 0)
        result.hit_at_1 =
            100.0 * static_cast<double>(result.n_hits) / static_cast<double>(result.n_evaluated);
    return result;
}

std::vector<RetrievalResult> retrieval_analysis(const SlotBundle& bundle,
                                                const std::vector<HierarchyGraph>& hierarchies,
                                                const std::vector<ManifoldSpec>& manifolds,
                                                int workers) {
    if (hierarchies.size() != bundle.scenes.size())
        throw InvalidInputError("retrieval_analysis: one hierarchy per scene required");
    const auto pairs = consecutive_pairs(bundle.manifest.levels);

    struct Cell {
        std::size_t hits = 0;
        std::size_t evaluated = 0;
    };
    std::vector<std::vector<Cell>> per_scene(bundle.scenes.size());

    parallel_for(bundle.scenes.size(), workers, [&](std::size_t s) {
        const SceneRecord& scene = bundle.scenes[s];
        std::vector<Cell> cells(pairs.size() * manifolds.size());
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto* gt = hierarchies[s].find(pairs[p].first, pairs[p].second);
            if (gt == nullptr)
                throw InvalidInputError("retrieval_analysis: scene '" + scene.id +
                                        "' lacks an assignment for pair (" +
                                        std::to_string(pairs[p].first) + "," +
                                        std::to_string(pairs[p].second) + ")");
            const Matrix& coarse = scene.levels.at(pairs[p].first).slots;
            const Matrix& fine = scene.levels.at(pairs[p].second).slots;
            for (std::size_t m = 0; m < manifolds.size(); ++m) {
                const RetrievalResult r = hit_at_1(coarse, fine, *gt, manifolds[m]);
                cells[p * manifolds.size() + m] = {r.n_hits, r.n_evaluated};
            }
        }
        per_scene[s] = std::move(cells);
    });

    std::vector<RetrievalResult> results;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (std::size_t m = 0; m < manifolds.size(); ++m) {
            RetrievalResult r;
            r.level_pair = pairs[p];
            r.manifold = manifolds[m];
            r.random_baseline = 100.0 / static_cast<double>(pairs[p].first);
            for (std::size_t s = 0; s < bundle.scenes.size(); ++s) {
                const auto& cell = per_scene[s][p * manifolds.size() + m];
                r.n_hits += cell.hits;
                r.n_evaluated += cell.evaluated;
            }
            if (r.n_evaluated > 0)
                r.hit_at_1 = 100.0 * static_cast<double>(r.n_hits) /
                             static_cast<double>(r.n_evaluated);
            results.push_back(r);
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// Separation
// ---------------------------------------------------------------------------

double centroid_depth(const Matrix& level_slots, const ManifoldSpec& manifold) {
    if (level_slots.rows == 0) throw InvalidInputError("centroid_depth: empty slot matrix");
    if (manifold.kind == ManifoldKind::Euclidean) {
        const auto c = euclidean_centroid(level_slots);
        return norm(c);
    }
    std::vector<LorentzPoint> mapped(level_slots.rows);
    for (std::size_t j = 0; j < level_slots.rows; ++j)
        mapped[j] = exp_map_origin(level_slots.row(j), manifold.curvature);
    const LorentzPoint mu = lorentz_centroid(mapped, manifold.curvature);
    const LorentzPoint o = lorentz_origin(level_slots.cols, manifold.curvature);
    return lorentz_distance(mu, o);
}

double silverman_bandwidth(std::span<const double> samples) {
    const auto n = samples.size();
    if (n < 2) throw DegenerateInputError("silverman_bandwidth: need at least 2 samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back())
        throw DegenerateInputError("silverman_bandwidth: need at least 2 distinct values");
    const double sigma = sample_std(samples);
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = iqr > 0.0 ? std::min(sigma, iqr / 1.34) : sigma;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double kde_overlap(std::span<const double> samples_a, std::span<const double> samples_b) {
    const double h_a = silverman_bandwidth(samples_a);
    const double h_b = silverman_bandwidth(samples_b);
    const double h_max = std::max(h_a, h_b);

    double lo = std::min(*std::min_element(samples_a.begin(), samples_a.end()),
                         *std::min_element(samples_b.begin(), samples_b.end()));
    double hi = std::max(*std::max_element(samples_a.begin(), samples_a.end()),
                         *std::max_element(samples_b.begin(), samples_b.end()));
    lo -= 3.0 * h_max;
    hi += 3.0 * h_max;

    constexpr std::size_t kGrid = 1024;
    const double dx = (hi - lo) / static_cast<double>(kGrid - 1);

    const auto density = [](std::span<const double> samples, double h, double x) {
        const double inv_h = 1.0 / h;
        const double sum = detail::pairwise_reduce(0, samples.size(), [&](std::size_t j) {
            const double t = (x - samples[j]) * inv_h;
            return std::exp(-0.5 * t * t);
        });
        return sum * inv_h / (static_cast<double>(samples.size()) * std::sqrt(kTwoPi));
    };

    std::vector<double> minimum(kGrid);
    for (std::size_t i = 0; i < kGrid; ++i) {
        const double x = lo + static_cast<double>(i) * dx;
        minimum[i] = std::min(density(samples_a, h_a, x), density(samples_b, h_b, x));
    }

    const double integral = detail::pairwise_reduce(0, kGrid - 1, [&](std::size_t i) {
                                return 0.5 * (minimum[i] + minimum[i + 1]);
                            }) *
                            dx;
    return std::clamp(integral, 0.0, 1.0);
}

SeparationResult separation_analysis(const SlotBundle& bundle, const ManifoldSpec& manifold,
                                     int workers) {
    SeparationResult result;
    result.manifold = manifold;
    result.levels = bundle.manifest.levels;

    std::vector<std::size_t> usable;
    for (std::size_t s = 0; s < bundle.scenes.size(); ++s) {
        bool complete = true;
        for (int level : result.levels)
            if (!bundle.scenes[s].levels.count(level)) complete = false;
        if (complete) {
            usable.push_back(s);
        } else {
            result.warnings.push_back("scene '" + bundle.scenes[s].id +
                                      "' skipped: missing levels");
        }
    }
    if (usable.size() < 2)
        throw InsufficientDataError("separation_analysis: need at least 2 usable scenes, have " +
                                    std::to_string(usable.size()));
    for (std::size_t u : usable) result.scene_ids.push_back(bundle.scenes[u].id);

    const std::size_t n_levels = result.levels.size();
    std::vector<std::vector<double>> samples(n_levels, std::vector<double>(usable.size(), 0.0));
    parallel_for(usable.size(), workers, [&](std::size_t u) {
        const SceneRecord& scene = bundle.scenes[usable[u]];
        for (std::size_t k = 0; k < n_levels; ++k)
            samples[k][u] = centroid_depth(scene.levels.at(result.levels[k]).slots, manifold);
    });
    for (std::size_t k = 0; k < n_levels; ++k)
        result.per_level_samples[result.levels[k]] = samples[k];

    result.ov_matrix.assign(n_levels, std::vector<double>(n_levels, 1.0));
    std::vector<double> pair_values;
    for (std::size_t a = 0; a < n_levels; ++a) {
        for (std::size_t b = a + 1; b < n_levels; ++b) {
            const double ov = kde_overlap(samples[a], samples[b]);
            result.ov_matrix[a][b] = ov;
            result.ov_matrix[b][a] = ov;
            pair_values.push_back(ov);
        }
    }
    result.ov_mean = pair_values.empty() ? 1.0 : mean(pair_values);

    result.mean_depths.resize(n_levels);
    for (std::size_t k = 0; k < n_levels; ++k) result.mean_depths[k] = mean(samples[k]);

    std::vector<std::size_t> order(n_levels);
    for (std::size_t k = 0; k < n_levels; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.mean_depths[a] > result.mean_depths[b];
    });
    for (std::size_t k = 0; k < n_levels; ++k)
        result.depth_order.push_back(result.levels[order[k]]);
    result.inverted = result.depth_order == result.levels;
    return result;
}

// ---------------------------------------------------------------------------
// Norm statistics
// ---------------------------------------------------------------------------

NormStats norm_stats(const SlotBundle& bundle, const ManifoldSpec& manifold, int workers) {
    if (bundle.scenes.empty()) throw InsufficientDataError("norm_stats: empty bundle");

    NormStats stats;
    stats.manifold = manifold;
    const auto& levels = bundle.manifest.levels;
    const bool lorentz = manifold.kind == ManifoldKind::Lorentz;

    // depth[level][scene-major slot index]; x0 likewise for Lorentz.
    std::vector<std::vector<double>> depths(levels.size());
    std::vector<std::vector<double>> x0s(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto n = static_cast<std::size_t>(levels[k]);
        depths[k].resize(bundle.scenes.size() * n);
        if (lorentz) x0s[k].resize(bundle.scenes.size() * n);
    }

    parallel_for(bundle.scenes.size(), workers, [&](std::size_t s) {
        const SceneRecord& scene = bundle.scenes[s];
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const Matrix& slots = scene.levels.at(levels[k]).slots;
            for (std::size_t j = 0; j < slots.rows; ++j) {
                const auto index = s * slots.rows + j;
                depths[k][index] = distance_to_origin(slots.row(j), manifold);
                if (lorentz)
                    x0s[k][index] =
                        exp_map_origin(slots.row(j), manifold.curvature).time_component();
            }
        }
    });

    for (std::size_t k = 0; k < levels.size(); ++k) {
        LevelNormStats level_stats;
        level_stats.mean = mean(depths[k]);
        level_stats.stddev = sample_std(depths[k]);
        if (lorentz) {
            level_stats.x0_mean = mean(x0s[k]);
            level_stats.x0_stddev = sample_std(x0s[k]);
        }
        stats.per_level[levels[k]] = level_stats;
    }
    stats.spread_ratio =
        stats.per_level.at(levels.front()).mean / stats.per_level.at(levels.back()).mean;
    return stats;
}

// ---------------------------------------------------------------------------
// Gromov delta
// ---------------------------------------------------------------------------

double gromov_delta(const Matrix& distances) {
    const std::size_t n = distances.rows;
    if (n != distances.cols)
        throw InvalidInputError("gromov_delta: matrix must be square");
    if (n < 4)
        throw InsufficientDataError("gromov_delta: need at least 4 points, have " +
                                    std::to_string(n));
    double diam = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        if (distances.at(a, a) != 0.0)
            throw InvalidInputError("gromov_delta: nonzero diagonal at index " +
                                    std::to_string(a));
        for (std::size_t b = 0; b < n; ++b) {
            const double v = distances.at(a, b);
            if (!std::isfinite(v) || v < 0.0)
                throw InvalidInputError("gromov_delta: invalid entry at (" + std::to_string(a) +
                                        "," + std::to_string(b) + ")");
            if (distances.at(a, b) != distances.at(b, a))
                throw InvalidInputError("gromov_delta: asymmetric input at (" +
                                        std::to_string(a) + "," + std::to_string(b) + ")");
            diam = std::max(diam, v);
        }
    }
    if (diam == 0.0) return 0.0;

    const double* d = distances.data.data();
    double worst = 0.0;  // max over quadruples of S1 - S2
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dij = d[i * n + j];
            for (std::size_t k = j + 1; k < n; ++k) {
                const double dik = d[i * n + k];
                const double djk = d[j * n + k];
                for (std::size_t l = k + 1; l < n; ++l) {
                    const double s1 = dij + d[k * n + l];
                    const double s2 = dik + d[j * n + l];
                    const double s3 = d[i * n + l] + djk;
                    double top = s1, second = s2;
                    if (second > top) std::swap(top, second);
                    if (s3 > top) {
                        second = top;
                        top = s3;
                    } else if (s3 > second) {
                        second = s3;
                    }
                    const double defect = top - second;
                    if (defect > worst) worst = defect;
                }
            }
        }
    }
    // defect = 2*delta per quadruple, so worst/diam is 2*delta/diam.
    return worst / diam;
}

// ---------------------------------------------------------------------------
// Hyperbolicity analyses
// ---------------------------------------------------------------------------

namespace {

HyperbolicityResult hyperbolicity_over(const SlotBundle& bundle, const ManifoldSpec& manifold,
                                       std::optional<int> level, int workers) {
    HyperbolicityResult result;
    result.manifold = manifold;
    result.level = level;

    std::vector<double> per_scene(bundle.scenes.size(), -1.0);
    std::vector<std::string> warnings(bundle.scenes.size());
    parallel_for(bundle.scenes.size(), workers, [&](std::size_t s) {
        const SceneRecord& scene = bundle.scenes[s];
        const Matrix points = level ? scene.levels.at(*level).slots
                                    : pooled_slots(scene, bundle.manifest.levels,
                                                   bundle.manifest.slot_dim);
        if (points.rows < 4) {
            warnings[s] = "scene '" + scene.id + "' skipped: fewer than 4 slots";
            return;
        }
        per_scene[s] = gromov_delta(self_distances(points, manifold));
    });

    for (std::size_t s = 0; s < bundle.scenes.size(); ++s) {
        if (!warnings[s].empty()) {
            result.warnings.push_back(warnings[s]);
            continue;
        }
        result.scene_ids.push_back(bundle.scenes[s].id);
        result.per_scene_delta.push_back(per_scene[s]);
    }
    if (result.per_scene_delta.empty())
        throw InsufficientDataError("hyperbolicity: no scene has at least 4 slots");
    result.summary = summarize(result.per_scene_delta);
    return result;
}

} // namespace

HyperbolicityResult hyperbolicity_analysis(const SlotBundle& bundle, const ManifoldSpec& manifold,
                                           int workers) {
    return hyperbolicity_over(bundle, manifold, std::nullopt, workers);
}

std::vector<HyperbolicityResult> hyperbolicity_per_level(const SlotBundle& bundle,
                                                         const ManifoldSpec& manifold,
                                                         int workers) {
    std::vector<HyperbolicityResult> results;
    for (int level : bundle.manifest.levels) {
        if (level < 4) continue;  // quadruples need 4 points
        results.push_back(hyperbolicity_over(bundle, manifold, level, workers));
    }
    return results;
}

// ---------------------------------------------------------------------------
// Agreement
// ---------------------------------------------------------------------------

AgreementMatrix agreement_analysis(const SlotBundle& bundle,
                                   const std::vector<HierarchyGraph>& hierarchies,
                                   const std::vector<ManifoldSpec>& manifolds, int workers) {
    if (hierarchies.size() != bundle.scenes.size())
        throw InvalidInputError("agreement_analysis: one hierarchy per scene required");
    const auto pairs = consecutive_pairs(bundle.manifest.levels);
    const std::size_t n_systems = manifolds.size() + 1;  // + mask-based ground truth

    struct SceneCounts {
        std::vector<std::size_t> agree;  // n_systems x n_systems
        std::size_t total = 0;
    };
    std::vector<SceneCounts> per_scene(bundle.scenes.size());

    parallel_for(bundle.scenes.size(), workers, [&](std::size_t s) {
        SceneCounts counts;
        counts.agree.assign(n_systems * n_systems, 0);
        const SceneRecord& scene = bundle.scenes[s];
        for (const auto& pair : pairs) {
            const auto* gt = hierarchies[s].find(pair.first, pair.second);
            if (gt == nullptr)
                throw InvalidInputError("agreement_analysis: scene '" + scene.id +
                                        "' lacks an assignment for pair (" +
                                        std::to_string(pair.first) + "," +
                                        std::to_string(pair.second) + ")");
            const Matrix& coarse = scene.levels.at(pair.first).slots;
            const Matrix& fine = scene.levels.at(pair.second).slots;

            std::vector<Matrix> dists;
            dists.reserve(manifolds.size());
            for (const auto& m : manifolds) dists.push_back(retrieval_distances(coarse, fine, m));

            for (std::size_t j = 0; j < fine.rows; ++j) {
                if (gt->is_excluded(j)) continue;
                std::vector<int> prediction(n_systems);
                for (std::size_t m = 0; m < manifolds.size(); ++m) {
                    int best = 0;
                    double best_distance = dists[m].at(j, 0);
                    for (std::size_t i = 1; i < coarse.rows; ++i) {
                        if (dists[m].at(j, i) < best_distance) {  // ties keep the lowest index
                            best_distance = dists[m].at(j, i);
                            best = static_cast<int>(i);
                        }
                    }
                    prediction[m] = best;
                }
                prediction[manifolds.size()] = gt->parent_of[j];
                ++counts.total;
                for (std::size_t a = 0; a < n_systems; ++a)
                    for (std::size_t b = 0; b < n_systems; ++b)
                        if (prediction[a] == prediction[b]) ++counts.agree[a * n_systems + b];
            }
        }
        per_scene[s] = std::move(counts);
    });

    std::vector<std::size_t> agree(n_systems * n_systems, 0);
    std::size_t total = 0;
    for (const auto& counts : per_scene) {
        total += counts.total;
        for (std::size_t i = 0; i < agree.size(); ++i) agree[i] += counts.agree[i];
    }
    if (total == 0)
        throw InsufficientDataError("agreement_analysis: no non-excluded fine slots");

    AgreementMatrix result;
    for (const auto& m : manifolds) result.systems.push_back(m.name());
    result.systems.push_back("gt");
    result.n_evaluated = total;
    result.entries.assign(n_systems, std::vector<double>(n_systems, 0.0));
    for (std::size_t a = 0; a < n_systems; ++a)
        for (std::size_t b = 0; b < n_systems; ++b)
            result.entries[a][b] = static_cast<double>(agree[a * n_systems + b]) /
                                   static_cast<double>(total);
    return result;
}

} // namespace hyperlens
