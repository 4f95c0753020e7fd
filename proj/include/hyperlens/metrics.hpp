#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperlens/bundle.hpp"
#include "hyperlens/hierarchy.hpp"
#include "hyperlens/manifold.hpp"
#include "hyperlens/numeric.hpp"

namespace hyperlens {

// ---------------------------------------------------------------------------
// Parent retrieval (Hit@1)
// ---------------------------------------------------------------------------

struct RetrievalResult {
    std::pair<int, int> level_pair{0, 0};  // (coarse N1, fine N2)
    ManifoldSpec manifold;
    double hit_at_1 = 0.0;         // percent; 0 when nothing was evaluated
    std::size_t n_hits = 0;
    std::size_t n_evaluated = 0;   // non-excluded fine slots
    double random_baseline = 0.0;  // percent, 100 / N1
};

// Ranks all coarse slots by distance to each non-excluded fine slot and
// scores a hit when the assigned parent is strictly closest; rank-1 ties
// count as misses. Euclidean manifolds rank by cosine distance on the raw
// slots, Lorentz manifolds by geodesic distance after exp-mapping both
// levels. All fine slots excluded is an empty result, not an error.
RetrievalResult hit_at_1(const Matrix& coarse_slots, const Matrix& fine_slots,
                         const ParentAssignment& gt, const ManifoldSpec& manifold);

// Pools hits over every scene for each (level pair, manifold) combination.
std::vector<RetrievalResult> retrieval_analysis(const SlotBundle& bundle,
                                                const std::vector<HierarchyGraph>& hierarchies,
                                                const std::vector<ManifoldSpec>& manifolds,
                                                int workers = 1);

// ---------------------------------------------------------------------------
// Level separation: depth distributions and KDE overlap
// ---------------------------------------------------------------------------

// Depth of one level of one scene: the distance from the level centroid to
// the origin, with the centroid taken in the manifold's own geometry.
double centroid_depth(const Matrix& level_slots, const ManifoldSpec& manifold);

// Bandwidth by Silverman's rule, 0.9 * min(sigma, IQR/1.34) * n^(-1/5);
// falls back to sigma when the IQR collapses.
double silverman_bandwidth(std::span<const double> samples);

// Overlap of two Gaussian KDEs: both densities are evaluated on a shared
// 1024-point grid spanning [min - 3h, max + 3h] of the pooled samples and
// the pointwise minimum is integrated by the trapezoidal rule. Symmetric
// bit-exactly; result clamped to [0, 1].
double kde_overlap(std::span<const double> samples_a, std::span<const double> samples_b);

struct SeparationResult {
    ManifoldSpec manifold;
    std::vector<int> levels;
    std::vector<std::string> scene_ids;                    // usable scenes, bundle order
    std::map<int, std::vector<double>> per_level_samples;  // aligned with scene_ids
    std::vector<std::vector<double>> ov_matrix;            // levels x levels, unit diagonal
    double ov_mean = 0.0;                                  // mean over distinct level pairs
    std::vector<double> mean_depths;                       // aligned with `levels`
    std::vector<int> depth_order;                          // levels by decreasing mean depth
    bool inverted = false;                                 // coarse level deepest
    std::vector<std::string> warnings;
};

SeparationResult separation_analysis(const SlotBundle& bundle, const ManifoldSpec& manifold,
                                     int workers = 1);

// ---------------------------------------------------------------------------
// Slot norm statistics
// ---------------------------------------------------------------------------

struct LevelNormStats {
    double mean = 0.0;
    double stddev = 0.0;
    // Lorentz manifolds also report the hyperboloid time coordinate of the
    // projected slots; the geodesic depth itself equals the Euclidean norm
    // by radial isometry.
    std::optional<double> x0_mean;
    std::optional<double> x0_stddev;
};

struct NormStats {
    ManifoldSpec manifold;
    std::map<int, LevelNormStats> per_level;
    double spread_ratio = 0.0;  // mean depth at the coarsest / finest level
};

// Per-slot distance-to-origin statistics over all scenes (individual slots,
// not centroids).
NormStats norm_stats(const SlotBundle& bundle, const ManifoldSpec& manifold, int workers = 1);

// ---------------------------------------------------------------------------
// Gromov delta-hyperbolicity
// ---------------------------------------------------------------------------

// Normalized worst-case four-point condition: for every unordered quadruple
// the three pairing sums are ranked S1 >= S2 >= S3 and the defect is
// (S1 - S2) / 2; the worst defect, doubled and divided by the diameter,
// gives a scale-invariant score in [0, 1]. Zero for tree metrics; 0 when
// the diameter is 0. Exact O(n^4) enumeration.
double gromov_delta(const Matrix& distances);

struct HyperbolicitySummary {
    double mean = 0.0;
    double stddev = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
};

struct HyperbolicityResult {
    ManifoldSpec manifold;
    std::optional<int> level;  // set in per-level mode
    std::vector<std::string> scene_ids;
    std::vector<double> per_scene_delta;
    HyperbolicitySummary summary;
    std::vector<std::string> warnings;
};

// Pools the slots of all levels per scene (39 points for the default level
// set), builds the pairwise distance matrix in the manifold's geometry
// (l2 for Euclidean, geodesic for Lorentz) and scores gromov_delta. Scenes
// with fewer than 4 slots are skipped with a warning.
HyperbolicityResult hyperbolicity_analysis(const SlotBundle& bundle, const ManifoldSpec& manifold,
                                           int workers = 1);

// Same score restricted to a single level's slots per scene (one result per
// level with at least 4 slots).
std::vector<HyperbolicityResult> hyperbolicity_per_level(const SlotBundle& bundle,
                                                         const ManifoldSpec& manifold,
                                                         int workers = 1);

// ---------------------------------------------------------------------------
// Cross-manifold agreement
// ---------------------------------------------------------------------------

struct AgreementMatrix {
    std::vector<std::string> systems;           // manifold names, then "gt"
    std::vector<std::vector<double>> entries;   // symmetric, unit diagonal
    std::size_t n_evaluated = 0;                // pooled non-excluded fine slots
};

// Each manifold predicts a parent per fine slot (argmin distance, ties to
// the lowest coarse index); the mask-based assignment is the "gt" system.
// Entry (a, b) is the fraction of pooled non-excluded fine slots, over all
// scenes and consecutive level pairs, where the two systems agree.
AgreementMatrix agreement_analysis(const SlotBundle& bundle,
                                   const std::vector<HierarchyGraph>& hierarchies,
                                   const std::vector<ManifoldSpec>& manifolds, int workers = 1);

} // namespace hyperlens
