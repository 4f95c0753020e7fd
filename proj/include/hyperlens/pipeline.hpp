#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyperlens/bundle.hpp"
#include "hyperlens/hierarchy.hpp"
#include "hyperlens/metrics.hpp"

namespace hyperlens {

struct AnalysisSelection {
    bool retrieval = true;
    bool separation = true;
    bool norms = true;
    bool hyperbolicity = true;
    bool agreement = true;
};

struct RunOptions {
    std::vector<ManifoldSpec> manifolds;
    AnalysisSelection analyses;
    BinarizeOptions binarize;
    double tau_excl = 0.95;
    int workers = 0;  // 0 = hardware concurrency
    bool hyperbolicity_per_level = false;
    std::uint64_t seed = 0;  // echoed into the report; reserved for subsampling
};

struct BundleSummary {
    std::string path;
    std::size_t n_scenes = 0;
    std::size_t slot_dim = 0;
    std::size_t patch_count = 0;
    std::vector<int> levels;
    std::string source;
    bool planted = false;
};

// Aggregated output of one run. Analyses that were not requested stay
// unset and serialize as explicit nulls.
struct AnalysisReport {
    RunOptions options;
    BundleSummary bundle;
    std::optional<std::vector<RetrievalResult>> retrieval;
    std::optional<std::vector<SeparationResult>> separation;
    std::optional<std::vector<NormStats>> norms;
    std::optional<std::vector<HyperbolicityResult>> hyperbolicity;
    std::optional<AgreementMatrix> agreement;
    std::vector<std::string> warnings;
};

// Builds hierarchies once, then runs the selected analyses for every
// manifold. Scene-level work is parallel; every aggregation is a fixed-order
// reduction, so output is identical for any worker count.
AnalysisReport run_analyses(const SlotBundle& bundle, const RunOptions& options,
                            const std::string& bundle_path = "");

// Mask-derived parent assignments for every scene, in bundle order.
std::vector<HierarchyGraph> build_hierarchies(const SlotBundle& bundle,
                                              const BinarizeOptions& binarize, double tau_excl,
                                              int workers);

} // namespace hyperlens
