#include "hyperlens/pipeline.hpp"

#include "hyperlens/errors.hpp"

namespace hyperlens {

std::vector<HierarchyGraph> build_hierarchies(const SlotBundle& bundle,
                                              const BinarizeOptions& binarize, double tau_excl,
                                              int workers) {
    std::vector<HierarchyGraph> graphs(bundle.scenes.size());
    parallel_for(bundle.scenes.size(), workers, [&](std::size_t s) {
        const SceneRecord& scene = bundle.scenes[s];
        std::map<int, Matrix> masks;
        for (const auto& [level, data] : scene.levels) masks.emplace(level, data.masks);
        graphs[s] = build_hierarchy(scene.id, masks, bundle.manifest.levels, binarize, tau_excl);
    });
    return graphs;
}

AnalysisReport run_analyses(const SlotBundle& bundle, const RunOptions& options,
                            const std::string& bundle_path) {
    if (options.manifolds.empty())
        throw ConfigError("run_analyses: at least one manifold required");

    AnalysisReport report;
    report.options = options;
    report.bundle.path = bundle_path;
    report.bundle.n_scenes = bundle.scenes.size();
    report.bundle.slot_dim = bundle.manifest.slot_dim;
    report.bundle.patch_count = bundle.manifest.patch_count;
    report.bundle.levels = bundle.manifest.levels;
    report.bundle.source = bundle.manifest.source;
    report.bundle.planted = bundle.manifest.planted;

    const auto& sel = options.analyses;
    const int workers = options.workers;

    std::vector<HierarchyGraph> hierarchies;
    if (sel.retrieval || sel.agreement)
        hierarchies = build_hierarchies(bundle, options.binarize, options.tau_excl, workers);

    if (sel.retrieval)
        report.retrieval = retrieval_analysis(bundle, hierarchies, options.manifolds, workers);

    if (sel.separation) {
        std::vector<SeparationResult> results;
        for (const auto& manifold : options.manifolds) {
            auto r = separation_analysis(bundle, manifold, workers);
            for (const auto& w : r.warnings) report.warnings.push_back(w);
            results.push_back(std::move(r));
        }
        report.separation = std::move(results);
    }

    if (sel.norms) {
        std::vector<NormStats> results;
        for (const auto& manifold : options.manifolds)
            results.push_back(norm_stats(bundle, manifold, workers));
        report.norms = std::move(results);
    }

    if (sel.hyperbolicity) {
        std::vector<HyperbolicityResult> results;
        for (const auto& manifold : options.manifolds) {
            if (options.hyperbolicity_per_level) {
                for (auto& r : hyperbolicity_per_level(bundle, manifold, workers)) {
                    for (const auto& w : r.warnings) report.warnings.push_back(w);
                    results.push_back(std::move(r));
                }
            } else {
                auto r = hyperbolicity_analysis(bundle, manifold, workers);
                for (const auto& w : r.warnings) report.warnings.push_back(w);
                results.push_back(std::move(r));
            }
        }
        report.hyperbolicity = std::move(results);
    }

    if (sel.agreement)
        report.agreement = agreement_analysis(bundle, hierarchies, options.manifolds, workers);

    return report;
}

} // namespace hyperlens
