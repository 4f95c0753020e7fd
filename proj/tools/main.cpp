#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperlens/bundle.hpp"
#include "hyperlens/errors.hpp"
#include "hyperlens/pipeline.hpp"
#include "hyperlens/report.hpp"
#include "hyperlens/synthetic.hpp"
#include "hyperlens/version.hpp"

namespace {

using namespace hyperlens;

// Exit-code contract, stable across versions.
constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;

// Decreasing mean-norm profile applied by `gen --norm-profile auto` on the
// default level set; coarse levels get larger norms than fine ones.
const std::map<int, double> kDefaultNormProfile = {
    {3, 1.446}, {5, 1.254}, {7, 1.193}, {11, 1.146}, {13, 1.137}};

const std::vector<int> kDefaultLevels = {3, 5, 7, 11, 13};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, sep)) parts.push_back(item);
    return parts;
}

std::vector<int> parse_levels(const std::string& text) {
    std::vector<int> levels;
    for (const auto& part : split(text, ',')) {
        try {
            levels.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse level '" + part + "'");
        }
    }
    return levels;
}

std::vector<ManifoldSpec> parse_manifolds(const std::string& text) {
    std::vector<ManifoldSpec> manifolds;
    for (const auto& part : split(text, ',')) manifolds.push_back(ManifoldSpec::parse(part));
    if (manifolds.empty()) throw ConfigError("at least one manifold required");
    return manifolds;
}

std::map<int, double> parse_norm_profile(const std::string& text, const std::vector<int>& levels) {
    if (text == "none") return {};
    if (text == "auto") return levels == kDefaultLevels ? kDefaultNormProfile
                                                        : std::map<int, double>{};
    std::map<int, double> profile;
    for (const auto& part : split(text, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw ConfigError("norm profile entries must look like N=V, got '" + part + "'");
        try {
            profile[std::stoi(part.substr(0, eq))] = std::stod(part.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse norm profile entry '" + part + "'");
        }
    }
    return profile;
}

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("HYPERLENS_WORKERS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    return 0;  // pick hardware concurrency
}

AnalysisSelection parse_selection(const std::string& only) {
    if (only.empty()) return {};
    AnalysisSelection sel{false, false, false, false, false};
    for (const auto& name : split(only, ',')) {
        if (name == "retrieve")
            sel.retrieval = true;
        else if (name == "separate")
            sel.separation = true;
        else if (name == "norms")
            sel.norms = true;
        else if (name == "hyperbolicity")
            sel.hyperbolicity = true;
        else if (name == "agreement")
            sel.agreement = true;
        else
            throw ConfigError("unknown analysis '" + name +
                              "' (expected retrieve, separate, norms, hyperbolicity, agreement)");
    }
    return sel;
}

void print_summary(const AnalysisReport& report, std::ostream& out) {
    if (report.retrieval && !report.retrieval->empty()) {
        std::vector<std::string> pairs;
        for (const auto& r : *report.retrieval) {
            const std::string label = std::to_string(r.level_pair.first) + "-" +
                                      std::to_string(r.level_pair.second);
            if (std::find(pairs.begin(), pairs.end(), label) == pairs.end())
                pairs.push_back(label);
        }
        out << "Hit@1 (%) by level pair\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-16s", "manifold");
        out << buf;
        for (const auto& p : pairs) {
            std::snprintf(buf, sizeof(buf), "%10s", p.c_str());
            out << buf;
        }
        out << "\n";
        for (const auto& m : report.options.manifolds) {
            std::snprintf(buf, sizeof(buf), "%-16s", m.name().c_str());
            out << buf;
            for (const auto& r : *report.retrieval)
                if (r.manifold == m) {
                    std::snprintf(buf, sizeof(buf), "%10.2f", r.hit_at_1);
                    out << buf;
                }
            out << "\n";
        }
        std::snprintf(buf, sizeof(buf), "%-16s", "(baseline)");
        out << buf;
        for (const auto& p : pairs) {
            for (const auto& r : *report.retrieval) {
                const std::string label = std::to_string(r.level_pair.first) + "-" +
                                          std::to_string(r.level_pair.second);
                if (label == p && r.manifold == report.options.manifolds.front()) {
                    std::snprintf(buf, sizeof(buf), "%10.2f", r.random_baseline);
                    out << buf;
                    break;
                }
            }
        }
        out << "\n\n";
    }
    if (report.separation) {
        out << "Level separation (mean pairwise OV; lower = better separated)\n";
        for (const auto& r : *report.separation) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%-16s ov_mean=%.4f inverted=%s\n",
                          r.manifold.name().c_str(), r.ov_mean, r.inverted ? "yes" : "no");
            out << buf;
        }
        out << "\n";
    }
    if (report.norms) {
        out << "Slot depth spread (coarsest/finest mean)\n";
        for (const auto& r : *report.norms) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%-16s spread_ratio=%.4f\n",
                          r.manifold.name().c_str(), r.spread_ratio);
            out << buf;
        }
        out << "\n";
    }
    if (report.hyperbolicity) {
        out << "Gromov hyperbolicity (mean delta_norm; lower = more tree-like)\n";
        for (const auto& r : *report.hyperbolicity) {
            char buf[128];
            const std::string tag =
                r.level ? r.manifold.name() + " level " + std::to_string(*r.level)
                        : r.manifold.name();
            std::snprintf(buf, sizeof(buf), "%-24s mean=%.4f median=%.4f\n", tag.c_str(),
                          r.summary.mean, r.summary.median);
            out << buf;
        }
        out << "\n";
    }
    if (report.agreement) {
        out << "Cross-manifold agreement (fraction of matching parent picks)\n";
        const auto& a = *report.agreement;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-16s", "");
        out << buf;
        for (const auto& s : a.systems) {
            std::snprintf(buf, sizeof(buf), "%13s", s.c_str());
            out << buf;
        }
        out << "\n";
        for (std::size_t i = 0; i < a.systems.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%-16s", a.systems[i].c_str());
            out << buf;
            for (std::size_t k = 0; k < a.systems.size(); ++k) {
                std::snprintf(buf, sizeof(buf), "%13.4f", a.entries[i][k]);
                out << buf;
            }
            out << "\n";
        }
    }
}

struct GenArgs {
    std::string out_dir;
    std::size_t scenes = 100;
    std::size_t dim = 64;
    std::size_t patches = 576;
    std::string levels = "3,5,7,11,13";
    std::uint64_t seed = 0;
    double separation = 1.0;
    double child_noise = 0.05;
    std::string norm_profile = "auto";
    std::string slot_model = "planted";
};

int run_gen(const GenArgs& args, bool quiet) {
    SyntheticConfig config;
    config.n_scenes = args.scenes;
    config.slot_dim = args.dim;
    config.patch_count = args.patches;
    config.levels = parse_levels(args.levels);
    config.seed = args.seed;
    config.parent_separation = args.separation;
    config.child_noise = args.child_noise;
    config.norm_profile = parse_norm_profile(args.norm_profile, config.levels);
    if (args.slot_model == "planted")
        config.slot_model = SlotModel::Planted;
    else if (args.slot_model == "iid")
        config.slot_model = SlotModel::IidGaussian;
    else
        throw ConfigError("unknown slot model '" + args.slot_model +
                          "' (expected planted or iid)");

    const SlotBundle bundle = generate_synthetic(config);
    save_bundle(bundle, args.out_dir);
    if (!quiet)
        std::cout << "generated " << bundle.scenes.size() << " scenes (seed " << config.seed
                  << ") -> " << args.out_dir << "\n";
    return kExitOk;
}

struct AnalyzeArgs {
    std::string bundle_dir;
    std::string manifolds = "euclidean,lorentz:0.2,lorentz:0.5,lorentz:1.0";
    std::string only;
    std::string report_path = "report.json";
    std::string csv_dir;
    std::string binarize = "argmax";
    double threshold = 0.5;
    double tau_excl = 0.95;
    int workers = 0;
    bool per_level = false;
    std::uint64_t seed = 0;
};

int run_analyze(const AnalyzeArgs& args, bool quiet) {
    RunOptions options;
    options.manifolds = parse_manifolds(args.manifolds);
    options.analyses = parse_selection(args.only);
    if (args.binarize == "argmax") {
        options.binarize.policy = BinarizePolicy::Argmax;
    } else if (args.binarize == "threshold") {
        options.binarize.policy = BinarizePolicy::Threshold;
        options.binarize.threshold = args.threshold;
    } else {
        throw ConfigError("unknown binarization policy '" + args.binarize + "'");
    }
    options.tau_excl = args.tau_excl;
    options.workers = resolve_workers(args.workers);
    options.hyperbolicity_per_level = args.per_level;
    options.seed = args.seed;

    if (!quiet) std::cerr << "loading bundle " << args.bundle_dir << "\n";
    const SlotBundle bundle = load_bundle(args.bundle_dir);
    if (!quiet)
        std::cerr << "analyzing " << bundle.scenes.size() << " scenes with "
                  << options.manifolds.size() << " manifolds\n";

    const AnalysisReport report = run_analyses(bundle, options, args.bundle_dir);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

    write_report_json(report, args.report_path);
    if (!args.csv_dir.empty()) write_report_csv(report, args.csv_dir);
    if (!quiet) {
        print_summary(report, std::cout);
        std::cerr << "report written to " << args.report_path << "\n";
    }
    return kExitOk;
}

int run_validate(const std::string& bundle_dir, bool quiet) {
    const auto issues = validate_bundle_dir(bundle_dir);
    if (issues.empty()) {
        if (!quiet) std::cout << "all scenes OK\n";
        return kExitOk;
    }
    for (const auto& issue : issues) {
        if (issue.scene_id.empty())
            std::cout << "bundle: " << issue.message << "\n";
        else if (issue.level == 0)
            std::cout << "scene " << issue.scene_id << ": " << issue.message << "\n";
        else
            std::cout << "scene " << issue.scene_id << " level " << issue.level << ": "
                      << issue.message << "\n";
    }
    std::cout << issues.size() << " violation(s)\n";
    return kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperlens: hyperbolic lens on object-centric slot bundles"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress human-readable output on stdout");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic slot bundle");
    gen_cmd->add_option("-o,--out", gen.out_dir, "output bundle directory")->required();
    gen_cmd->add_option("--scenes", gen.scenes, "number of scenes");
    gen_cmd->add_option("--dim", gen.dim, "slot dimension d_s");
    gen_cmd->add_option("--patches", gen.patches, "patch count L");
    gen_cmd->add_option("--levels", gen.levels, "comma-separated granularity levels");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--separation", gen.separation, "top-level cluster separation");
    gen_cmd->add_option("--child-noise", gen.child_noise,
                        "child offset std relative to separation");
    gen_cmd->add_option("--norm-profile", gen.norm_profile,
                        "auto, none, or N=V[,N=V...] target mean norms");
    gen_cmd->add_option("--slot-model", gen.slot_model, "planted or iid");

    AnalyzeArgs analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "run analyses over a bundle");
    analyze_cmd->add_option("bundle", analyze.bundle_dir, "bundle directory")->required();
    analyze_cmd->add_option("--manifolds", analyze.manifolds,
                            "comma-separated manifolds, e.g. euclidean,lorentz:0.5");
    analyze_cmd->add_flag("--all", "run all analyses (default)");
    analyze_cmd->add_option("--only", analyze.only,
                            "subset of retrieve,separate,norms,hyperbolicity,agreement");
    analyze_cmd->add_option("-o,--out", analyze.report_path, "report JSON path");
    analyze_cmd->add_option("--csv", analyze.csv_dir, "directory for tabular CSV exports");
    analyze_cmd->add_option("--binarize", analyze.binarize, "argmax or threshold");
    analyze_cmd->add_option("--threshold", analyze.threshold,
                            "binarization threshold in (0,1) for --binarize threshold");
    analyze_cmd->add_option("--tau-excl", analyze.tau_excl,
                            "near-duplicate exclusion threshold");
    analyze_cmd->add_option("--workers", analyze.workers,
                            "worker threads (default: HYPERLENS_WORKERS or all cores)");
    analyze_cmd->add_flag("--hyperbolicity-per-level", analyze.per_level,
                          "score hyperbolicity per level instead of pooled");
    analyze_cmd->add_option("--seed", analyze.seed, "seed echoed into the report");

    std::string validate_dir;
    auto* validate_cmd = app.add_subcommand("validate", "check bundle integrity");
    validate_cmd->add_option("bundle", validate_dir, "bundle directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen_cmd->parsed()) return run_gen(gen, quiet);
        if (analyze_cmd->parsed()) return run_analyze(analyze, quiet);
        if (validate_cmd->parsed()) return run_validate(validate_dir, quiet);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
