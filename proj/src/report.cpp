#include "hyperlens/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "hyperlens/errors.hpp"
#include "hyperlens/version.hpp"

namespace hyperlens {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_sig6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

double round_sig6(double value) { return std::strtod(format_sig6(value).c_str(), nullptr); }

namespace {

ordered_json sig6(double value) { return round_sig6(value); }

ordered_json sig6_array(const std::vector<double>& values) {
    ordered_json arr = ordered_json::array();
    for (double v : values) arr.push_back(sig6(v));
    return arr;
}

std::string pair_label(const std::pair<int, int>& pair) {
    return std::to_string(pair.first) + "-" + std::to_string(pair.second);
}

std::vector<std::string> selected_analyses(const AnalysisSelection& sel) {
    std::vector<std::string> names;
    if (sel.retrieval) names.push_back("retrieve");
    if (sel.separation) names.push_back("separate");
    if (sel.norms) names.push_back("norms");
    if (sel.hyperbolicity) names.push_back("hyperbolicity");
    if (sel.agreement) names.push_back("agreement");
    return names;
}

ordered_json config_to_json(const RunOptions& options) {
    ordered_json j;
    ordered_json manifolds = ordered_json::array();
    for (const auto& m : options.manifolds) manifolds.push_back(m.name());
    j["manifolds"] = manifolds;
    j["analyses"] = selected_analyses(options.analyses);
    ordered_json binarize;
    binarize["policy"] =
        options.binarize.policy == BinarizePolicy::Argmax ? "argmax" : "threshold";
    if (options.binarize.policy == BinarizePolicy::Threshold)
        binarize["threshold"] = sig6(options.binarize.threshold);
    j["binarization"] = binarize;
    j["tau_excl"] = sig6(options.tau_excl);
    j["hyperbolicity_per_level"] = options.hyperbolicity_per_level;
    j["seed"] = options.seed;
    return j;
}

ordered_json retrieval_to_json(const std::vector<RetrievalResult>& results) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : results) {
        ordered_json j;
        j["pair"] = ordered_json::array({r.level_pair.first, r.level_pair.second});
        j["manifold"] = r.manifold.name();
        j["hit_at_1"] = sig6(r.hit_at_1);
        j["n_hits"] = r.n_hits;
        j["n_evaluated"] = r.n_evaluated;
        j["random_baseline"] = sig6(r.random_baseline);
        arr.push_back(j);
    }
    return arr;
}

ordered_json separation_to_json(const std::vector<SeparationResult>& results) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : results) {
        ordered_json j;
        j["manifold"] = r.manifold.name();
        j["levels"] = r.levels;
        j["ov_mean"] = sig6(r.ov_mean);
        ordered_json matrix = ordered_json::array();
        for (const auto& row : r.ov_matrix) matrix.push_back(sig6_array(row));
        j["ov_matrix"] = matrix;
        j["mean_depths"] = sig6_array(r.mean_depths);
        j["depth_order"] = r.depth_order;
        j["inverted"] = r.inverted;
        j["scene_ids"] = r.scene_ids;
        ordered_json samples;
        for (int level : r.levels)
            samples[std::to_string(level)] = sig6_array(r.per_level_samples.at(level));
        j["samples"] = samples;
        arr.push_back(j);
    }
    return arr;
}

ordered_json norms_to_json(const std::vector<NormStats>& results) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : results) {
        ordered_json j;
        j["manifold"] = r.manifold.name();
        ordered_json per_level;
        for (const auto& [level, stats] : r.per_level) {
            ordered_json s;
            s["mean"] = sig6(stats.mean);
            s["std"] = sig6(stats.stddev);
            s["x0_mean"] = stats.x0_mean ? ordered_json(sig6(*stats.x0_mean)) : nullptr;
            s["x0_std"] = stats.x0_stddev ? ordered_json(sig6(*stats.x0_stddev)) : nullptr;
            per_level[std::to_string(level)] = s;
        }
        j["per_level"] = per_level;
        j["spread_ratio"] = sig6(r.spread_ratio);
        arr.push_back(j);
    }
    return arr;
}

ordered_json hyperbolicity_to_json(const std::vector<HyperbolicityResult>& results) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : results) {
        ordered_json j;
        j["manifold"] = r.manifold.name();
        j["level"] = r.level ? ordered_json(*r.level) : nullptr;
        ordered_json summary;
        summary["mean"] = sig6(r.summary.mean);
        summary["std"] = sig6(r.summary.stddev);
        summary["q25"] = sig6(r.summary.q25);
        summary["median"] = sig6(r.summary.median);
        summary["q75"] = sig6(r.summary.q75);
        j["summary"] = summary;
        j["scene_ids"] = r.scene_ids;
        j["delta_norm"] = sig6_array(r.per_scene_delta);
        arr.push_back(j);
    }
    return arr;
}

ordered_json agreement_to_json(const AgreementMatrix& agreement) {
    ordered_json j;
    j["systems"] = agreement.systems;
    j["n_evaluated"] = agreement.n_evaluated;
    ordered_json matrix = ordered_json::array();
    for (const auto& row : agreement.entries) matrix.push_back(sig6_array(row));
    j["matrix"] = matrix;
    return j;
}

// Minimal RFC-4180 writer: CRLF records, quoting only where required.
class CsvWriter {
public:
    explicit CsvWriter(const fs::path& file) : out_(file, std::ios::binary) {
        if (!out_) throw IoError("cannot open for writing: " + file.string());
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << escape(fields[i]);
        }
        out_ << "\r\n";
        if (!out_) throw IoError("csv write failed");
    }

private:
    static std::string escape(const std::string& field) {
        if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
        std::string quoted = "\"";
        for (char c : field) {
            quoted += c;
            if (c == '"') quoted += '"';
        }
        quoted += '"';
        return quoted;
    }

    std::ofstream out_;
};

} // namespace

std::string report_to_json(const AnalysisReport& report) {
    ordered_json j;
    j["toolkit"] = "hyperlens";
    j["version"] = kVersion;
    j["config"] = config_to_json(report.options);

    ordered_json bundle;
    bundle["path"] = report.bundle.path;
    bundle["scenes"] = report.bundle.n_scenes;
    bundle["d_s"] = report.bundle.slot_dim;
    bundle["L"] = report.bundle.patch_count;
    bundle["levels"] = report.bundle.levels;
    bundle["source"] = report.bundle.source;
    bundle["planted"] = report.bundle.planted;
    j["bundle"] = bundle;

    ordered_json results;
    results["retrieval"] =
        report.retrieval ? retrieval_to_json(*report.retrieval) : ordered_json(nullptr);
    results["separation"] =
        report.separation ? separation_to_json(*report.separation) : ordered_json(nullptr);
    results["norms"] = report.norms ? norms_to_json(*report.norms) : ordered_json(nullptr);
    results["hyperbolicity"] = report.hyperbolicity
                                   ? hyperbolicity_to_json(*report.hyperbolicity)
                                   : ordered_json(nullptr);
    results["agreement"] =
        report.agreement ? agreement_to_json(*report.agreement) : ordered_json(nullptr);
    j["results"] = results;
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

void write_report_json(const AnalysisReport& report, const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    const std::string text = report_to_json(report);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + file.string());
}

void write_report_csv(const AnalysisReport& report, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    if (report.retrieval) {
        CsvWriter csv(dir / "retrieval.csv");
        csv.row({"pair", "manifold", "hit_at_1", "n_evaluated", "baseline"});
        for (const auto& r : *report.retrieval)
            csv.row({pair_label(r.level_pair), r.manifold.name(), format_sig6(r.hit_at_1),
                     std::to_string(r.n_evaluated), format_sig6(r.random_baseline)});
    }
    if (report.separation) {
        CsvWriter csv(dir / "separation_samples.csv");
        csv.row({"manifold", "level", "scene_id", "depth"});
        for (const auto& r : *report.separation)
            for (int level : r.levels) {
                const auto& samples = r.per_level_samples.at(level);
                for (std::size_t s = 0; s < samples.size(); ++s)
                    csv.row({r.manifold.name(), std::to_string(level), r.scene_ids[s],
                             format_sig6(samples[s])});
            }
    }
    if (report.norms) {
        CsvWriter csv(dir / "norms.csv");
        csv.row({"manifold", "level", "mean", "std", "x0_mean", "x0_std", "spread_ratio"});
        for (const auto& r : *report.norms)
            for (const auto& [level, stats] : r.per_level)
                csv.row({r.manifold.name(), std::to_string(level), format_sig6(stats.mean),
                         format_sig6(stats.stddev),
                         stats.x0_mean ? format_sig6(*stats.x0_mean) : "",
                         stats.x0_stddev ? format_sig6(*stats.x0_stddev) : "",
                         format_sig6(r.spread_ratio)});
    }
    if (report.hyperbolicity) {
        CsvWriter csv(dir / "hyperbolicity.csv");
        csv.row({"manifold", "level", "scene_id", "delta_norm"});
        for (const auto& r : *report.hyperbolicity) {
            const std::string level = r.level ? std::to_string(*r.level) : "all";
            for (std::size_t s = 0; s < r.per_scene_delta.size(); ++s)
                csv.row({r.manifold.name(), level, r.scene_ids[s],
                         format_sig6(r.per_scene_delta[s])});
        }
    }
    if (report.agreement) {
        CsvWriter csv(dir / "agreement.csv");
        csv.row({"system_a", "system_b", "agreement"});
        const auto& a = *report.agreement;
        for (std::size_t i = 0; i < a.systems.size(); ++i)
            for (std::size_t k = 0; k < a.systems.size(); ++k)
                csv.row({a.systems[i], a.systems[k], format_sig6(a.entries[i][k])});
    }
}

} // namespace hyperlens
