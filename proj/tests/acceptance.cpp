// Acceptance suite: end-to-end checks against planted oracles, analytic
// values, and the CLI binary. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hyperlens/bundle.hpp"
#include "hyperlens/hierarchy.hpp"
#include "hyperlens/manifold.hpp"
#include "hyperlens/metrics.hpp"
#include "hyperlens/pipeline.hpp"
#include "hyperlens/rng.hpp"
#include "hyperlens/synthetic.hpp"

using namespace hyperlens;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;
fs::path g_work_dir;

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> random_direction(SubstreamRng& rng, std::size_t dim, double target_norm) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.next_gaussian();
    const double n = norm(v);
    for (auto& x : v) x *= target_norm / n;
    return v;
}

const std::map<int, double> kDecreasingProfile = {
    {3, 1.446}, {5, 1.254}, {7, 1.193}, {11, 1.146}, {13, 1.137}};

const std::vector<ManifoldSpec> kManifoldGrid = {
    ManifoldSpec::euclidean(), ManifoldSpec::lorentz(0.2), ManifoldSpec::lorentz(0.5),
    ManifoldSpec::lorentz(1.0)};

SlotBundle tight_planted_bundle() {
    SyntheticConfig config;
    config.n_scenes = 100;
    config.slot_dim = 64;
    config.patch_count = 576;
    config.seed = 2025;
    config.child_noise = 0.01;
    config.norm_profile = kDecreasingProfile;
    return generate_synthetic(config);
}

SlotBundle iid_bundle(std::size_t scenes, std::uint64_t seed) {
    SyntheticConfig config;
    config.n_scenes = scenes;
    config.slot_dim = 16;
    config.patch_count = 48;
    config.seed = seed;
    config.slot_model = SlotModel::IidGaussian;
    return generate_synthetic(config);
}

int run_cli(const std::string& args) {
    const std::string cmd = "\"" + g_cli_path + "\" " + args;
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return "<unreadable:" + file.string() + ">";
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool trees_identical(const fs::path& a, const fs::path& b, std::string& detail) {
    std::vector<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(a)) names_a.push_back(e.path().filename());
    for (const auto& e : fs::directory_iterator(b)) names_b.push_back(e.path().filename());
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    if (names_a != names_b) {
        detail = "directory listings differ";
        return false;
    }
    for (const auto& name : names_a) {
        if (slurp(a / name) != slurp(b / name)) {
            detail = "file " + name + " differs";
            return false;
        }
    }
    return true;
}

// --------------------------------------------------------------------------
// Criteria
// --------------------------------------------------------------------------

bool criterion_manifold_constraints(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    double worst_constraint = 0.0;
    double worst_radial = 0.0;
    for (std::size_t dim : {8u, 64u, 256u}) {
        for (double c : {0.2, 0.5, 1.0}) {
            SubstreamRng rng(1, dim, static_cast<std::uint64_t>(c * 10), 0);
            const auto origin = lorentz_origin(dim, c);
            for (int i = 0; i < 1000; ++i) {
                // Log-uniform norms over [1e-6, 20] exercise both the Taylor
                // branch and the deep regime.
                const double target =
                    std::exp(std::log(1e-6) + rng.next_unit() * (std::log(20.0) - std::log(1e-6)));
                const auto tangent = random_direction(rng, dim, target);
                const auto point = exp_map_origin(tangent, c);
                worst_constraint =
                    std::max(worst_constraint, std::abs(c * lorentz_inner(point, point) + 1.0));
                const double depth = lorentz_distance(origin, point);
                worst_radial = std::max(worst_radial, std::abs(depth - target) / target);
            }
        }
    }
    const double secs = elapsed_seconds(start);
    std::ostringstream out;
    out << "max |c<x,x>+1| = " << worst_constraint << ", max radial rel err = " << worst_radial
        << ", " << secs << " s";
    detail = out.str();
    return worst_constraint < 1e-6 && worst_radial < 1e-8 && secs < 5.0;
}

bool criterion_flat_limit(std::string& detail) {
    const double c = 1e-8;
    SubstreamRng rng(2, 0, 0, 0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto u = random_direction(rng, 8, rng.next_unit() * 3.0);
        const auto v = random_direction(rng, 8, rng.next_unit() * 3.0);
        std::vector<double> diff(8);
        for (std::size_t k = 0; k < 8; ++k) diff[k] = u[k] - v[k];
        const double flat = norm(diff);
        if (flat == 0.0) continue;
        const double curved = lorentz_distance(exp_map_origin(u, c), exp_map_origin(v, c));
        worst = std::max(worst, std::abs(curved - flat) / flat);
    }
    detail = "max rel deviation = " + std::to_string(worst);
    return worst < 1e-3;
}

bool criterion_metric_axioms(std::string& detail) {
    double worst_slack = -1.0;
    for (double c : {0.2, 0.5, 1.0}) {
        SubstreamRng rng(3, static_cast<std::uint64_t>(c * 10), 0, 0);
        for (int i = 0; i < 10000; ++i) {
            const auto a =
                exp_map_origin(random_direction(rng, 5, rng.next_unit() * 5 + 1e-3), c);
            const auto b =
                exp_map_origin(random_direction(rng, 5, rng.next_unit() * 5 + 1e-3), c);
            const auto m =
                exp_map_origin(random_direction(rng, 5, rng.next_unit() * 5 + 1e-3), c);
            const double dab = lorentz_distance(a, b);
            if (dab != lorentz_distance(b, a)) {
                detail = "symmetry violated";
                return false;
            }
            if (dab < 0.0) {
                detail = "negative distance";
                return false;
            }
            const double slack = dab - (lorentz_distance(a, m) + lorentz_distance(m, b));
            worst_slack = std::max(worst_slack, slack);
        }
    }
    detail = "worst triangle slack = " + std::to_string(worst_slack);
    return worst_slack <= 1e-9;
}

bool criterion_hierarchy_oracle(std::string& detail) {
    SyntheticConfig config;
    config.n_scenes = 100;
    config.slot_dim = 64;
    config.patch_count = 576;
    config.seed = 2024;
    config.norm_profile = kDecreasingProfile;
    const SlotBundle bundle = generate_synthetic(config);
    const auto hierarchies = build_hierarchies(bundle, {}, 0.95, 0);

    std::size_t checked = 0;
    for (std::size_t s = 0; s < bundle.scenes.size(); ++s) {
        for (const auto& assignment : hierarchies[s].assignments) {
            const auto& planted = bundle.scenes[s].planted->parents.at(
                {assignment.coarse_level, assignment.fine_level});
            if (assignment.parent_of != planted) {
                detail = "mismatch in scene " + bundle.scenes[s].id;
                return false;
            }
            checked += planted.size();
        }
    }
    detail = std::to_string(checked) + " fine slots matched across 4 pairs x 100 scenes";
    return checked == 100 * (5 + 7 + 11 + 13);
}

bool criterion_retrieval_oracle(std::string& detail) {
    // Tight planted bundle: every geometry must recover nearly all parents.
    const SlotBundle tight = tight_planted_bundle();
    const auto hierarchies = build_hierarchies(tight, {}, 0.95, 0);
    const auto results = retrieval_analysis(tight, hierarchies, kManifoldGrid, 0);
    double min_hit = 100.0;
    for (const auto& r : results) min_hit = std::min(min_hit, r.hit_at_1);
    if (min_hit < 99.0) {
        detail = "planted bundle min Hit@1 = " + std::to_string(min_hit);
        return false;
    }

    // Chance calibration: iid slots must land within 3 binomial standard
    // errors of 100/N1 on every pair and manifold. Batched to bound memory.
    struct Cell {
        std::size_t hits = 0;
        std::size_t evaluated = 0;
    };
    std::map<std::pair<std::pair<int, int>, std::string>, Cell> cells;
    for (std::uint64_t batch = 0; batch < 10; ++batch) {
        const SlotBundle batch_bundle = iid_bundle(1000, 3000 + batch);
        const auto batch_hierarchies = build_hierarchies(batch_bundle, {}, 0.95, 0);
        for (const auto& r :
             retrieval_analysis(batch_bundle, batch_hierarchies, kManifoldGrid, 0)) {
            auto& cell = cells[{r.level_pair, r.manifold.name()}];
            cell.hits += r.n_hits;
            cell.evaluated += r.n_evaluated;
        }
    }
    double worst_z = 0.0;
    for (const auto& [key, cell] : cells) {
        const double p = 1.0 / key.first.first;
        const double n = static_cast<double>(cell.evaluated);
        const double observed = static_cast<double>(cell.hits) / n;
        const double se = std::sqrt(p * (1.0 - p) / n);
        const double z = std::abs(observed - p) / se;
        worst_z = std::max(worst_z, z);
        if (z > 3.0) {
            detail = "pair (" + std::to_string(key.first.first) + "," +
                     std::to_string(key.first.second) + ") on " + key.second + ": |z| = " +
                     std::to_string(z);
            return false;
        }
    }
    std::ostringstream out;
    out << "planted min Hit@1 = " << min_hit << "%, iid worst |z| = " << worst_z
        << " over 40k scenes";
    detail = out.str();
    return true;
}

bool criterion_ov_calibration(std::string& detail) {
    SubstreamRng rng(6, 0, 0, 0);
    std::vector<double> base(1000);
    for (auto& x : base) x = rng.next_gaussian();

    const double self_overlap = kde_overlap(base, base);
    if (std::abs(self_overlap - 1.0) > 1e-3) {
        detail = "identical-sample OV = " + std::to_string(self_overlap);
        return false;
    }

    std::vector<double> far = base;
    const double offset = 1000.0 * sample_std(base);
    for (auto& x : far) x += offset;
    const double far_overlap = kde_overlap(base, far);
    if (far_overlap > 0.01) {
        detail = "shifted-sample OV = " + std::to_string(far_overlap);
        return false;
    }

    // Independent oracle: quadrature of min(phi(x), phi(x-2)); equals
    // 2*Phi(-1) ~ 0.317311.
    const auto phi = [](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    };
    double oracle = 0.0;
    const double lo = -10.0, hi = 12.0;
    const int steps = 400000;
    const double dx = (hi - lo) / steps;
    for (int i = 0; i <= steps; ++i) {
        const double v = std::min(phi(lo + i * dx), phi(lo + i * dx - 2.0));
        oracle += (i == 0 || i == steps) ? 0.5 * v : v;
    }
    oracle *= dx;
    if (std::abs(oracle - 0.3173105) > 1e-5) {
        detail = "oracle quadrature off: " + std::to_string(oracle);
        return false;
    }

    std::vector<double> a(5000), b(5000);
    SubstreamRng rng_a(6, 1, 0, 0), rng_b(6, 2, 0, 0);
    for (auto& x : a) x = rng_a.next_gaussian();
    for (auto& x : b) x = rng_b.next_gaussian() + 2.0;
    const double estimated = kde_overlap(a, b);
    std::ostringstream out;
    out << "self = " << self_overlap << ", far = " << far_overlap << ", N(0,1)|N(2,1) = "
        << estimated << " vs oracle " << oracle;
    detail = out.str();
    return std::abs(estimated - oracle) <= 0.03;
}

bool criterion_depth_ordering(std::string& detail) {
    SyntheticConfig config;
    config.n_scenes = 100;
    config.slot_dim = 64;
    config.patch_count = 576;
    config.seed = 2026;
    config.norm_profile = kDecreasingProfile;
    const SlotBundle bundle = generate_synthetic(config);

    std::ostringstream out;
    for (const auto& manifold : kManifoldGrid) {
        const auto result = separation_analysis(bundle, manifold, 0);
        if (!result.inverted || result.depth_order != std::vector<int>{3, 5, 7, 11, 13}) {
            std::ostringstream bad;
            bad << manifold.name() << " depth order:";
            for (int level : result.depth_order) bad << " " << level;
            detail = bad.str();
            return false;
        }
        out << manifold.name() << " inverted; ";
    }
    detail = out.str();
    return true;
}

bool criterion_gromov_exactness(std::string& detail) {
    // Path metric on collinear points.
    Matrix line(4, 4, 0.0);
    const double xs[4] = {0, 1, 2, 3};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) line.at(a, b) = std::abs(xs[a] - xs[b]);
    if (gromov_delta(line) != 0.0) {
        detail = "path metric gave nonzero delta";
        return false;
    }
    // Star tree metric.
    Matrix star(5, 5, 0.0);
    const double edges[4] = {1.0, 2.0, 0.5, 3.0};
    for (int a = 1; a < 5; ++a) {
        star.at(0, a) = star.at(a, 0) = edges[a - 1];
        for (int b = a + 1; b < 5; ++b)
            star.at(a, b) = star.at(b, a) = edges[a - 1] + edges[b - 1];
    }
    if (gromov_delta(star) != 0.0) {
        detail = "tree metric gave nonzero delta";
        return false;
    }

    const double s = std::sqrt(2.0);
    Matrix square(4, 4, 0.0);
    const double sq[4][4] = {
        {0, 1, s, 1}, {1, 0, 1, s}, {s, 1, 0, 1}, {1, s, 1, 0}};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) square.at(a, b) = sq[a][b];
    const double square_delta = gromov_delta(square);
    if (std::abs(square_delta - (2.0 - s)) > 1e-12) {
        detail = "unit square delta = " + std::to_string(square_delta);
        return false;
    }

    // Scale invariance, bit-exact under power-of-two scaling.
    for (double factor : {0.5, 4.0, 1024.0}) {
        Matrix scaled = square;
        for (auto& v : scaled.data) v *= factor;
        if (gromov_delta(scaled) != square_delta) {
            detail = "scale invariance broke at factor " + std::to_string(factor);
            return false;
        }
    }

    // Quadruple count for a 39-point scene.
    std::size_t quadruples = 0;
    for (int i = 0; i < 39; ++i)
        for (int j = i + 1; j < 39; ++j)
            for (int k = j + 1; k < 39; ++k)
                for (int l = k + 1; l < 39; ++l) ++quadruples;
    if (quadruples != 82251) {
        detail = "quadruple count = " + std::to_string(quadruples);
        return false;
    }

    // Throughput: 300 pooled 39-slot scenes under one manifold.
    const SlotBundle bundle = iid_bundle(300, 4000);
    const auto start = std::chrono::steady_clock::now();
    const auto result = hyperbolicity_analysis(bundle, ManifoldSpec::euclidean(), 0);
    const double secs = elapsed_seconds(start);
    std::ostringstream out;
    out << "square delta = 2-sqrt(2), 82251 quadruples/scene, 300 scenes in " << secs << " s";
    detail = out.str();
    return result.per_scene_delta.size() == 300 && secs < 30.0;
}

bool criterion_hyperbolicity_trend(std::string& detail) {
    const SlotBundle bundle = iid_bundle(300, 4000);
    std::vector<double> means;
    std::ostringstream out;
    for (const auto& manifold : kManifoldGrid) {
        const auto result = hyperbolicity_analysis(bundle, manifold, 0);
        means.push_back(result.summary.mean);
        out << manifold.name() << " = " << result.summary.mean << "; ";
    }
    detail = out.str();
    for (std::size_t i = 0; i + 1 < means.size(); ++i)
        if (!(means[i] > means[i + 1])) return false;
    return true;
}

bool criterion_agreement(std::string& detail) {
    const SlotBundle tight = tight_planted_bundle();
    const auto hierarchies = build_hierarchies(tight, {}, 0.95, 0);
    const auto agreement = agreement_analysis(tight, hierarchies, kManifoldGrid, 0);

    for (std::size_t i = 0; i < agreement.systems.size(); ++i) {
        if (agreement.entries[i][i] != 1.0) {
            detail = "diagonal entry " + agreement.systems[i] + " = " +
                     std::to_string(agreement.entries[i][i]);
            return false;
        }
    }
    const std::size_t gt = agreement.systems.size() - 1;
    double min_vs_gt = 1.0;
    for (std::size_t i = 0; i < gt; ++i)
        min_vs_gt = std::min(min_vs_gt, agreement.entries[i][gt]);
    detail = "min manifold-vs-GT agreement = " + std::to_string(min_vs_gt) + " over " +
             std::to_string(agreement.n_evaluated) + " slots";
    return min_vs_gt >= 0.99;
}

bool criterion_determinism(std::string& detail) {
    const fs::path gen1 = g_work_dir / "gen1";
    const fs::path gen2 = g_work_dir / "gen2";
    fs::remove_all(gen1);
    fs::remove_all(gen2);
    const std::string gen_flags = "--scenes 20 --dim 16 --patches 576 --seed 5";
    if (run_cli("--quiet gen -o \"" + gen1.string() + "\" " + gen_flags) != 0 ||
        run_cli("--quiet gen -o \"" + gen2.string() + "\" " + gen_flags) != 0) {
        detail = "gen invocation failed";
        return false;
    }
    if (!trees_identical(gen1, gen2, detail)) return false;

    const fs::path report1 = g_work_dir / "report1.json";
    const fs::path report2 = g_work_dir / "report2.json";
    const fs::path csv1 = g_work_dir / "csv1";
    const fs::path csv2 = g_work_dir / "csv2";
    fs::remove_all(csv1);
    fs::remove_all(csv2);
    if (run_cli("--quiet analyze \"" + gen1.string() + "\" --workers 1 -o \"" +
                report1.string() + "\" --csv \"" + csv1.string() + "\"") != 0 ||
        run_cli("--quiet analyze \"" + gen1.string() + "\" --workers 8 -o \"" +
                report2.string() + "\" --csv \"" + csv2.string() + "\"") != 0) {
        detail = "analyze invocation failed";
        return false;
    }
    if (slurp(report1) != slurp(report2)) {
        detail = "reports differ between worker counts";
        return false;
    }
    if (!trees_identical(csv1, csv2, detail)) return false;
    detail = "gen trees and worker-1/worker-8 reports byte-identical";
    return true;
}

bool criterion_runtime(std::string& detail) {
    const fs::path bundle_dir = g_work_dir / "e2e_bundle";
    const fs::path report = g_work_dir / "e2e_report.json";
    fs::remove_all(bundle_dir);
    const auto start = std::chrono::steady_clock::now();
    if (run_cli("--quiet gen -o \"" + bundle_dir.string() +
                "\" --scenes 100 --dim 64 --patches 576 --seed 9") != 0) {
        detail = "gen invocation failed";
        return false;
    }
    if (run_cli("--quiet analyze \"" + bundle_dir.string() + "\" -o \"" + report.string() +
                "\"") != 0) {
        detail = "analyze invocation failed";
        return false;
    }
    const double secs = elapsed_seconds(start);
    detail = "gen + 5 analyses x 4 manifolds + report in " + std::to_string(secs) + " s";
    return secs < 60.0 && fs::exists(report);
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") g_cli_path = argv[i + 1];
        if (flag == "--work-dir") g_work_dir = argv[i + 1];
    }
    if (g_cli_path.empty() || g_work_dir.empty()) {
        std::cerr << "usage: hyperlens_acceptance --cli <path> --work-dir <dir>\n";
        return 2;
    }
    fs::create_directories(g_work_dir);

    struct Criterion {
        int id;
        const char* name;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "manifold constraint + radial isometry", criterion_manifold_constraints},
        {2, "flat limit at c = 1e-8", criterion_flat_limit},
        {3, "metric axioms", criterion_metric_axioms},
        {4, "hierarchy oracle on planted masks", criterion_hierarchy_oracle},
        {5, "retrieval oracle and chance calibration", criterion_retrieval_oracle},
        {6, "KDE overlap calibration", criterion_ov_calibration},
        {7, "depth-ordering recovery", criterion_depth_ordering},
        {8, "Gromov delta exactness and throughput", criterion_gromov_exactness},
        {9, "hyperbolicity decreases with curvature", criterion_hyperbolicity_trend},
        {10, "cross-manifold agreement sanity", criterion_agreement},
        {11, "worker and seed determinism", criterion_determinism},
        {12, "end-to-end runtime", criterion_runtime},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %2d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion.id, criterion.name,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
