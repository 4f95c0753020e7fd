#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hyperlens/bundle.hpp"
#include "hyperlens/errors.hpp"
#include "hyperlens/manifold.hpp"
#include "hyperlens/metrics.hpp"
#include "hyperlens/pipeline.hpp"
#include "hyperlens/report.hpp"
#include "hyperlens/synthetic.hpp"
#include "hyperlens/version.hpp"

namespace py = pybind11;
using namespace hyperlens;

namespace {

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 1) throw InvalidInputError("expected a 1-d array");
    return std::vector<double>(arr.data(), arr.data() + arr.shape(0));
}

Matrix as_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw InvalidInputError("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), m.data.begin());
    return m;
}

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> arr(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), arr.mutable_data());
    return arr;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lorentz-model geometry and hierarchy metrics for slot bundles";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "HyperlensError", PyExc_RuntimeError);

    m.def(
        "lorentz_inner",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& y) {
            return lorentz_inner(as_vector(x), as_vector(y));
        },
        py::arg("x"), py::arg("y"),
        "Lorentzian inner product -x0*y0 + sum_k xk*yk of two (1+d)-vectors.");

    m.def(
        "exp_map_origin",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& tangent,
           double curvature) {
            return to_array(exp_map_origin(as_vector(tangent), curvature).values);
        },
        py::arg("tangent"), py::arg("curvature"),
        "Project a Euclidean vector onto the Lorentz hyperboloid of the given curvature.");

    m.def(
        "lorentz_distance",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& y,
           double curvature) {
            return lorentz_distance(std::span<const double>(as_vector(x)),
                                    std::span<const double>(as_vector(y)), curvature);
        },
        py::arg("x"), py::arg("y"), py::arg("curvature"),
        "Geodesic distance between two hyperboloid points given as raw (1+d)-vectors.");

    m.def(
        "lorentz_centroid",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
           double curvature) {
            const Matrix rows = as_matrix(points);
            std::vector<LorentzPoint> pts(rows.rows);
            for (std::size_t i = 0; i < rows.rows; ++i) {
                pts[i].curvature = curvature;
                pts[i].values.assign(rows.row(i).begin(), rows.row(i).end());
            }
            return to_array(lorentz_centroid(pts, curvature).values);
        },
        py::arg("points"), py::arg("curvature"),
        "Normalized Lorentzian center of mass of hyperboloid points (rows).");

    m.def(
        "cosine_distance",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& u,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
            return cosine_distance(as_vector(u), as_vector(v));
        },
        py::arg("u"), py::arg("v"));

    m.def(
        "distance_to_origin",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& embedding,
           const std::string& manifold) {
            return distance_to_origin(as_vector(embedding), ManifoldSpec::parse(manifold));
        },
        py::arg("embedding"), py::arg("manifold"),
        "Depth of a Euclidean embedding under 'euclidean' or 'lorentz:<c>'.");

    m.def(
        "kde_overlap",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            return kde_overlap(as_vector(a), as_vector(b));
        },
        py::arg("samples_a"), py::arg("samples_b"),
        "Integral of the pointwise minimum of two Gaussian KDEs.");

    m.def(
        "gromov_delta",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& distances) {
            return gromov_delta(as_matrix(distances));
        },
        py::arg("distances"),
        "Normalized worst-case four-point delta of a symmetric distance matrix.");

    m.def(
        "generate_bundle",
        [](const std::string& path, std::size_t scenes, std::size_t dim, std::size_t patches,
           std::uint64_t seed, double separation, double child_noise,
           const std::map<int, double>& norm_profile, const std::string& slot_model,
           const std::vector<int>& levels) {
            SyntheticConfig config;
            config.n_scenes = scenes;
            config.slot_dim = dim;
            config.patch_count = patches;
            config.seed = seed;
            config.parent_separation = separation;
            config.child_noise = child_noise;
            config.norm_profile = norm_profile;
            config.levels = levels;
            if (slot_model == "planted")
                config.slot_model = SlotModel::Planted;
            else if (slot_model == "iid")
                config.slot_model = SlotModel::IidGaussian;
            else
                throw ConfigError("unknown slot model '" + slot_model + "'");
            save_bundle(generate_synthetic(config), path);
        },
        py::arg("path"), py::arg("scenes") = 100, py::arg("dim") = 64, py::arg("patches") = 576,
        py::arg("seed") = 0, py::arg("separation") = 1.0, py::arg("child_noise") = 0.05,
        py::arg("norm_profile") = std::map<int, double>{}, py::arg("slot_model") = "planted",
        py::arg("levels") = std::vector<int>{3, 5, 7, 11, 13},
        "Generate a synthetic slot bundle and save it under `path`.");

    m.def(
        "analyze_bundle",
        [](const std::string& path, const std::vector<std::string>& manifolds,
           const std::vector<std::string>& analyses, int workers) {
            RunOptions options;
            for (const auto& name : manifolds)
                options.manifolds.push_back(ManifoldSpec::parse(name));
            if (!analyses.empty()) {
                options.analyses = {false, false, false, false, false};
                for (const auto& name : analyses) {
                    if (name == "retrieve")
                        options.analyses.retrieval = true;
                    else if (name == "separate")
                        options.analyses.separation = true;
                    else if (name == "norms")
                        options.analyses.norms = true;
                    else if (name == "hyperbolicity")
                        options.analyses.hyperbolicity = true;
                    else if (name == "agreement")
                        options.analyses.agreement = true;
                    else
                        throw ConfigError("unknown analysis '" + name + "'");
                }
            }
            options.workers = workers;
            const SlotBundle bundle = load_bundle(path);
            return report_to_json(run_analyses(bundle, options, path));
        },
        py::arg("path"),
        py::arg("manifolds") =
            std::vector<std::string>{"euclidean", "lorentz:0.2", "lorentz:0.5", "lorentz:1.0"},
        py::arg("analyses") = std::vector<std::string>{}, py::arg("workers") = 0,
        "Run analyses over a saved bundle and return the report as a JSON string.");

    m.def(
        "validate_bundle",
        [](const std::string& path) {
            std::vector<std::string> messages;
            for (const auto& issue : validate_bundle_dir(path)) {
                std::string line;
                if (!issue.scene_id.empty()) {
                    line += "scene " + issue.scene_id;
                    if (issue.level != 0) line += " level " + std::to_string(issue.level);
                    line += ": ";
                }
                messages.push_back(line + issue.message);
            }
            return messages;
        },
        py::arg("path"), "Integrity-check a bundle directory; returns violation messages.");
}
