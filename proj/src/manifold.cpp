#include "hyperlens/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <numeric>

#include "hyperlens/errors.hpp"

namespace hyperlens {

namespace {

void require_positive_curvature(double c) {
    if (!std::isfinite(c) || c <= 0.0)
        throw InvalidInputError("curvature must be a positive finite real, got " +
                                std::to_string(c));
}

void require_finite(std::span<const double> v, const char* what) {
    if (!all_finite(v)) throw InvalidInputError(std::string(what) + " contains non-finite values");
}

} // namespace

ManifoldSpec ManifoldSpec::lorentz(double curvature) {
    require_positive_curvature(curvature);
    return {ManifoldKind::Lorentz, curvature};
}

ManifoldSpec ManifoldSpec::parse(const std::string& text) {
    if (text == "euclidean") return euclidean();
    const std::string prefix = "lorentz:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string num = text.substr(prefix.size());
        double c = 0.0;
        const auto* first = num.data();
        const auto* last = num.data() + num.size();
        auto [ptr, ec] = std::from_chars(first, last, c);
        if (ec != std::errc() || ptr != last)
            throw InvalidInputError("cannot parse curvature in manifold spec '" + text + "'");
        return lorentz(c);
    }
    throw InvalidInputError("unknown manifold '" + text +
                            "' (expected 'euclidean' or 'lorentz:<c>')");
}

std::string ManifoldSpec::name() const {
    if (kind == ManifoldKind::Euclidean) return "euclidean";
    // Trim trailing zeros so lorentz:0.5 round-trips through parse().
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", curvature);
    return std::string("lorentz:") + buf;
}

bool LorentzPoint::satisfies_constraint(double tol) const {
    if (values.size() < 2 || !all_finite(values)) return false;
    if (values[0] < 1.0 / std::sqrt(curvature)) return false;
    return std::abs(curvature * lorentz_inner(values, values) + 1.0) < tol;
}

double lorentz_inner(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw InvalidInputError("lorentz_inner: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 2)
        throw InvalidInputError("lorentz_inner: need at least 2 components");
    const double spatial =
        detail::pairwise_reduce(1, x.size(), [&](std::size_t i) { return x[i] * y[i]; });
    return -x[0] * y[0] + spatial;
}

double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y) {
    return lorentz_inner(std::span<const double>(x.values), std::span<const double>(y.values));
}

LorentzPoint lorentz_origin(std::size_t spatial_dim, double curvature) {
    require_positive_curvature(curvature);
    LorentzPoint p;
    p.curvature = curvature;
    p.values.assign(spatial_dim + 1, 0.0);
    p.values[0] = 1.0 / std::sqrt(curvature);
    return p;
}

LorentzPoint exp_map_origin(std::span<const double> tangent, double curvature) {
    require_positive_curvature(curvature);
    if (tangent.empty()) throw InvalidInputError("exp_map_origin: empty tangent vector");
    require_finite(tangent, "tangent vector");

    const double sqrt_c = std::sqrt(curvature);
    const double r = sqrt_c * norm(tangent);

    LorentzPoint p;
    p.curvature = curvature;
    p.values.resize(tangent.size() + 1);
    p.values[0] = std::cosh(r) / sqrt_c;
    // Spatial part is sinh(r)/r * s. Near r = 0 the ratio has a removable
    // singularity; the two-term Taylor value keeps it exact to ~1e-28.
    const double scale = r < 1e-7 ? 1.0 + r * r / 6.0 : std::sinh(r) / r;
    for (std::size_t k = 0; k < tangent.size(); ++k) p.values[k + 1] = scale * tangent[k];
    return p;
}

double lorentz_distance(std::span<const double> x, std::span<const double> y, double curvature) {
    require_positive_curvature(curvature);
    double a = -curvature * lorentz_inner(x, y);
    if (a < 1.0) a = 1.0;
    return std::acosh(a) / std::sqrt(curvature);
}

double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y) {
    if (x.curvature != y.curvature)
        throw InvalidInputError("lorentz_distance: curvature mismatch (" +
                                std::to_string(x.curvature) + " vs " +
                                std::to_string(y.curvature) + ")");
    return lorentz_distance(std::span<const double>(x.values),
                            std::span<const double>(y.values), x.curvature);
}

namespace {

// Canonical summation order: indices sorted by lexicographic comparison of
// the vectors they refer to. Equal vectors compare equal, and their partial
// sums commute bit-exactly, so any permutation of the inputs yields the
// same mean bits.
template <class RowAt>
std::vector<std::size_t> canonical_order(std::size_t n, const RowAt& row_at) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = row_at(a);
        const auto rb = row_at(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    return order;
}

} // namespace

LorentzPoint lorentz_centroid(std::span<const LorentzPoint> points, double curvature) {
    require_positive_curvature(curvature);
    if (points.empty()) throw InvalidInputError("lorentz_centroid: empty input");
    const std::size_t dim = points[0].values.size();
    for (const auto& p : points) {
        if (p.curvature != curvature)
            throw InvalidInputError("lorentz_centroid: point curvature " +
                                    std::to_string(p.curvature) + " does not match " +
                                    std::to_string(curvature));
        if (p.values.size() != dim)
            throw InvalidInputError("lorentz_centroid: mixed point dimensions");
    }

    const auto order = canonical_order(
        points.size(), [&](std::size_t i) { return std::span<const double>(points[i].values); });

    std::vector<double> m(dim, 0.0);
    const double inv_n = 1.0 / static_cast<double>(points.size());
    for (std::size_t k = 0; k < dim; ++k) {
        m[k] = detail::pairwise_reduce(0, points.size(), [&](std::size_t i) {
                   return points[order[i]].values[k];
               }) *
               inv_n;
    }

    const double q = lorentz_inner(m, m);
    if (q >= 0.0)
        throw DegenerateInputError("lorentz_centroid: mean is not timelike (<m,m>_L = " +
                                   std::to_string(q) + ")");
    const double denom = std::sqrt(curvature) * std::sqrt(-q);

    LorentzPoint centroid;
    centroid.curvature = curvature;
    centroid.values.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) centroid.values[k] = m[k] / denom;
    return centroid;
}

std::vector<double> euclidean_centroid(const Matrix& rows) {
    if (rows.rows == 0) throw InvalidInputError("euclidean_centroid: empty input");
    const auto order = canonical_order(rows.rows, [&](std::size_t i) { return rows.row(i); });
    std::vector<double> m(rows.cols, 0.0);
    const double inv_n = 1.0 / static_cast<double>(rows.rows);
    for (std::size_t k = 0; k < rows.cols; ++k) {
        m[k] = detail::pairwise_reduce(0, rows.rows, [&](std::size_t i) {
                   return rows.at(order[i], k);
               }) *
               inv_n;
    }
    return m;
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu == 0.0 || nv == 0.0)
        throw DegenerateInputError("cosine_distance: zero-norm input");
    return 1.0 - dot(u, v) / (nu * nv);
}

double distance_to_origin(std::span<const double> embedding, const ManifoldSpec& manifold) {
    require_finite(embedding, "embedding");
    if (manifold.kind == ManifoldKind::Euclidean) return norm(embedding);
    const LorentzPoint x = exp_map_origin(embedding, manifold.curvature);
    const LorentzPoint o = lorentz_origin(embedding.size(), manifold.curvature);
    return lorentz_distance(x, o);
}

} // namespace hyperlens
