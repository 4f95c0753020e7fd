#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hyperlens/numeric.hpp"

namespace hyperlens {

enum class ManifoldKind { Euclidean, Lorentz };

// Tagged choice of geometry: flat space, or the Lorentz hyperboloid of
// curvature -c for a fixed c > 0.
struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::Euclidean;
    double curvature = 0.0;  // > 0 iff kind == Lorentz

    static ManifoldSpec euclidean() { return {ManifoldKind::Euclidean, 0.0}; }
    static ManifoldSpec lorentz(double curvature);

    // Accepts "euclidean" or "lorentz:<c>" with decimal c > 0.
    static ManifoldSpec parse(const std::string& text);

    // Canonical flag-style name, e.g. "euclidean", "lorentz:0.5".
    std::string name() const;

    bool operator==(const ManifoldSpec&) const = default;
};

// Point on the upper sheet of the hyperboloid c*<x,x>_L = -1. values[0] is
// the time coordinate; the remaining d entries are the spatial part.
struct LorentzPoint {
    std::vector<double> values;
    double curvature = 1.0;

    std::size_t ambient_dim() const { return values.size(); }
    std::size_t spatial_dim() const { return values.size() - 1; }
    double time_component() const { return values[0]; }
    bool satisfies_constraint(double tol = 1e-6) const;
};

// Lorentzian inner product <x,y>_L = -x0*y0 + sum_k xk*yk. Bilinear,
// symmetric, and indefinite; both arguments are raw (1+d)-vectors.
double lorentz_inner(std::span<const double> x, std::span<const double> y);
double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y);

// The apex (1/sqrt(c), 0, ..., 0) of the upper sheet.
LorentzPoint lorentz_origin(std::size_t spatial_dim, double curvature);

// Exponential map at the origin: a Euclidean tangent vector s lands at
//   cosh(sqrt(c)|s|) * o + sinh(sqrt(c)|s|) * s / (sqrt(c)|s|).
// Radial distances are preserved: d_L(o, exp(s)) == |s|.
LorentzPoint exp_map_origin(std::span<const double> tangent, double curvature);

// Geodesic distance (1/sqrt(c)) * arccosh(-c <x,y>_L). The arccosh argument
// is clamped to >= 1: floating-point noise can push it just below 1 for
// near-identical points, where the true distance is within noise of zero.
double lorentz_distance(std::span<const double> x, std::span<const double> y, double curvature);
double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y);

// Normalized center of mass m / (sqrt(c) * sqrt(-<m,m>_L)) where m is the
// arithmetic mean. Inputs are summed in a canonical (lexicographically
// sorted) order, so the result is bit-identical under input permutation.
LorentzPoint lorentz_centroid(std::span<const LorentzPoint> points, double curvature);

// Component-wise arithmetic mean of the rows, same canonical-order policy.
std::vector<double> euclidean_centroid(const Matrix& rows);

// 1 - cos(u, v). Inputs are l2-normalized internally; range [0, 2].
double cosine_distance(std::span<const double> u, std::span<const double> v);

// Depth of a Euclidean embedding: |s| under the Euclidean manifold, and
// d_L(o, exp(s)) under a Lorentz manifold. The two coincide (radial
// isometry), but the Lorentz path is kept distinct because centroid-based
// depths built on it are not radially trivial.
double distance_to_origin(std::span<const double> embedding, const ManifoldSpec& manifold);

} // namespace hyperlens
