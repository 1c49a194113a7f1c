#pragma once

#include <array>
#include <optional>

#include "ma/obstacle.hpp"

namespace ma {

struct AlexandrovBounds {
    double classical = 0.0;  // omega_n^{-1/n} diam(Omega) |mu|(Omega)^{1/n}
    double improved = 0.0;   // C a^2 (|log a| + 1); NaN for degenerate backgrounds
};

// Throws BoundaryMismatch when boundary values differ beyond 1e-10.
// improved_C is the empirically fitted family constant; lambda_min <= 0
// marks a degenerate background (improved bound bypassed).
AlexandrovBounds alexandrov_bounds(const PLConvexFunction& u, const PLConvexFunction& phi,
                                   double improved_C, double lambda_min);

struct ExtremalReport {
    int y = -1;
    Vec2 y_pos;
    MassScale a;
    double lower = 0.0;     // u_a(y, y)
    double upper = 0.0;     // sampled envelope value
    double observed = 0.0;  // u(y)
    double classical_bound = 0.0;
    double improved_bound = 0.0;
    double slack = 0.0;
    bool sandwich_ok = false;
};

struct ReportOptions {
    int slope_samples = 9;
    double improved_C = 1.0;
    double lambda_min = 1.0;
    EnvelopeOptions envelope;
    // optional precomputed extremals: when set, no solves are run (used for
    // data-level transformation checks)
    std::optional<double> lower_override;
    std::optional<double> upper_override;
};

// Two-sided extremal comparison at node y. a is derived from |M u - M phi|
// over interior nodes. lower/upper come from the solver and obstacle
// modules unless overridden.
ExtremalReport extremal_report(const PLConvexFunction& phi, const PLConvexFunction& u, int y,
                               const SolverConfig& cfg, const ReportOptions& opt = {});

// Sandwich slack at mass scale a: frozen grid coefficient times the a^2
// scale plus the value noise induced by solver mass tolerances.
double sandwich_slack(const MassScale& a, const SolverConfig& cfg, double diameter,
                      double total_mass);

struct StabilityDiagnostic {
    int x0 = -1;
    double rho = 0.0;
    double ellipsoid_mass = 0.0;     // mu(E(x0, rho a))
    double normalized_deficit = 0.0; // (omega_n a^n - ellipsoid_mass) / omega_n a^n
    double pointwise_ratio = 0.0;    // (u(x0)-phi(x0)) / (d_{n,0} a^2), log scale for n=2
};

// hessian = D^2 phi(x0) as {xx, xy, yy}; the ellipsoid membership test is
// (x-x0) . H . (x-x0) <= r^2 with r = rho a.
StabilityDiagnostic stability_diagnostic(const PLConvexFunction& u, const PLConvexFunction& phi,
                                         int x0, double rho,
                                         const std::array<double, 3>& hessian,
                                         const MassScale& a);

// 2x2 matrix for affine-invariance checks.
struct Mat2 {
    double a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]
    double det() const { return a * d - b * c; }
    Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 inverse() const;
    Mat2 transpose() const { return {a, c, b, d}; }
};

// u_T(x) = (det T)^{-2/n} u(T x) realized on the mapped node set T^{-1} x_i.
PLConvexFunction transform_function(const PLConvexFunction& f, const Mat2& T, int n);

}  // namespace ma
