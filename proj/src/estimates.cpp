#include "ma/estimates.hpp"

#include <algorithm>
#include <cmath>

#include "ma/radial.hpp"

namespace ma {

// Grid slack coefficient for the extremal sandwich, calibrated once on the
// radial reference instance at the default acceptance grid and frozen.
static constexpr double kGridSlackCoeff = 0.20;

AlexandrovBounds alexandrov_bounds(const PLConvexFunction& u, const PLConvexFunction& phi,
                                   double improved_C, double lambda_min) {
    const auto& nodes = phi.nodes();
    if (u.nodes_ptr() != phi.nodes_ptr() && u.nodes().points != nodes.points)
        throw BoundaryMismatch("alexandrov_bounds: functions live on different node sets");
    const double scale = 1.0 + polygon_diameter(nodes.domain);
    for (int i = 0; i < nodes.size(); ++i)
        if (nodes.boundary[i] && std::abs(u.value(i) - phi.value(i)) > 1e-10 * scale)
            throw BoundaryMismatch("alexandrov_bounds: boundary values differ");

    std::vector<char> keep(nodes.size());
    for (int i = 0; i < nodes.size(); ++i) keep[i] = !nodes.boundary[i];
    SignedDiscreteMeasure mu = (ma_measure(u) - ma_measure(phi)).restricted_to(keep);
    const double tv = mu.total_variation();
    const int n = 2;
    AlexandrovBounds b;
    b.classical = std::pow(unit_ball_volume(n), -1.0 / n) * nodes.diameter() *
                  std::pow(tv, 1.0 / n);
    if (lambda_min > 0.0) {
        MassScale a = mass_scale_from_total(tv, n);
        double la = (a.a > 0 && a.a < 1) ? std::abs(std::log(a.a)) : 0.0;
        b.improved = improved_C * a.a * a.a * (la + 1.0);
    } else {
        b.improved = std::numeric_limits<double>::quiet_NaN();
    }
    return b;
}

double sandwich_slack(const MassScale& a, const SolverConfig& cfg, double diameter,
                      double total_mass) {
    double value_noise =
        diameter * std::sqrt(cfg.mass_tol * std::max(total_mass, 1.0) / unit_ball_volume(2));
    return 3.0 * (kGridSlackCoeff * a.a * a.a + value_noise);
}

ExtremalReport extremal_report(const PLConvexFunction& phi, const PLConvexFunction& u, int y,
                               const SolverConfig& cfg, const ReportOptions& opt) {
    const auto& nodes = phi.nodes();
    if (y < 0 || y >= nodes.size() || nodes.boundary[y])
        throw DegenerateInput("extremal_report: y must be an interior node");

    std::vector<char> keep(nodes.size());
    for (int i = 0; i < nodes.size(); ++i) keep[i] = !nodes.boundary[i];
    SignedDiscreteMeasure bg = ma_measure(phi).restricted_to(keep);
    SignedDiscreteMeasure mu = (ma_measure(u) - ma_measure(phi)).restricted_to(keep);

    ExtremalReport rep;
    rep.y = y;
    rep.y_pos = nodes.points[y];
    rep.a = mass_scale(mu, 2);
    rep.observed = u.value(y);

    if (opt.lower_override) {
        rep.lower = *opt.lower_override;
    } else if (rep.a.a == 0.0) {
        rep.lower = phi.value(y);
    } else {
        rep.lower = isolated_singularity(phi, y, rep.a, cfg).u.value(y);
    }
    if (opt.upper_override) {
        rep.upper = *opt.upper_override;
    } else if (rep.a.a == 0.0) {
        rep.upper = phi.value(y);
    } else {
        rep.upper =
            pointwise_upper_envelope(phi, y, rep.a, opt.slope_samples, cfg, opt.envelope).value;
    }

    AlexandrovBounds b = alexandrov_bounds(u, phi, opt.improved_C, opt.lambda_min);
    rep.classical_bound = b.classical;
    rep.improved_bound = b.improved;
    rep.slack = sandwich_slack(rep.a, cfg, nodes.diameter(), bg.total() + rep.a.budget());
    rep.sandwich_ok =
        rep.lower - rep.slack <= rep.observed && rep.observed <= rep.upper + rep.slack;
    return rep;
}

StabilityDiagnostic stability_diagnostic(const PLConvexFunction& u, const PLConvexFunction& phi,
                                         int x0, double rho,
                                         const std::array<double, 3>& hessian,
                                         const MassScale& a) {
    const auto& nodes = phi.nodes();
    if (x0 < 0 || x0 >= nodes.size()) throw DegenerateInput("stability_diagnostic: bad node");
    std::vector<char> keep(nodes.size());
    for (int i = 0; i < nodes.size(); ++i) keep[i] = !nodes.boundary[i];
    SignedDiscreteMeasure mu = (ma_measure(u) - ma_measure(phi)).restricted_to(keep);

    StabilityDiagnostic d;
    d.x0 = x0;
    d.rho = rho;
    const Vec2 c = nodes.points[x0];
    const double r2 = rho * rho * a.a * a.a;
    for (const auto& [i, w] : mu.atoms()) {
        Vec2 dx = nodes.points[i] - c;
        double q = hessian[0] * dx.x * dx.x + 2.0 * hessian[1] * dx.x * dx.y +
                   hessian[2] * dx.y * dx.y;
        if (q <= r2) d.ellipsoid_mass += w;
    }
    const double budget = a.budget();
    d.normalized_deficit = budget > 0 ? (budget - d.ellipsoid_mass) / budget : 0.0;
    double normalizer;
    if (a.n >= 3) {
        normalizer = dn0(a.n) * a.a * a.a;
    } else {
        double la = (a.a > 0 && a.a < 1) ? std::abs(std::log(a.a)) : 1.0;
        normalizer = 0.5 * a.a * a.a * la;
    }
    d.pointwise_ratio = normalizer > 0 ? (u.value(x0) - phi.value(x0)) / normalizer : 0.0;
    return d;
}

Mat2 Mat2::inverse() const {
    double dt = det();
    if (std::abs(dt) < 1e-300) throw DegenerateInput("Mat2: singular");
    return {d / dt, -b / dt, -c / dt, a / dt};
}

PLConvexFunction transform_function(const PLConvexFunction& f, const Mat2& T, int n) {
    const auto& nodes = f.nodes();
    const Mat2 Tinv = T.inverse();
    auto mapped = std::make_shared<NodeSet>();
    mapped->points.reserve(nodes.points.size());
    for (const Vec2& x : nodes.points) mapped->points.push_back(Tinv.apply(x));
    mapped->boundary = nodes.boundary;
    std::vector<Vec2> dom;
    dom.reserve(nodes.domain.size());
    for (const Vec2& x : nodes.domain) dom.push_back(Tinv.apply(x));
    if (polygon_area(dom) < 0) std::reverse(dom.begin(), dom.end());
    mapped->domain = std::move(dom);
    const double s = std::pow(std::abs(T.det()), -2.0 / n);
    std::vector<double> vals(f.values());
    for (double& v : vals) v *= s;
    return PLConvexFunction(std::move(mapped), std::move(vals));
}

}  // namespace ma
