#include "ma/radial.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ma {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

double integrate(const std::function<double(double)>& f, double lo, double hi) {
    if (hi <= lo) return 0.0;
    double err = 0.0;
    double v = GK::integrate(f, lo, hi, 12, 1e-14, &err);
    return v;
}

// (s^n + a^n)^{1/n} - s without cancellation for s >> a
double sing_excess(int n, double a, double s) {
    if (a == 0.0) return 0.0;
    if (s <= 0.0) return a;
    if (s < a) return std::pow(std::pow(s, n) + std::pow(a, n), 1.0 / n) - s;
    // s >= a: s*((1+t)^{1/n} - 1), t = (a/s)^n in [0,1]
    double t = std::pow(a / s, n);
    return s * std::expm1(std::log1p(t) / n);
}

// s - max(s^n - a^n, 0)^{1/n}
double obs_defect(int n, double a, double s) {
    if (a == 0.0) return 0.0;
    if (s <= a) return s;
    double t = std::pow(a / s, n);  // in (0,1)
    return -s * std::expm1(std::log1p(-t) / n);
}

}  // namespace

double singularity_profile_value(int n, double a, double r) {
    // int_0^r (s^n+a^n)^{1/n} ds = r^2/2 + int_0^r excess
    double ex = integrate([&](double s) { return sing_excess(n, a, s); }, 0.0, r);
    return 0.5 * r * r + ex;
}

double obstacle_profile_value(int n, double a, double r) {
    if (r <= a) return 0.0;
    double de = integrate([&](double s) { return obs_defect(n, a, s); }, 0.0, r);
    return 0.5 * r * r - de;
}

double RadialProfile::eval(double r) const {
    if (samples.empty()) return 0.0;
    if (r <= samples.front().first) return samples.front().second;
    if (r >= samples.back().first) return samples.back().second;
    auto it = std::lower_bound(samples.begin(), samples.end(), r,
                               [](const auto& s, double x) { return s.first < x; });
    auto [r1, v1] = *it;
    auto [r0, v0] = *(it - 1);
    double t = (r - r0) / (r1 - r0);
    return v0 + t * (v1 - v0);
}

RadialProfile model_profile(int n, double a, RadialProfile::Kind kind, double r_max,
                            int grid_points) {
    if (n < 2) throw DimensionTooLow("model_profile: n must be >= 2");
    if (a < 0) throw DegenerateInput("model_profile: a must be >= 0");
    RadialProfile p;
    p.n = n;
    p.R = r_max;
    p.a = a;
    p.kind = kind;
    p.samples.reserve(grid_points);
    // cumulative quadrature segment by segment keeps the absolute error tight
    double acc = 0.0, prev_r = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        double r = r_max * double(k) / double(grid_points - 1);
        if (k > 0) {
            if (kind == RadialProfile::Kind::Singularity)
                acc += integrate([&](double s) { return sing_excess(n, a, s); }, prev_r, r);
            else
                acc += integrate([&](double s) { return obs_defect(n, a, s); }, prev_r, r);
        }
        double base = 0.5 * r * r;
        double rho = (kind == RadialProfile::Kind::Singularity) ? base + acc : base - acc;
        if (kind == RadialProfile::Kind::Obstacle && r <= a) rho = 0.0;
        p.samples.emplace_back(r, rho);
        prev_r = r;
    }
    return p;
}

double dn0(int n) {
    if (n < 3)
        throw DimensionTooLow("dn0: defined for n >= 3 (n = 2 has a log correction instead)");
    double num = std::tgamma(1.0 / n) * std::tgamma(double(n - 2) / n);
    double den = 2.0 * n * std::tgamma(double(n - 1) / n);
    return num / den;
}

double dn0_quadrature(int n, double r_max) {
    if (n < 3) throw DimensionTooLow("dn0_quadrature: n must be >= 3");
    double v = integrate([&](double s) { return sing_excess(n, 1.0, s); }, 0.0, r_max);
    double tail = std::pow(r_max, 2 - n) / (double(n) * double(n - 2));
    return v + tail;
}

double radial_dirichlet_offset(int n, double R, double a) {
    if (!(a >= 0.0 && a < R)) throw DegenerateInput("radial_dirichlet_offset: need 0 <= a < R");
    if (a == 0.0) return 0.0;
    return -integrate([&](double s) { return sing_excess(n, a, s); }, 0.0, R);
}

double radial_obstacle_offset(int n, double R, double a) {
    if (!(a >= 0.0 && a < R)) throw DegenerateInput("radial_obstacle_offset: need 0 <= a < R");
    if (a == 0.0) return 0.0;
    return integrate([&](double s) { return obs_defect(n, a, s); }, 0.0, R);
}

double radial_dirichlet_offset_closed2(double R, double a) {
    // -(int_0^R sqrt(s^2+a^2) ds - R^2/2)
    double h = std::hypot(R, a);
    double I = 0.5 * R * h + 0.5 * a * a * std::log((R + h) / a);
    return -(I - 0.5 * R * R);
}

double radial_obstacle_offset_closed2(double R, double a) {
    // R^2/2 - int_a^R sqrt(s^2-a^2) ds
    double w = std::sqrt(std::max(R * R - a * a, 0.0));
    double I = 0.5 * R * w - 0.5 * a * a * std::log((R + w) / a);
    return 0.5 * R * R - I;
}

std::string profile_csv(const RadialProfile& p) {
    std::ostringstream os;
    os << "r,rho\n";
    char buf[80];
    for (const auto& [r, v] : p.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", r, v);
        os << buf;
    }
    return os.str();
}

std::string records_csv(const std::vector<AsymptoticRecord>& recs) {
    std::ostringstream os;
    os << "n,a,offset,predicted,error\n";
    char buf[160];
    for (const auto& r : recs) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.n, r.a, r.offset,
                      r.predicted, r.error);
        os << buf;
    }
    return os.str();
}

}  // namespace ma
