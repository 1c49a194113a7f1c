#pragma once

#include <string>
#include <vector>

#include "ma/common.hpp"

namespace ma {

// One-dimensional profile rho(r) of a radial convex function on a ball.
struct RadialProfile {
    enum class Kind { Singularity, Obstacle };
    int n = 2;
    double R = 1.0;
    double a = 0.0;
    Kind kind = Kind::Singularity;
    std::vector<std::pair<double, double>> samples;  // (r, rho(r))

    double eval(double r) const;  // linear interpolation between samples
};

struct AsymptoticRecord {
    int n = 2;
    double a = 0.0;
    double offset = 0.0;     // u_a(0)-phi(0) or v_a(0)-phi(0)
    double predicted = 0.0;  // model value
    double error = 0.0;      // offset - predicted
};

// rho(r) = int_0^r (s^n + a^n)^{1/n} ds          (singularity)
// rho(r) = int_0^r max(s^n - a^n, 0)^{1/n} ds    (obstacle)
RadialProfile model_profile(int n, double a, RadialProfile::Kind kind, double r_max,
                            int grid_points);

// Sharp second-order constant of the radial expansion,
// d_{n,0} = Gamma(1/n) Gamma((n-2)/n) / (2 n Gamma((n-1)/n)), n >= 3.
// Throws DimensionTooLow for n = 2 (log-corrected regime).
double dn0(int n);
// Quadrature oracle: int_0^rmax ((r^n+1)^{1/n} - r) dr + analytic tail.
double dn0_quadrature(int n, double r_max = 200.0);

// u_a(0) - phi(0) = -int_0^R ((s^n + a^n)^{1/n} - s) ds for phi = |x|^2/2 on B_R.
double radial_dirichlet_offset(int n, double R, double a);
// v_a(0) - phi(0) = int_0^R (s - max(s^n - a^n, 0)^{1/n}) ds.
double radial_obstacle_offset(int n, double R, double a);

// Closed antiderivative forms for n = 2 (cross-checked against quadrature):
//   dirichlet: -( sqrt(R^2+a^2)/... ), see implementation
double radial_dirichlet_offset_closed2(double R, double a);
double radial_obstacle_offset_closed2(double R, double a);

// W_1(1) = (sqrt(2) + log(1+sqrt(2)))/2 and friends for tests
double singularity_profile_value(int n, double a, double r);
double obstacle_profile_value(int n, double a, double r);

// CSV helpers: profiles as "r,rho", records as "n,a,offset,predicted,error".
std::string profile_csv(const RadialProfile& p);
std::string records_csv(const std::vector<AsymptoticRecord>& recs);

}  // namespace ma
