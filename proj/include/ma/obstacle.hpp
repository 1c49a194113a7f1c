#pragma once

#include "ma/solver.hpp"

namespace ma {

// Supporting hyperplane of phi with slope p, shifted by h:
// obstacle(x) = p.x + offset + h, touching phi at node x_p when h = 0.
struct ObstacleSpec {
    Vec2 p;
    int x_p = -1;
    double offset = 0.0;  // l_p(x) = p.x + offset
    double h = 0.0;

    double support_at(Vec2 x) const { return p.dot(x) + offset; }
    double obstacle_at(Vec2 x) const { return p.dot(x) + offset + h; }
};

// Support plane of phi with slope p: x_p is the node attaining
// max_i (p.x_i - phi_i), so l_p <= phi at every node with contact at x_p.
ObstacleSpec make_support_plane(const PLConvexFunction& phi, Vec2 p, double h = 0.0);

// Largest admissible height: min over boundary nodes of (phi - l_p).
double max_obstacle_height(const PLConvexFunction& phi, const ObstacleSpec& spec);

struct CoincidenceSet {
    std::vector<int> nodes;  // nodes with v = l_p + h within contact_tol
    double mass = 0.0;       // sum of background atoms on those nodes
    double h = 0.0;
};

struct ObstacleResult {
    PLConvexFunction v;
    CoincidenceSet coincidence;
    double residual = 0.0;
    long iters = 0;
    double discrepancy = 0.0;  // |M v - M phi| over interior nodes
};

// Least supersolution above the obstacle: v = phi on the boundary,
// v >= l_p + h, nodal mass = background off the coincidence set and
// <= background on it. contact_tol is absolute on v - (l_p + h).
ObstacleResult solve_obstacle_at_height(const PLConvexFunction& phi, const ObstacleSpec& spec,
                                        const SolverConfig& cfg, double contact_tol = 1e-9);

struct CalibratedObstacle {
    ObstacleSpec spec;
    ObstacleResult solution;
    bool budget_exceeded = false;  // maximal-height fallback was taken
    int evaluations = 0;           // obstacle solves spent
};

// Monotone bisection on h for |discrepancy(h) - omega_n a^n| <= calib_tol * budget.
// An optional bracket hint (h_lo, h_hi) accelerates repeated nearby calibrations.
CalibratedObstacle calibrate_height(const PLConvexFunction& phi, Vec2 p, const MassScale& a,
                                    const SolverConfig& cfg, double calib_tol = 5e-3,
                                    double contact_tol = 1e-9, double hint_lo = 0.0,
                                    double hint_hi = -1.0);

struct InclusionReport {
    double t_min = 0.0;  // smallest t with K inside the section S_t of phi - l_p
    double c2 = 0.0;     // configured constant
    bool within = false;  // t_min <= c2 * a^2
};

InclusionReport coincidence_geometry(const CoincidenceSet& K, const PLConvexFunction& phi,
                                     const ObstacleSpec& spec, const MassScale& a, double c2);

struct EnvelopeResult {
    double value = 0.0;  // max over sampled slopes of v_a(y, p)
    ObstacleSpec best;
    bool y_in_coincidence = false;
    int solves = 0;
    int samples = 0;
};

struct EnvelopeOptions {
    int threads = 1;
    double calib_tol = 5e-3;
    double contact_tol = 1e-9;
    int refinements = 2;      // local refinement rounds around the incumbent
    int refine_grid = 5;      // refinement grid per axis
    // Deterministic sample seeds in slope space; when empty, an axis-aligned
    // grid over the gradient image is used. Supplying them makes the scan
    // covariant under affine maps of the instance.
    std::vector<Vec2> sample_seeds;
};

// max over sampled p in the gradient image of v_a(y, p); coarse grid
// (slope_samples per axis) then local refinements around the incumbent.
EnvelopeResult pointwise_upper_envelope(const PLConvexFunction& phi, int y_node,
                                        const MassScale& a, int slope_samples,
                                        const SolverConfig& cfg,
                                        const EnvelopeOptions& opt = {});

}  // namespace ma
