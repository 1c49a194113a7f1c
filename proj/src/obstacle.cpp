#include "ma/obstacle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace ma {

ObstacleSpec make_support_plane(const PLConvexFunction& phi, Vec2 p, double h) {
    const auto& xs = phi.nodes().points;
    const auto& vals = phi.values();
    int best = 0;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double s = p.dot(xs[i]) - vals[i];
        if (s > m) {
            m = s;
            best = (int)i;
        }
    }
    ObstacleSpec spec;
    spec.p = p;
    spec.x_p = best;
    spec.offset = -m;  // l_p(x) = p.x - phi*(p); l_p(x_p) = phi(x_p)
    spec.h = h;
    return spec;
}

double max_obstacle_height(const PLConvexFunction& phi, const ObstacleSpec& spec) {
    const auto& nodes = phi.nodes();
    double hmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nodes.size(); ++i)
        if (nodes.boundary[i])
            hmax = std::min(hmax, phi.value(i) - spec.support_at(nodes.points[i]));
    return std::max(hmax, 0.0);
}

namespace {

void check_spec(const PLConvexFunction& phi, const ObstacleSpec& spec) {
    const auto& nodes = phi.nodes();
    const double scale = 1.0 + polygon_diameter(nodes.domain);
    for (int i = 0; i < nodes.size(); ++i)
        if (spec.support_at(nodes.points[i]) > phi.value(i) + 1e-9 * scale)
            throw InvalidObstacle("ObstacleSpec: l_p exceeds phi (not a support plane)");
    if (spec.h < -1e-15) throw InvalidObstacle("ObstacleSpec: negative height");
    double hmax = max_obstacle_height(phi, spec);
    if (spec.h > hmax + 1e-9 * scale)
        throw InvalidObstacle("ObstacleSpec: height above the boundary gap");
    if (spec.x_p < 0 || spec.x_p >= nodes.size())
        throw InvalidObstacle("ObstacleSpec: anchor node out of range");
}

}  // namespace

ObstacleResult solve_obstacle_at_height(const PLConvexFunction& phi, const ObstacleSpec& spec,
                                        const SolverConfig& cfg, double contact_tol) {
    check_spec(phi, spec);
    const auto& nodes = phi.nodes();
    const int n = nodes.size();

    std::vector<char> keep(n);
    for (int i = 0; i < n; ++i) keep[i] = !nodes.boundary[i];
    SignedDiscreteMeasure background = ma_measure(phi).restricted_to(keep);

    DirichletProblem p;
    p.nodes = phi.nodes_ptr();
    p.boundary_values = phi.values();
    p.target = background;

    std::vector<double> floor_vals(n);
    for (int i = 0; i < n; ++i)
        floor_vals[i] = nodes.boundary[i] ? -std::numeric_limits<double>::infinity()
                                          : spec.obstacle_at(nodes.points[i]);

    std::vector<char> pinned;
    SolveResult sol = solve_dirichlet_floored(p, cfg, floor_vals, pinned);

    ObstacleResult out;
    out.residual = sol.residual;
    out.iters = sol.iters;
    out.coincidence.h = spec.h;
    for (int i = 0; i < n; ++i) {
        if (nodes.boundary[i]) continue;
        if (sol.u.value(i) - spec.obstacle_at(nodes.points[i]) <= contact_tol) {
            out.coincidence.nodes.push_back(i);
            out.coincidence.mass += background.at(i);
        }
    }
    const auto& cx = sol.u.cells();
    double disc = 0.0;
    for (int i = 0; i < n; ++i) {
        if (nodes.boundary[i]) continue;
        double m = cx.active(i) ? cx.cell_area(i) : 0.0;
        disc += std::abs(m - background.at(i));
    }
    out.discrepancy = disc;
    out.v = std::move(sol.u);
    return out;
}

CalibratedObstacle calibrate_height(const PLConvexFunction& phi, Vec2 p, const MassScale& a,
                                    const SolverConfig& cfg, double calib_tol,
                                    double contact_tol, double hint_lo, double hint_hi) {
    CalibratedObstacle out;
    ObstacleSpec spec = make_support_plane(phi, p);
    const double budget = a.budget();
    const double hmax = max_obstacle_height(phi, spec);

    auto eval = [&](double h) {
        spec.h = h;
        ++out.evaluations;
        return solve_obstacle_at_height(phi, spec, cfg, contact_tol);
    };

    if (budget <= 0.0 || hmax <= 0.0) {
        out.solution = eval(0.0);
        out.spec = spec;
        out.budget_exceeded = budget > 0.0;
        return out;
    }

    // budget beyond the maximal height: take the endpoint (spec fallback)
    ObstacleResult at_max = eval(hmax);
    if (at_max.discrepancy <= budget * (1.0 - calib_tol)) {
        out.solution = std::move(at_max);
        out.spec = spec;
        out.budget_exceeded = true;
        return out;
    }
    if (std::abs(at_max.discrepancy - budget) <= calib_tol * budget) {
        out.solution = std::move(at_max);
        out.spec = spec;
        return out;
    }

    double lo = std::clamp(hint_lo, 0.0, hmax), hi = (hint_hi > 0 ? std::min(hint_hi, hmax) : hmax);
    double disc_lo = 0.0, disc_hi;
    if (lo > 0.0) {
        ObstacleResult r = eval(lo);
        disc_lo = r.discrepancy;
        if (disc_lo > budget) {  // hint bracket missed below
            lo = 0.0;
            disc_lo = 0.0;
        }
    }
    {
        ObstacleResult r = eval(hi);
        disc_hi = r.discrepancy;
        if (disc_hi < budget && hi < hmax) {  // hint bracket missed above
            hi = hmax;
            disc_hi = at_max.discrepancy;
        }
        if (std::abs(disc_hi - budget) <= calib_tol * budget) {
            out.solution = std::move(r);
            out.spec = spec;
            out.spec.h = hi;
            return out;
        }
    }

    // regula falsi with bisection safeguard on the monotone budget curve
    ObstacleResult best;
    double best_h = hi;
    double best_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 80; ++it) {
        double mid;
        if (disc_hi > disc_lo + 1e-300) {
            mid = lo + (budget - disc_lo) / (disc_hi - disc_lo) * (hi - lo);
            double margin = 0.05 * (hi - lo);
            mid = std::clamp(mid, lo + margin, hi - margin);
        } else {
            mid = 0.5 * (lo + hi);
        }
        ObstacleResult r = eval(mid);
        const double disc = r.discrepancy;
        double err = std::abs(disc - budget);
        if (err < best_err) {
            best_err = err;
            best = std::move(r);
            best_h = mid;
        }
        if (err <= calib_tol * budget) break;
        if (disc < budget) {
            lo = mid;
            disc_lo = disc;
        } else {
            hi = mid;
            disc_hi = disc;
        }
        if (hi - lo < 1e-15 * (1.0 + hmax)) break;
    }
    out.spec = spec;
    out.spec.h = best_h;
    out.solution = std::move(best);
    return out;
}

InclusionReport coincidence_geometry(const CoincidenceSet& K, const PLConvexFunction& phi,
                                     const ObstacleSpec& spec, const MassScale& a, double c2) {
    InclusionReport rep;
    rep.c2 = c2;
    double t = 0.0;
    for (int i : K.nodes)
        t = std::max(t, phi.value(i) - spec.support_at(phi.nodes().points[i]));
    rep.t_min = t;
    rep.within = t <= c2 * a.a * a.a;
    return rep;
}

namespace {

struct SampleResult {
    double value = -std::numeric_limits<double>::infinity();
    ObstacleSpec spec;
    bool in_K = false;
    int solves = 0;
    double h_found = 0.0;
};

SampleResult eval_slope(const PLConvexFunction& phi, Vec2 p, int y, const MassScale& a,
                        const SolverConfig& cfg, const EnvelopeOptions& opt, double hint_lo,
                        double hint_hi) {
    SampleResult r;
    ObstacleSpec probe = make_support_plane(phi, p);
    if (max_obstacle_height(phi, probe) < 1e-14) {
        // no admissible lift: the obstacle solution is phi itself
        r.value = phi.value(y);
        r.spec = probe;
        r.in_K = (probe.x_p == y);
        r.h_found = 0.0;
        return r;
    }
    CalibratedObstacle cal =
        calibrate_height(phi, p, a, cfg, opt.calib_tol, opt.contact_tol, hint_lo, hint_hi);
    r.value = cal.solution.v.value(y);
    r.spec = cal.spec;
    r.solves = cal.evaluations;
    r.h_found = cal.spec.h;
    const auto& K = cal.solution.coincidence.nodes;
    r.in_K = std::binary_search(K.begin(), K.end(), y);
    return r;
}

}  // namespace

EnvelopeResult pointwise_upper_envelope(const PLConvexFunction& phi, int y_node,
                                        const MassScale& a, int slope_samples,
                                        const SolverConfig& cfg, const EnvelopeOptions& opt) {
    const auto& nodes = phi.nodes();
    if (y_node < 0 || y_node >= nodes.size() || nodes.boundary[y_node])
        throw DegenerateInput("pointwise_upper_envelope: y must be an interior node");

    auto grad_hull = phi.gradient_image();
    if (grad_hull.size() < 3)
        throw DegenerateInput("pointwise_upper_envelope: degenerate gradient image");

    // coarse samples: provided seeds, or an axis grid over the gradient image
    std::vector<Vec2> samples;
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& g : grad_hull) {
        lo.x = std::min(lo.x, g.x);
        lo.y = std::min(lo.y, g.y);
        hi.x = std::max(hi.x, g.x);
        hi.y = std::max(hi.y, g.y);
    }
    Vec2 span = hi - lo;
    double spacing = std::max(span.x, span.y) / std::max(1, slope_samples - 1);
    if (!opt.sample_seeds.empty()) {
        samples = opt.sample_seeds;
        double seed_spacing = 0.0;
        for (std::size_t k = 1; k < samples.size(); ++k)
            seed_spacing = std::max(seed_spacing, (samples[k] - samples[k - 1]).norm());
        if (seed_spacing > 0) spacing = seed_spacing;
    } else {
        for (int iy = 0; iy < slope_samples; ++iy)
            for (int ix = 0; ix < slope_samples; ++ix) {
                Vec2 p{lo.x + span.x * ix / std::max(1, slope_samples - 1),
                       lo.y + span.y * iy / std::max(1, slope_samples - 1)};
                if (point_in_convex(grad_hull, p, 1e-12 * (1.0 + span.norm())))
                    samples.push_back(p);
            }
        // seed with the subdifferential of phi at y (centroid of its cell)
        auto sd = phi.subdifferential(y_node);
        if (!sd.gradient_polygon.empty()) {
            Vec2 c{0, 0};
            for (const Vec2& v : sd.gradient_polygon) c = c + v;
            samples.push_back(c * (1.0 / double(sd.gradient_polygon.size())));
        } else {
            samples.push_back(ConvexPolygon::from_ccw(grad_hull).centroid());
        }
    }

    EnvelopeResult out;
    std::atomic<int> total_solves{0};

    auto run_batch = [&](const std::vector<Vec2>& batch, double hint_lo,
                         double hint_hi) -> std::vector<SampleResult> {
        std::vector<SampleResult> results(batch.size());
        int nthreads = std::max(1, opt.threads);
        if (nthreads == 1 || batch.size() < 4) {
            for (std::size_t k = 0; k < batch.size(); ++k) {
                results[k] = eval_slope(phi, batch[k], y_node, a, cfg, opt, hint_lo, hint_hi);
                total_solves += results[k].solves;
            }
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (int t = 0; t < nthreads; ++t)
                pool.emplace_back([&]() {
                    for (std::size_t k = next++; k < batch.size(); k = next++) {
                        results[k] =
                            eval_slope(phi, batch[k], y_node, a, cfg, opt, hint_lo, hint_hi);
                        total_solves += results[k].solves;
                    }
                });
            for (auto& th : pool) th.join();
        }
        return results;
    };

    SampleResult incumbent;
    double h_hint_lo = 0.0, h_hint_hi = -1.0;
    std::vector<Vec2> batch = samples;
    out.samples = (int)batch.size();
    for (int round = 0; round <= opt.refinements; ++round) {
        auto results = run_batch(batch, h_hint_lo, h_hint_hi);
        for (const auto& r : results)
            if (r.value > incumbent.value) incumbent = r;
        if (round == opt.refinements) break;
        // refine around the incumbent slope: smaller grid, half the window
        spacing *= 0.5;
        double window = spacing * (opt.refine_grid - 1) * 0.5;
        batch.clear();
        for (int iy = 0; iy < opt.refine_grid; ++iy)
            for (int ix = 0; ix < opt.refine_grid; ++ix) {
                Vec2 p{incumbent.spec.p.x - window + 2.0 * window * ix / (opt.refine_grid - 1),
                       incumbent.spec.p.y - window + 2.0 * window * iy / (opt.refine_grid - 1)};
                if (point_in_convex(grad_hull, p, 1e-12 * (1.0 + span.norm())))
                    batch.push_back(p);
            }
        out.samples += (int)batch.size();
        // height hints: calibrated heights vary smoothly along the scan
        h_hint_lo = 0.5 * incumbent.h_found;
        h_hint_hi = 2.0 * incumbent.h_found + 1e-12;
    }
    out.value = incumbent.value;
    out.best = incumbent.spec;
    out.y_in_coincidence = incumbent.in_K;
    out.solves = total_solves.load();
    return out;
}

}  // namespace ma
