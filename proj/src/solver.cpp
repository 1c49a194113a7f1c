#include "ma/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <queue>

namespace ma {

namespace {

constexpr double kRelTolFactor = 0.25;  // per-node share of the global budget

struct QueueEntry {
    double deficit;
    int node;
    long stamp;
    bool operator<(const QueueEntry& o) const {
        if (deficit != o.deficit) return deficit < o.deficit;
        return node > o.node;  // deterministic tie-break
    }
};

struct NodeSolve {
    double value = 0.0;
    bool pinned = false;
};

// Scalar solve on one node: largest lowering whose cell area is within tol
// of the target. Area is monotone in the drop; Newton with a bisection
// bracket guards hull-topology kinks.
NodeSolve solve_node(const PowerCellComplex& cx, int i, double base_value, double target,
                     double tol, double damping, double floor_value, double step_hint,
                     bool allow_overshoot) {
    const double kInf = std::numeric_limits<double>::infinity();
    double t_lo = 0.0, a_lo = 0.0;
    double t_hi = kInf, a_hi = kInf;
    const double t_floor = base_value - floor_value;
    if (t_floor <= 0.0) return {floor_value, true};

    double t = 0.0;
    auto first = cx.trial_lower(i, base_value);
    double area = first.area;
    double slope = first.newton_slope;
    if (area >= target - tol) return {base_value, false};
    a_lo = area;

    for (int it = 0; it < 60; ++it) {
        double t_next;
        if (slope > 1e-300) {
            t_next = t + damping * (target - area) / slope;
        } else {
            t_next = (t > 0.0 ? 2.0 * t : std::max(step_hint, 1e-12));
        }
        if (t_next <= t_lo || t_next >= t_hi)
            t_next = std::isfinite(t_hi) ? 0.5 * (t_lo + t_hi) : std::max(2.0 * t, step_hint);
        bool clipped = false;
        if (t_next >= t_floor) {
            t_next = t_floor;
            clipped = true;
        }
        auto tr = cx.trial_lower(i, base_value - t_next);
        t = t_next;
        area = tr.area;
        slope = tr.newton_slope;
        if (clipped && area <= target + tol) return {floor_value, true};
        if (std::abs(area - target) <= tol) return {base_value - t, false};
        if (area < target) {
            t_lo = t;
            a_lo = area;
        } else {
            t_hi = t;
            a_hi = area;
        }
        if (std::isfinite(t_hi) && t_hi - t_lo < 1e-17 * (1.0 + std::abs(base_value))) {
            // the area jumps across the target (an activation captures crease
            // mass all at once); commit the side closer to the target, never
            // a dead value for a loaded node, and never an overshoot so big
            // that it sets off a stealing cascade among neighbours
            bool overshoot_ok =
                allow_overshoot && a_hi <= std::max(2.0 * target, target + 10.0 * tol);
            if (overshoot_ok && (a_lo <= 0.0 || a_hi - target < target - a_lo))
                return {base_value - t_hi, false};
            return {base_value - t_lo, false};
        }
    }
    return {base_value - t_lo, false};  // deficit side keeps monotonicity
}

// Jacobi-preconditioned CG for the SPD area Jacobian (a weighted graph
// Laplacian with Dirichlet rows eliminated).
struct SparseSPD {
    int n = 0;
    std::vector<double> diag;
    std::vector<std::vector<std::pair<int, double>>> off;

    std::vector<double> solve(const std::vector<double>& rhs, int max_it, double rel_tol) const {
        std::vector<double> x(n, 0.0), r = rhs, z(n), p(n), Ap(n);
        auto precond = [&](const std::vector<double>& v, std::vector<double>& o) {
            for (int i = 0; i < n; ++i) o[i] = v[i] / std::max(diag[i], 1e-300);
        };
        precond(r, z);
        p = z;
        double rz = 0.0, rhs_norm = 0.0;
        for (int i = 0; i < n; ++i) {
            rz += r[i] * z[i];
            rhs_norm += rhs[i] * rhs[i];
        }
        if (rhs_norm == 0.0) return x;
        for (int it = 0; it < max_it; ++it) {
            for (int i = 0; i < n; ++i) {
                double s = diag[i] * p[i];
                for (const auto& [j, w] : off[i]) s += w * p[j];
                Ap[i] = s;
            }
            double pAp = 0.0;
            for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
            if (pAp <= 0.0) break;
            double alpha = rz / pAp;
            double rr = 0.0;
            for (int i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * Ap[i];
                rr += r[i] * r[i];
            }
            if (rr <= rel_tol * rel_tol * rhs_norm) break;
            precond(r, z);
            double rz_new = 0.0;
            for (int i = 0; i < n; ++i) rz_new += r[i] * z[i];
            double beta = rz_new / rz;
            rz = rz_new;
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        return x;
    }
};

struct Problem {
    const NodeSet* nodes = nullptr;
    std::vector<double> target;
    std::vector<double> tol;
    std::vector<double> scale;
    std::vector<char> interior;
    const std::vector<double>* floor_vals = nullptr;
    double total = 0.0;
    double rel_tol = 1e-8;
    double damping = 1.0;
    double step_hint = 1e-3;
    double drop_cap = 1e3;
    double value_floor_guard = -1e30;
};

double floor_at(const Problem& pb, int i) {
    return pb.floor_vals ? (*pb.floor_vals)[i] : -std::numeric_limits<double>::infinity();
}

double node_deficit(const Problem& pb, const PowerCellComplex& cx, int i,
                    const std::vector<char>& pinned) {
    if (!pb.interior[i] || pinned[i]) return 0.0;
    double a = cx.active(i) ? cx.cell_area(i) : 0.0;
    return (pb.target[i] - a) / pb.scale[i];
}

// One pass of the monotone priority-queue iteration. Stops when the queue
// empties or the update budget runs out; returns updates spent. Nodes whose
// scalar solve cannot move (area jump locked by neighbours) are parked after
// a few attempts and picked up again by the next re-verification round.
long monotone_pass(const Problem& pb, PowerCellComplex& cx, std::vector<char>& pinned,
                   long max_updates, bool trace) {
    const int n = cx.size();
    std::priority_queue<QueueEntry> pq;
    std::vector<long> stamp(n, 0);
    std::vector<unsigned char> stalls(n, 0);
    long counter = 0;
    auto push = [&](int i) {
        double d = node_deficit(pb, cx, i, pinned);
        if (d > pb.rel_tol && stalls[i] < 3) pq.push({d, i, stamp[i] = ++counter});
    };
    for (int i = 0; i < n; ++i) push(i);
    long updates = 0;
    while (!pq.empty() && updates < max_updates) {
        auto [d, i, s] = pq.top();
        pq.pop();
        if (s != stamp[i]) continue;
        if (node_deficit(pb, cx, i, pinned) <= pb.rel_tol) continue;
        ++updates;
        double base = cx.active(i) ? cx.value(i)
                                   : std::min(cx.value(i), cx.hull_value(pb.nodes->points[i]));
        NodeSolve ns = solve_node(cx, i, base, pb.target[i], pb.tol[i], pb.damping, floor_at(pb, i),
                                  pb.step_hint, /*allow_overshoot=*/false);
        if (ns.value < pb.value_floor_guard) {
            char buf[200];
            std::snprintf(buf, sizeof(buf),
                          "solve_dirichlet: nodal value diverged at node %d (%.3f,%.3f) "
                          "value=%.3g target=%.3g guard=%.3g",
                          i, pb.nodes->points[i].x, pb.nodes->points[i].y, ns.value, pb.target[i],
                          pb.value_floor_guard);
            throw NotSolvable(buf);
        }
        if (ns.pinned) pinned[i] = 1;
        if (ns.value < cx.value(i)) {
            stalls[i] = 0;
            auto damaged = cx.lower(i, ns.value);
            for (int j : damaged) push(j);
        } else {
            ++stalls[i];
        }
        push(i);
        if (trace && updates % (4 * n) == 0) {
            double resid = 0.0;
            for (int k = 0; k < n; ++k)
                if (pb.interior[k])
                    resid += std::abs((cx.active(k) ? cx.cell_area(k) : 0.0) - pb.target[k]);
            std::fprintf(stderr, "[monotone] updates=%ld resid=%.6g queue=%zu\n", updates, resid,
                         pq.size());
        }
    }
    return updates;
}

double global_residual(const Problem& pb, const PowerCellComplex& cx,
                       const std::vector<char>& pinned) {
    double resid = 0.0;
    for (int i = 0; i < cx.size(); ++i) {
        if (!pb.interior[i]) continue;
        double area = cx.active(i) ? cx.cell_area(i) : 0.0;
        if (pinned[i])
            resid += std::max(0.0, area - pb.target[i]);
        else
            resid += std::abs(area - pb.target[i]);
    }
    return resid;
}

// The area system is the gradient of the convex functional
//   G(v) = int_box max_j (p.x_j - v_j) dp + sum_i T_i v_i,
// with dG/dv_i = T_i - A_i(v) on loaded nodes, so damped Newton with a line
// search on G converges globally.
double newton_merit(const Problem& pb, const PowerCellComplex& cx) {
    double g = 0.0;
    for (int j = 0; j < cx.size(); ++j) {
        if (!cx.active(j)) continue;
        const ConvexPolygon& c = cx.cell(j);
        double area = cx.cell_area(j);
        if (area <= 0.0) continue;
        Vec2 cen = c.centroid();
        g += area * (cen.dot(pb.nodes->points[j]) - cx.value(j));
    }
    for (int i = 0; i < cx.size(); ++i)
        if (pb.interior[i]) g += pb.target[i] * cx.value(i);
    return g;
}

// Global damped Newton on the coupled area equations. Values move freely
// here; the result only seeds the monotone phase through a certified upper
// bound, so fast (unverified) cell rebuilds are fine.
void newton_phase(const Problem& pb, PowerCellComplex& cx, std::vector<char>& pinned, bool trace) {
    const int n = cx.size();
    const double target_resid = 0.05 * kRelTolFactor * pb.rel_tol * std::max(pb.total, 1e-12);

    std::vector<double> vals;
    double lm_lambda = 1e-10;  // Levenberg damping against degenerate rows
    for (int outer = 0; outer < 80; ++outer) {
        // coordinate-descent burst on the worst deficits: lowering a node is
        // always an admissible descent step for the energy, it reactivates
        // engulfed cells, and it resolves localized rearrangements (a Dirac
        // carrier handing its mass to a neighbour) that the quadratic model
        // cannot express
        {
            std::vector<std::pair<double, int>> worst;
            for (int i = 0; i < n; ++i) {
                if (!pb.interior[i] || pb.target[i] <= 0 || pinned[i]) continue;
                double a = cx.active(i) ? cx.cell_area(i) : 0.0;
                if (pb.target[i] - a > 8.0 * pb.tol[i]) worst.push_back({pb.target[i] - a, i});
            }
            std::sort(worst.rbegin(), worst.rend());
            if (worst.size() > 64) worst.resize(64);
            for (const auto& [def, i] : worst) {
                double base = cx.active(i)
                                  ? cx.value(i)
                                  : std::min(cx.value(i), cx.hull_value(pb.nodes->points[i]));
                NodeSolve ns = solve_node(cx, i, base, pb.target[i], pb.tol[i], pb.damping,
                                          floor_at(pb, i), pb.step_hint, /*allow_overshoot=*/true);
                if (ns.pinned) pinned[i] = 1;
                if (ns.value < cx.value(i)) cx.lower(i, ns.value);
            }
        }
        double resid = global_residual(pb, cx, pinned);
        if (trace) {
            int dead = 0;
            double dead_resid = 0.0;
            for (int i = 0; i < n; ++i)
                if (pb.interior[i] && pb.target[i] > 0 && !cx.active(i)) {
                    ++dead;
                    dead_resid += pb.target[i];
                }
            std::fprintf(stderr, "[newton] it=%d resid=%.6g lambda=%.2g dead=%d dead_resid=%.4g\n",
                         outer, resid, lm_lambda, dead, dead_resid);
        }
        if (resid <= target_resid) break;

        // Newton system over active interior nodes with a mass equation
        std::vector<int> sys_of(n, -1);
        std::vector<int> node_of;
        for (int i = 0; i < n; ++i) {
            bool pinned_tight = false;
            if (pb.floor_vals && pinned[i]) {
                // pinned nodes stay on the floor unless overloaded
                double area = cx.active(i) ? cx.cell_area(i) : 0.0;
                pinned_tight = area <= pb.target[i] + pb.tol[i];
            }
            if (pb.interior[i] && cx.active(i) && !pinned_tight) {
                sys_of[i] = (int)node_of.size();
                node_of.push_back(i);
            }
        }
        const int m = (int)node_of.size();
        if (m == 0) break;
        if (trace && lm_lambda > 1e3) {
            std::vector<std::pair<double, int>> worst;
            for (int i = 0; i < n; ++i)
                if (pb.interior[i])
                    worst.push_back({std::abs((cx.active(i) ? cx.cell_area(i) : 0.0) - pb.target[i]), i});
            std::sort(worst.rbegin(), worst.rend());
            for (int k = 0; k < 6; ++k) {
                int i = worst[k].second;
                std::fprintf(stderr,
                             "[newton]   worst %d: node=%d pos=(%.3f,%.3f) T=%.4g A=%.4g "
                             "active=%d insys=%d\n",
                             k, i, pb.nodes->points[i].x, pb.nodes->points[i].y, pb.target[i],
                             cx.active(i) ? cx.cell_area(i) : 0.0, (int)cx.active(i),
                             (int)(sys_of[i] >= 0));
            }
        }

        SparseSPD L;
        L.n = m;
        L.diag.assign(m, 0.0);
        L.off.assign(m, {});
        std::vector<double> rhs(m, 0.0);
        for (int r = 0; r < m; ++r) {
            int i = node_of[r];
            rhs[r] = pb.target[i] - cx.cell_area(i);
            const ConvexPolygon& c = cx.cell(i);
            const auto& vs = c.vertices();
            const auto& os = c.edge_origins();
            for (std::size_t k = 0; k < c.size(); ++k) {
                int j = os[k];
                if (j < 0) continue;
                double len = (vs[(k + 1) % c.size()] - vs[k]).norm();
                double w = len / (pb.nodes->points[j] - pb.nodes->points[i]).norm();
                L.diag[r] += w;
                if (sys_of[j] >= 0) L.off[r].push_back({sys_of[j], -0.5 * w});
            }
        }
        // symmetrize off-diagonals (each edge contributes half from each side)
        std::vector<std::map<int, double>> sym(m);
        for (int r = 0; r < m; ++r)
            for (const auto& [ccol, w] : L.off[r]) {
                sym[r][ccol] += w;
                sym[ccol][r] += w;
            }
        for (int r = 0; r < m; ++r) {
            L.off[r].clear();
            for (const auto& [ccol, w] : sym[r]) L.off[r].push_back({ccol, w});
        }

        vals = cx.values();
        std::vector<double> mass_before(m);
        for (int r = 0; r < m; ++r) mass_before[r] = cx.cell_area(node_of[r]);
        const double merit0 = newton_merit(pb, cx);

        bool accepted = false;
        std::vector<double> base_diag = L.diag;
        for (int retry = 0; retry < 7 && !accepted; ++retry) {
            for (int r = 0; r < m; ++r) L.diag[r] = base_diag[r] * (1.0 + lm_lambda);
            std::vector<double> drop = L.solve(rhs, 2 * m + 200, 1e-10);
            double max_drop = 0.0, slope = 0.0;
            for (int r = 0; r < m; ++r) {
                max_drop = std::max(max_drop, std::abs(drop[r]));
                slope += rhs[r] * drop[r];  // directional decrease of G
            }
            if (!(max_drop > 0.0) || !std::isfinite(max_drop)) break;
            if (max_drop > pb.drop_cap) {
                double s = pb.drop_cap / max_drop;
                for (double& d : drop) d *= s;
                slope *= s;
            }

            double omega = 1.0;
            for (int ls = 0; ls < 8 && !accepted; ++ls) {
                std::vector<double> trial = vals;
                for (int r = 0; r < m; ++r) {
                    int i = node_of[r];
                    trial[i] = std::max(vals[i] - omega * drop[r], floor_at(pb, i));
                }
                cx.set_values(std::move(trial), /*full_verify=*/true,
                              /*allow_box_growth=*/false);
                // the energy always decreases along the Newton direction;
                // the mass floor keeps loaded cells alive so the Hessian
                // stays connected along the path
                bool masses_ok = true;
                int floor_block = -1;
                for (int r = 0; r < m && masses_ok; ++r) {
                    int i = node_of[r];
                    if (pb.target[i] <= 0.0) continue;
                    if (mass_before[r] <= 1e-6 * pb.target[i]) continue;  // revival's job
                    double a_new = cx.active(i) ? cx.cell_area(i) : 0.0;
                    if (a_new < 0.02 * std::min(mass_before[r], pb.target[i])) {
                        masses_ok = false;
                        floor_block = i;
                    }
                }
                if (trace && !masses_ok && lm_lambda > 1e3 && ls == 0)
                    std::fprintf(stderr, "[newton]   floor_block at node %d (%.3f,%.3f) T=%.4g\n",
                                 floor_block, pb.nodes->points[floor_block].x,
                                 pb.nodes->points[floor_block].y, pb.target[floor_block]);
                // far from the solution the convex energy drives acceptance;
                // near it the energy decrements sink below double precision,
                // so the residual norm (quadratically convergent there)
                // takes over
                bool ok;
                if (resid <= 1e-3 * std::max(pb.total, 1.0)) {
                    double new_resid = global_residual(pb, cx, pinned);
                    ok = new_resid <= (1.0 - 0.1 * omega) * resid;
                } else {
                    double merit = newton_merit(pb, cx);
                    ok = merit <= merit0 - 1e-4 * omega * std::abs(slope);
                }
                if (masses_ok && ok) accepted = true;
                else omega *= 0.5;
            }
            if (accepted)
                lm_lambda = std::max(lm_lambda / 3.0, 1e-12);
            else
                lm_lambda = std::min(std::max(lm_lambda * 30.0, 1e-6), 1e6);
        }
        if (!accepted) {
            cx.set_values(std::move(vals), /*full_verify=*/true, /*allow_box_growth=*/false);
            break;
        }
        if (pb.floor_vals) {
            for (int i = 0; i < n; ++i)
                if (pb.interior[i])
                    pinned[i] = std::abs(cx.value(i) - floor_at(pb, i)) <= 1e-14 ? 1 : 0;
        }
    }
}

}  // namespace

static SolveResult run_solve(const DirichletProblem& problem, const SolverConfig& cfg,
                             const std::vector<double>* floor_values,
                             std::vector<char>* pinned_out, int depth = 0);

namespace {

// Geometric 2x2-bucket thinning of the interior nodes; boundary nodes are
// kept. Returns the coarse problem plus the coarse hull evaluated later.
struct Coarsened {
    std::shared_ptr<NodeSet> nodes;
    DirichletProblem problem;
    std::vector<double> floor_vals;
    bool valid = false;
};

Coarsened coarsen(const DirichletProblem& fine, const std::vector<double>* floor_values) {
    const auto& nodes = *fine.nodes;
    const int n = nodes.size();
    std::vector<double> tgt(n, 0.0);
    for (const auto& [i, w] : fine.target.atoms()) tgt[i] = w;
    std::vector<int> interior;
    for (int i = 0; i < n; ++i)
        if (!nodes.boundary[i]) interior.push_back(i);
    Coarsened out;
    if (interior.size() < 64) return out;
    const double spacing =
        std::sqrt(std::abs(polygon_area(nodes.domain)) / (double)interior.size());
    const double bucket = 2.05 * spacing;
    std::map<std::pair<long, long>, std::vector<int>> buckets;
    for (int i : interior) {
        long bx = (long)std::floor(nodes.points[i].x / bucket);
        long by = (long)std::floor(nodes.points[i].y / bucket);
        buckets[{bx, by}].push_back(i);
    }
    std::vector<int> reps;
    std::vector<int> rep_of(n, -1);
    for (auto& [key, members] : buckets) {
        // a genuinely heavy atom (a Dirac carrier) represents its bucket so
        // it never moves between levels; otherwise geometry decides
        Vec2 center{(key.first + 0.5) * bucket, (key.second + 0.5) * bucket};
        int nearest = members[0], heaviest = members[0];
        double bd = 1e300, bw = -1.0, sum = 0.0;
        for (int i : members) {
            double d = (nodes.points[i] - center).norm2();
            if (d < bd) {
                bd = d;
                nearest = i;
            }
            if (tgt[i] > bw) {
                bw = tgt[i];
                heaviest = i;
            }
            sum += tgt[i];
        }
        int best = (bw > 4.0 * sum / (double)members.size()) ? heaviest : nearest;
        reps.push_back(best);
        for (int i : members) rep_of[i] = best;
    }
    if (reps.size() >= 0.7 * interior.size()) return out;

    auto coarse = std::make_shared<NodeSet>();
    coarse->domain = nodes.domain;
    std::vector<int> coarse_index(n, -1);
    for (int i = 0; i < n; ++i)
        if (nodes.boundary[i]) {
            coarse_index[i] = coarse->size();
            coarse->points.push_back(nodes.points[i]);
            coarse->boundary.push_back(1);
        }
    for (int r : reps) {
        coarse_index[r] = coarse->size();
        coarse->points.push_back(nodes.points[r]);
        coarse->boundary.push_back(0);
    }
    out.nodes = coarse;
    out.problem.nodes = coarse;
    out.problem.boundary_values.assign(coarse->size(), 0.0);
    for (int i = 0; i < n; ++i)
        if (nodes.boundary[i]) out.problem.boundary_values[coarse_index[i]] = fine.boundary_values[i];
    std::vector<std::pair<int, double>> atoms;
    for (const auto& [i, w] : fine.target.atoms()) atoms.emplace_back(coarse_index[rep_of[i]], w);
    out.problem.target = SignedDiscreteMeasure(std::move(atoms));
    if (floor_values) {
        out.floor_vals.assign(coarse->size(), -std::numeric_limits<double>::infinity());
        for (int i = 0; i < n; ++i)
            if (coarse_index[i] >= 0) out.floor_vals[coarse_index[i]] = (*floor_values)[i];
    }
    out.valid = true;
    return out;
}

}  // namespace

static SolveResult run_solve(const DirichletProblem& problem, const SolverConfig& cfg,
                             const std::vector<double>* floor_values,
                             std::vector<char>* pinned_out, int depth) {
    const auto& nodes = *problem.nodes;
    const int n = nodes.size();
    if (cfg.mass_tol <= 0 || cfg.max_iters < 1 || cfg.damping <= 0 || cfg.damping > 1)
        throw DegenerateInput("SolverConfig: invalid parameters");
    if ((int)problem.boundary_values.size() != n)
        throw DegenerateInput("solve_dirichlet: boundary value count mismatch");
    const bool trace = std::getenv("MA_SOLVER_TRACE") != nullptr;

    Problem pb;
    pb.nodes = &nodes;
    pb.floor_vals = floor_values;
    pb.rel_tol = kRelTolFactor * cfg.mass_tol;
    pb.damping = cfg.damping;
    pb.target.assign(n, 0.0);
    pb.interior.assign(n, 0);
    for (int i = 0; i < n; ++i) pb.interior[i] = !nodes.boundary[i];
    for (const auto& [i, m] : problem.target.atoms()) {
        if (i < 0 || i >= n) throw DegenerateInput("solve_dirichlet: target atom off the node set");
        if (!pb.interior[i]) throw NotSolvable("solve_dirichlet: target atom on a boundary node");
        if (m < 0) throw NotSolvable("solve_dirichlet: target must be nonnegative");
        pb.target[i] = m;
        pb.total += m;
    }
    const double mass_floor = pb.total / std::max(1, n);
    pb.tol.assign(n, 0.0);
    pb.scale.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        pb.scale[i] = std::max(pb.target[i], mass_floor);
        pb.tol[i] = pb.rel_tol * pb.scale[i];
    }

    double gmax = -1e300, gmin = 1e300;
    for (int i = 0; i < n; ++i)
        if (nodes.boundary[i]) {
            gmax = std::max(gmax, problem.boundary_values[i]);
            gmin = std::min(gmin, problem.boundary_values[i]);
        }
    if (gmax < gmin) throw DegenerateInput("solve_dirichlet: no boundary nodes");
    if (floor_values && (int)floor_values->size() != n)
        throw InvalidObstacle("floor value count mismatch");

    // start from the convex envelope of the boundary data: boundary nodes at
    // their data, interior nodes parked just above the hull (a large park
    // offset would inflate the slope box for nothing)
    const double park = gmax + 1e-2 * (gmax - gmin + 1.0);
    std::vector<double> init(n);
    for (int i = 0; i < n; ++i)
        init[i] = nodes.boundary[i] ? problem.boundary_values[i] : park;

    auto cx = std::make_shared<PowerCellComplex>(
        nodes.points, std::vector<char>(nodes.boundary.begin(), nodes.boundary.end()));
    {
        double lip = 1.0;
        auto bidx = nodes.boundary_indices();
        for (std::size_t k = 0; k + 1 < bidx.size(); ++k) {
            int i = bidx[k], j = bidx[k + 1];
            double dd = (nodes.points[i] - nodes.points[j]).norm();
            if (dd > 1e-12)
                lip = std::max(lip,
                               std::abs(problem.boundary_values[i] - problem.boundary_values[j]) / dd);
        }
        double extra = 2.0 * std::sqrt(pb.total / std::acos(-1.0) + 1.0);
        cx->ensure_box(4.0 * lip + 2.0 * extra + 8.0);
    }
    cx->set_values(init);
    const double diam = nodes.diameter();
    pb.value_floor_guard = gmin - 10.0 * (diam + 1.0) * (cx->box_halfwidth() + 1.0);
    pb.step_hint = 0.1 * (gmax - gmin + 1.0) / std::sqrt((double)n);
    pb.drop_cap = 8.0 * (park - gmin + 1.0) + 2.0 * std::sqrt(pb.total + 1.0) * diam;

    // envelope values at interior nodes (upper bound for any re-start)
    std::vector<double> env(n);
    for (int i = 0; i < n; ++i)
        env[i] = nodes.boundary[i] ? problem.boundary_values[i]
                                   : cx->hull_value(nodes.points[i]);

    std::vector<char> pinned(n, 0);
    const long budget = (long)cfg.max_iters * n + 10000;
    long iters = 0;

    if (pb.total > 0 && n > 64) {
        int interior_count = 0;
        for (int i = 0; i < n; ++i) interior_count += pb.interior[i];

        // multiscale init: solve a 4x-thinned copy first and start from its
        // hull, so every fine cell activates against an already-curved state
        if (interior_count > 1200 && depth < 8) {
            Coarsened co = coarsen(problem, floor_values);
            if (co.valid) {
                SolverConfig coarse_cfg = cfg;
                coarse_cfg.mass_tol = std::max(cfg.mass_tol, 1e-7);
                SolveResult rec = run_solve(co.problem, coarse_cfg,
                                            floor_values ? &co.floor_vals : nullptr, nullptr,
                                            depth + 1);
                std::vector<double> v0(n);
                for (int i = 0; i < n; ++i) {
                    if (nodes.boundary[i]) {
                        v0[i] = problem.boundary_values[i];
                    } else {
                        v0[i] = std::min(env[i], rec.u.eval(nodes.points[i]));
                        if (floor_values) v0[i] = std::max(v0[i], (*floor_values)[i]);
                    }
                }
                cx->set_values(std::move(v0), /*full_verify=*/true);
                if (floor_values)
                    for (int i = 0; i < n; ++i)
                        if (pb.interior[i] &&
                            std::abs(cx->value(i) - (*floor_values)[i]) <= 1e-14)
                            pinned[i] = 1;
            }
        }

        // bootstrap sweep, deepest first, over loaded nodes that are still
        // inactive: each scalar solve activates its node, and later
        // (shallower) nodes claim slope territory outside the cells already
        // placed
        {
            std::vector<std::pair<double, int>> order;
            for (int i = 0; i < n; ++i)
                if (pb.interior[i] && pb.target[i] > 0 && !cx->active(i))
                    order.push_back({-dist_to_boundary(nodes.domain, nodes.points[i]), i});
            std::sort(order.begin(), order.end());
            for (const auto& [d, i] : order) {
                ++iters;
                if (cx->active(i)) continue;
                double base = std::min(cx->value(i), cx->hull_value(nodes.points[i]));
                NodeSolve ns = solve_node(*cx, i, base, pb.target[i], pb.tol[i], pb.damping,
                                          floor_at(pb, i), pb.step_hint, /*allow_overshoot=*/true);
                if (ns.pinned) pinned[i] = 1;
                if (ns.value < cx->value(i)) cx->lower(i, ns.value);
            }
        }
        newton_phase(pb, *cx, pinned, trace);
        cx->set_values(std::vector<double>(cx->values()), /*full_verify=*/true);
        double resid = global_residual(pb, *cx, pinned);
        double margin = 0.0;
        if (resid > 0.5 * cfg.mass_tol * std::max(pb.total, mass_floor)) {
            // Newton stopped short: hand the monotone finisher a certified
            // upper start. The classical two-function estimate bounds
            // |v - u*| by the residual mass, so v + margin >= u* nodewise.
            margin = 1.5 * std::pow(unit_ball_volume(2), -0.5) * diam *
                     std::sqrt(std::max(resid, 0.0));
            std::vector<double> restart(n);
            for (int i = 0; i < n; ++i) {
                if (nodes.boundary[i]) {
                    restart[i] = problem.boundary_values[i];
                } else {
                    restart[i] = std::min(env[i], cx->value(i) + margin);
                    if (floor_values) restart[i] = std::max(restart[i], (*floor_values)[i]);
                }
            }
            cx->set_values(std::move(restart), /*full_verify=*/true);
        }
        std::fill(pinned.begin(), pinned.end(), 0);
        if (floor_values)
            for (int i = 0; i < n; ++i)
                if (pb.interior[i] && std::abs(cx->value(i) - (*floor_values)[i]) <= 1e-14)
                    pinned[i] = 1;
        if (trace)
            std::fprintf(stderr, "[restart] resid=%.3g margin=%.3g\n", resid, margin);
    }

    // monotone finisher with sound re-verification rounds
    for (int round = 0; round < 6; ++round) {
        iters += monotone_pass(pb, *cx, pinned, budget - iters, trace);
        if (iters >= budget) {
            std::vector<double> profile(n, 0.0);
            for (int k = 0; k < n; ++k) profile[k] = node_deficit(pb, *cx, k, pinned) * pb.scale[k];
            throw MaxItersExceeded("solve_dirichlet: iteration budget exhausted",
                                   std::move(profile));
        }
        cx->set_values(std::vector<double>(cx->values()), /*full_verify=*/true);
        bool clean = true;
        for (int i = 0; i < n; ++i)
            if (node_deficit(pb, *cx, i, pinned) > pb.rel_tol) clean = false;
        double resid = global_residual(pb, *cx, pinned);
        if (clean && resid <= std::max(cfg.mass_tol * std::max(pb.total, mass_floor), 1e-300)) {
            for (int i = 0; i < n; ++i)
                if (nodes.boundary[i] && !cx->active(i))
                    throw NotSolvable("solve_dirichlet: boundary data not convex-extendable");
            SolveResult out;
            out.residual = resid;
            out.iters = iters;
            std::vector<double> raw(cx->values());
            out.u = PLConvexFunction::adopt(problem.nodes, cx, std::move(raw));
            if (pinned_out) *pinned_out = std::move(pinned);
            return out;
        }
    }
    std::vector<double> profile(n, 0.0);
    for (int k = 0; k < n; ++k) profile[k] = node_deficit(pb, *cx, k, pinned) * pb.scale[k];
    throw MaxItersExceeded("solve_dirichlet: re-verification kept finding drift",
                           std::move(profile));
}

SolveResult solve_dirichlet(const DirichletProblem& problem, const SolverConfig& cfg) {
    return run_solve(problem, cfg, nullptr, nullptr);
}

SolveResult solve_dirichlet_floored(const DirichletProblem& problem, const SolverConfig& cfg,
                                    const std::vector<double>& floor_values,
                                    std::vector<char>& pinned) {
    return run_solve(problem, cfg, &floor_values, &pinned);
}

SolveResult cone_function(std::shared_ptr<const NodeSet> nodes, int y_node,
                          const SolverConfig& cfg) {
    if (y_node < 0 || y_node >= nodes->size() || nodes->boundary[y_node])
        throw DegenerateInput("cone_function: y must be an interior node");
    DirichletProblem p;
    p.nodes = nodes;
    p.boundary_values.assign(nodes->size(), 0.0);
    p.target = SignedDiscreteMeasure({{y_node, unit_ball_volume(2)}});
    return solve_dirichlet(p, cfg);
}

SolveResult isolated_singularity(const PLConvexFunction& phi, int y_node, const MassScale& a,
                                 const SolverConfig& cfg) {
    const auto& nodes = phi.nodes();
    if (y_node < 0 || y_node >= nodes.size() || nodes.boundary[y_node])
        throw DegenerateInput("isolated_singularity: y must be an interior node");
    std::vector<char> keep(nodes.boundary.size());
    for (std::size_t k = 0; k < keep.size(); ++k) keep[k] = !nodes.boundary[k];
    SignedDiscreteMeasure background = ma_measure(phi).restricted_to(keep);
    DirichletProblem p;
    p.nodes = phi.nodes_ptr();
    p.boundary_values = phi.values();
    p.target = background + SignedDiscreteMeasure({{y_node, a.budget()}});
    return solve_dirichlet(p, cfg);
}

}  // namespace ma
