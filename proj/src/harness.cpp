#include "ma/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ma {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- builders

std::shared_ptr<NodeSet> square_grid(double half, int side) {
    if (side < 2) throw DegenerateInput("square_grid: side must be >= 2");
    auto ns = std::make_shared<NodeSet>();
    ns->domain = {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
    for (int j = 0; j < side; ++j)
        for (int i = 0; i < side; ++i) {
            double x = -half + 2.0 * half * i / (side - 1);
            double y = -half + 2.0 * half * j / (side - 1);
            ns->points.push_back({x, y});
            ns->boundary.push_back(i == 0 || j == 0 || i == side - 1 || j == side - 1);
        }
    return ns;
}

std::shared_ptr<NodeSet> disk_mesh(double radius, int boundary_count, int lattice_side) {
    if (boundary_count < 8) throw DegenerateInput("disk_mesh: need >= 8 boundary nodes");
    auto ns = std::make_shared<NodeSet>();
    const double pi = std::acos(-1.0);
    for (int k = 0; k < boundary_count; ++k) {
        double th = 2.0 * pi * k / boundary_count;
        ns->domain.push_back({radius * std::cos(th), radius * std::sin(th)});
    }
    ns->points = ns->domain;
    ns->boundary.assign(boundary_count, 1);
    const double h = 2.0 * radius / (lattice_side - 1);
    for (int j = 0; j < lattice_side; ++j)
        for (int i = 0; i < lattice_side; ++i) {
            Vec2 p{-radius + h * i, -radius + h * j};
            if (!point_in_convex(ns->domain, p, 0.0)) continue;
            if (dist_to_boundary(ns->domain, p) < 0.45 * h) continue;
            ns->points.push_back(p);
            ns->boundary.push_back(0);
        }
    return ns;
}

std::shared_ptr<NodeSet> radial_graded_disk(double radius, int boundary_count, double h_coarse,
                                            double fine_lo, double fine_hi, double h_fine) {
    auto ns = std::make_shared<NodeSet>();
    const double pi = std::acos(-1.0);
    for (int k = 0; k < boundary_count; ++k) {
        double th = 2.0 * pi * k / boundary_count;
        ns->domain.push_back({radius * std::cos(th), radius * std::sin(th)});
    }
    ns->points.push_back({0.0, 0.0});
    ns->boundary.push_back(0);
    double r = 0.0;
    int ring = 0;
    while (true) {
        double h = (r >= fine_lo && r <= fine_hi) ? h_fine : h_coarse;
        r += h;
        if (r >= radius - 0.6 * h_coarse) break;
        int count = std::max(8, (int)std::llround(2.0 * pi * r / h));
        // stagger alternate rings to avoid long radial collinearities
        double phase = (ring % 2) ? pi / count : 0.0;
        for (int k = 0; k < count; ++k) {
            double th = 2.0 * pi * k / count + phase;
            Vec2 p{r * std::cos(th), r * std::sin(th)};
            if (!point_in_convex(ns->domain, p, 0.0)) continue;
            if (dist_to_boundary(ns->domain, p) < 0.4 * h_coarse) continue;
            ns->points.push_back(p);
            ns->boundary.push_back(0);
        }
        ++ring;
    }
    for (const Vec2& v : ns->domain) {
        ns->points.push_back(v);
        ns->boundary.push_back(1);
    }
    return ns;
}

// -------------------------------------------------------------- backgrounds

Background make_background(const std::string& kind) {
    Background bg;
    bg.kind = kind;
    if (kind == "quadratic") {
        bg.lambda_min = 1.0;
        bg.hessian = {1.0, 0.0, 1.0};
        bg.phi = [](Vec2 x) { return 0.5 * x.norm2(); };
        bg.density = [](Vec2) { return 1.0; };
    } else if (kind == "anisotropic-quadratic") {
        bg.lambda_min = 1.0;  // det D^2 phi = 4, smallest eigenvalue 1
        bg.hessian = {1.0, 0.0, 4.0};
        bg.phi = [](Vec2 x) { return 0.5 * (x.x * x.x + 4.0 * x.y * x.y); };
        bg.density = [](Vec2) { return 4.0; };
    } else if (kind == "custom-density") {
        bg.lambda_min = 0.5;
        bg.hessian = {1.0, 0.0, 1.0};
        bg.phi = nullptr;  // realized by a solve
        bg.density = [](Vec2 x) { return 1.0 + 0.5 * x.x; };
    } else {
        throw DegenerateInput("unknown background kind: " + kind);
    }
    return bg;
}

PLConvexFunction background_function(const Background& bg, std::shared_ptr<const NodeSet> nodes,
                                     const SolverConfig& cfg) {
    if (bg.phi) {
        std::vector<double> vals(nodes->size());
        for (int i = 0; i < nodes->size(); ++i) vals[i] = bg.phi(nodes->points[i]);
        return lower_hull(std::move(nodes), std::move(vals));
    }
    // custom density: M phi = assembled density, quadratic boundary data
    DirichletProblem p;
    p.nodes = nodes;
    p.boundary_values.assign(nodes->size(), 0.0);
    for (int i = 0; i < nodes->size(); ++i)
        p.boundary_values[i] = 0.5 * nodes->points[i].norm2();
    std::vector<char> keep(nodes->size());
    for (int i = 0; i < nodes->size(); ++i) keep[i] = !nodes->boundary[i];
    p.target = assemble_background(bg.density, *nodes).restricted_to(keep);
    return solve_dirichlet(p, cfg).u;
}

// ----------------------------------------------------------------- scenario

void Scenario::validate() const {
    if (n < 2) throw DegenerateInput("Scenario: n must be >= 2");
    for (std::size_t k = 0; k + 1 < a_ladder.size(); ++k)
        if (!(a_ladder[k] > a_ladder[k + 1]))
            throw DegenerateInput("Scenario: a_ladder must be strictly decreasing");
    const double inr = radius;  // disks and balls; squares use half side
    for (double a : a_ladder)
        if (!(a < inr / 4.0)) throw DegenerateInput("Scenario: every a must be < inradius/4");
    if (domain_type != "disk" && domain_type != "square" && domain_type != "ball")
        throw DegenerateInput("Scenario: unknown domain type " + domain_type);
}

Scenario scenario_from_json(const std::string& text) {
    ojson j = ojson::parse(text);
    Scenario s;
    s.name = j.at("name").get<std::string>();
    s.n = j.value("n", 2);
    s.background = j.value("background", std::string("quadratic"));
    if (j.contains("domain")) {
        const auto& d = j.at("domain");
        if (d.is_object()) {
            s.domain_type = d.value("type", std::string("disk"));
            s.radius = d.value("radius", d.value("half", 1.0));
            s.boundary_nodes = d.value("boundary_nodes", 256);
            s.interior = d.value("interior", 65);
        } else {
            s.domain_type = "ball";
            s.radius = d.get<double>();
        }
    }
    s.perturbation = j.value("perturbation", std::string("singularity"));
    s.a_ladder = j.value("a_ladder", std::vector<double>{});
    s.seeds = j.value("seeds", std::vector<long>{1});
    s.extended_factor = j.value("extended_factor", 1.5);
    s.validate();
    return s;
}

std::string scenario_to_json(const Scenario& s) {
    ojson j;
    j["name"] = s.name;
    j["n"] = s.n;
    j["background"] = s.background;
    j["domain"] = {{"type", s.domain_type},
                   {"radius", s.radius},
                   {"boundary_nodes", s.boundary_nodes},
                   {"interior", s.interior}};
    j["perturbation"] = s.perturbation;
    j["a_ladder"] = s.a_ladder;
    j["seeds"] = s.seeds;
    j["extended_factor"] = s.extended_factor;
    return j.dump(2);
}

// ------------------------------------------------------------------- random

SignedDiscreteMeasure random_admissible_bump(const PLConvexFunction& phi,
                                             const SignedDiscreteMeasure& background,
                                             double budget, bool negative,
                                             std::mt19937_64& rng) {
    const auto& nodes = phi.nodes();
    std::vector<int> deep;
    const double margin = 0.25 * polygon_diameter(nodes.domain) * 0.5;
    for (int i = 0; i < nodes.size(); ++i) {
        if (nodes.boundary[i]) continue;
        if (dist_to_boundary(nodes.domain, nodes.points[i]) < margin) continue;
        if (negative && background.at(i) <= 0.0) continue;
        deep.push_back(i);
    }
    if (deep.empty()) throw DegenerateInput("random_admissible_bump: no deep interior nodes");
    std::uniform_int_distribution<int> count_dist(1, 5);
    std::uniform_real_distribution<double> w_dist(0.2, 1.0);
    int k = count_dist(rng);
    std::vector<std::pair<int, double>> atoms;
    double sum = 0.0;
    for (int t = 0; t < k; ++t) {
        int i = deep[std::uniform_int_distribution<std::size_t>(0, deep.size() - 1)(rng)];
        double w = w_dist(rng);
        if (negative) w = std::min(w, 1.0);  // capped after normalization below
        atoms.emplace_back(i, w);
        sum += w;
    }
    for (auto& [i, w] : atoms) w *= budget / sum;
    if (negative) {
        // cap at available background mass, then renormalize on the cap-free part
        for (int pass = 0; pass < 8; ++pass) {
            double over = 0.0, free_sum = 0.0;
            for (auto& [i, w] : atoms) {
                double cap = background.at(i);
                if (w > cap) {
                    over += w - cap;
                    w = cap;
                } else {
                    free_sum += w;
                }
            }
            if (over <= 1e-15 * budget || free_sum <= 0.0) break;
            double scale = 1.0 + over / free_sum;
            for (auto& [i, w] : atoms)
                if (w < background.at(i)) w *= scale;
        }
    }
    SignedDiscreteMeasure bump(std::move(atoms));
    // exact total variation: rescale once more after merging duplicates
    double tv = bump.total_variation();
    if (tv > 0) bump = bump.scaled(budget / tv);
    return bump;
}

// ----------------------------------------------------------------- rate fit

RateFit rate_fit(const std::vector<AsymptoticRecord>& records) {
    if (records.size() < 3) throw InsufficientData("rate_fit: need >= 3 records");
    double amax = 0.0, amin = 1e300;
    for (const auto& r : records) {
        amax = std::max(amax, r.a);
        amin = std::min(amin, r.a);
    }
    if (amax / amin < 4.0 - 1e-12)
        throw InsufficientData("rate_fit: ladder must span a factor >= 4 in a");

    auto variance_around_mean = [](const std::vector<double>& y) {
        double m = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double s = 0.0;
        for (double v : y) s += (v - m) * (v - m);
        return s;
    };

    std::vector<double> plain, logm;
    for (const auto& r : records) {
        double gap = std::abs(r.offset);
        if (gap <= 0.0) throw InsufficientData("rate_fit: zero gap record");
        double la = std::abs(std::log(r.a));
        plain.push_back(std::log(gap) - 2.0 * std::log(r.a));
        logm.push_back(std::log(gap) - 2.0 * std::log(r.a) - std::log(la));
    }
    RateFit f;
    f.rss_plain = variance_around_mean(plain);
    f.rss_log = variance_around_mean(logm);
    f.log_correction = f.rss_log < f.rss_plain;

    // free-exponent fit with the selected model's log factor deflated
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : records) {
        double gap = std::abs(r.offset);
        if (f.log_correction) gap /= std::abs(std::log(r.a));
        double x = std::log(r.a), y = std::log(gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double nrec = (double)records.size();
    f.exponent = (nrec * sxy - sx * sy) / (nrec * sxx - sx * sx);
    return f;
}

// ------------------------------------------------------------------ outputs

std::string reports_csv(const std::vector<ExtremalReport>& reports) {
    std::ostringstream os;
    os << "y_x,y_y,a,lower,upper,observed,classical,improved,slack\n";
    char buf[360];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.y_pos.x,
                      r.y_pos.y, r.a.a, r.lower, r.upper, r.observed, r.classical_bound,
                      r.improved_bound, r.slack);
        os << buf;
    }
    return os.str();
}

namespace {

int nearest_node(const NodeSet& nodes, Vec2 q, bool interior_only) {
    int best = -1;
    double bd = 1e300;
    for (int i = 0; i < nodes.size(); ++i) {
        if (interior_only && nodes.boundary[i]) continue;
        double d = (nodes.points[i] - q).norm2();
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

double node_gap(const PLConvexFunction& u, const PLConvexFunction& phi) {
    double g = 0.0;
    for (int i = 0; i < phi.nodes().size(); ++i)
        g = std::max(g, std::abs(u.value(i) - phi.value(i)));
    return g;
}

DominationRow domination_row(const PLConvexFunction& u, const PLConvexFunction& phi, double a,
                             long seed, double residual) {
    DominationRow row;
    row.a = a;
    row.seed = seed;
    row.gap = node_gap(u, phi);
    std::vector<char> keep(phi.nodes().size());
    for (int i = 0; i < phi.nodes().size(); ++i) keep[i] = !phi.nodes().boundary[i];
    double tv = (ma_measure(u) - ma_measure(phi)).restricted_to(keep).total_variation();
    row.classical = std::pow(unit_ball_volume(2), -0.5) * phi.nodes().diameter() * std::sqrt(tv);
    row.residual = residual;
    // value slack for the residual mass: classical bound applied to it
    double resid_gap =
        std::pow(unit_ball_volume(2), -0.5) * phi.nodes().diameter() * std::sqrt(residual);
    row.ok = row.gap <= row.classical + resid_gap + 1e-12;
    return row;
}

}  // namespace

RunOutputs run_scenario(const Scenario& s, const RunConfig& rc) {
    s.validate();
    RunOutputs out;
    SolverConfig cfg;
    cfg.mass_tol = rc.mass_tol;

    const double pi = std::acos(-1.0);

    if (s.domain_type == "ball" || s.n >= 3) {
        // exact radial reduction, any n >= 2
        for (double a : s.a_ladder) {
            AsymptoticRecord rec;
            rec.n = s.n;
            rec.a = a;
            if (s.perturbation == "obstacle") {
                rec.offset = radial_obstacle_offset(s.n, s.radius, a);
                rec.predicted = (s.n >= 3) ? dn0(s.n) * a * a
                                           : 0.5 * a * a * std::abs(std::log(a));
            } else {
                rec.offset = radial_dirichlet_offset(s.n, s.radius, a);
                rec.predicted = (s.n >= 3) ? -dn0(s.n) * a * a
                                           : -0.5 * a * a * std::abs(std::log(a));
            }
            rec.error = rec.offset - rec.predicted;
            out.records.push_back(rec);
        }
    } else {
        std::shared_ptr<NodeSet> nodes;
        if (s.domain_type == "square")
            nodes = square_grid(s.radius, s.interior);
        else
            nodes = disk_mesh(s.radius, s.boundary_nodes, s.interior);
        Background bg = make_background(s.background);
        PLConvexFunction phi = background_function(bg, nodes, cfg);
        std::vector<char> keep(nodes->size());
        for (int i = 0; i < nodes->size(); ++i) keep[i] = !nodes->boundary[i];
        SignedDiscreteMeasure background = ma_measure(phi).restricted_to(keep);
        const int center = nearest_node(*nodes, {0, 0}, true);

        std::vector<long> seeds = s.seeds;
        if (rc.seed_override >= 0) seeds = {rc.seed_override};

        for (double a : s.a_ladder) {
            MassScale ms{a, 2};
            for (long seed : seeds) {
                if (s.perturbation == "singularity") {
                    SolveResult sol = isolated_singularity(phi, center, ms, cfg);
                    AsymptoticRecord rec;
                    rec.n = 2;
                    rec.a = a;
                    rec.offset = sol.u.value(center) - phi.value(center);
                    rec.predicted = -0.5 * a * a * std::abs(std::log(a));
                    rec.error = rec.offset - rec.predicted;
                    out.records.push_back(rec);
                    out.domination.push_back(domination_row(sol.u, phi, a, seed, sol.residual));
                } else if (s.perturbation == "obstacle") {
                    CalibratedObstacle cal = calibrate_height(phi, {0, 0}, ms, cfg);
                    AsymptoticRecord rec;
                    rec.n = 2;
                    rec.a = a;
                    rec.offset = cal.solution.v.value(cal.spec.x_p) - phi.value(cal.spec.x_p);
                    rec.predicted = 0.5 * a * a * std::abs(std::log(a));
                    rec.error = rec.offset - rec.predicted;
                    out.records.push_back(rec);
                    out.coincidence_json.push_back(
                        "{\"nodes_count\":" + std::to_string(cal.solution.coincidence.nodes.size()) +
                        ",\"mass\":" + std::to_string(cal.solution.coincidence.mass) +
                        ",\"h\":" + std::to_string(cal.spec.h) + "}");
                    out.domination.push_back(
                        domination_row(cal.solution.v, phi, a, seed, cal.solution.residual));
                } else if (s.perturbation == "random-admissible") {
                    std::mt19937_64 rng((std::uint64_t)seed);
                    bool negative = (seed % 2) == 0;
                    SignedDiscreteMeasure bump =
                        random_admissible_bump(phi, background, pi * a * a, negative, rng);
                    DirichletProblem p;
                    p.nodes = nodes;
                    p.boundary_values = phi.values();
                    p.target = negative ? background - bump : background + bump;
                    SolveResult sol = solve_dirichlet(p, cfg);
                    out.domination.push_back(domination_row(sol.u, phi, a, seed, sol.residual));
                    // query nodes drawn deterministically from the same rng
                    ReportOptions ropt;
                    ropt.lambda_min = bg.lambda_min;
                    ropt.envelope.threads = rc.threads;
                    for (int q = 0; q < 5; ++q) {
                        Vec2 target{std::uniform_real_distribution<double>(-0.4, 0.4)(rng),
                                    std::uniform_real_distribution<double>(-0.4, 0.4)(rng)};
                        int y = nearest_node(*nodes, target, true);
                        ExtremalReport rep = extremal_report(phi, sol.u, y, cfg, ropt);
                        if (!rep.sandwich_ok) ++out.sandwich_violations;
                        out.reports.push_back(rep);
                    }
                } else if (s.perturbation == "multi-dirac") {
                    std::mt19937_64 rng((std::uint64_t)seed);
                    double d = 0.35 * s.radius;
                    int y1 = nearest_node(*nodes, {d, 0}, true);
                    int y2 = nearest_node(*nodes, {-d, 0}, true);
                    SignedDiscreteMeasure atoms(
                        {{y1, 0.5 * pi * a * a}, {y2, 0.5 * pi * a * a}});
                    DirichletProblem p;
                    p.nodes = nodes;
                    p.boundary_values = phi.values();
                    p.target = background + atoms;
                    SolveResult sol = solve_dirichlet(p, cfg);
                    AsymptoticRecord rec;
                    rec.n = 2;
                    rec.a = a;
                    rec.offset = sol.u.value(y1) - phi.value(y1);
                    rec.predicted = -0.5 * a * a * std::abs(std::log(a));
                    rec.error = rec.offset - rec.predicted;
                    out.records.push_back(rec);
                    out.domination.push_back(domination_row(sol.u, phi, a, seed, sol.residual));
                } else {
                    throw DegenerateInput("unknown perturbation: " + s.perturbation);
                }
            }
        }
    }

    // deterministic output order
    std::sort(out.records.begin(), out.records.end(), [](const auto& x, const auto& y) {
        return x.a > y.a || (x.a == y.a && x.offset < y.offset);
    });
    std::sort(out.reports.begin(), out.reports.end(), [](const auto& x, const auto& y) {
        if (x.a.a != y.a.a) return x.a.a > y.a.a;
        if (x.y_pos.x != y.y_pos.x) return x.y_pos.x < y.y_pos.x;
        return x.y_pos.y < y.y_pos.y;
    });

    if (rc.write_files) {
        std::filesystem::create_directories(rc.out_dir);
        {
            std::ofstream f(rc.out_dir / "records.csv");
            f << records_csv(out.records);
        }
        if (!out.reports.empty()) {
            std::ofstream f(rc.out_dir / "reports.csv");
            f << reports_csv(out.reports);
        }
        if (!out.coincidence_json.empty()) {
            std::ofstream f(rc.out_dir / "coincidence.json");
            f << "[";
            for (std::size_t k = 0; k < out.coincidence_json.size(); ++k)
                f << (k ? "," : "") << out.coincidence_json[k];
            f << "]\n";
        }
    }
    return out;
}

// ----------------------------------------------------------------- selftest

namespace {

bool nearly(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

std::vector<std::string> selftest() {
    std::vector<std::string> failures;
    auto check = [&](bool ok, const std::string& name) {
        if (!ok) failures.push_back(name);
    };
    try {
        // flat triangle: single facet, zero measure
        auto tri = std::make_shared<NodeSet>();
        tri->points = {{0, 0}, {1, 0}, {0, 1}};
        tri->boundary = {1, 1, 1};
        tri->domain = {{0, 0}, {1, 0}, {0, 1}};
        auto f = lower_hull(tri, {0, 0, 0});
        check(ma_measure(f).total_variation() == 0.0, "flat-triangle-zero-measure");

        // affine data on square corners: one gradient (1,1)
        auto sq = std::make_shared<NodeSet>();
        sq->points = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
        sq->boundary = {1, 1, 1, 1};
        sq->domain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        auto g = lower_hull(sq, {0, 1, 1, 2});
        auto grads = g.facets();
        bool affine_ok = true;
        for (const auto& fc : grads)
            affine_ok = affine_ok && nearly(fc.gradient.x, 1.0, 1e-10) &&
                        nearly(fc.gradient.y, 1.0, 1e-10);
        check(affine_ok && ma_measure(g).total_variation() < 1e-12, "affine-square");

        // pyramid: square corners 1, center 0
        auto sq5 = std::make_shared<NodeSet>();
        sq5->points = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {0, 0}};
        sq5->boundary = {1, 1, 1, 1, 0};
        sq5->domain = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
        // subdifferential at the apex is {|p_x| + |p_y| <= 1} scaled: the
        // half-plane intersection of the four corner constraints, area 2
        auto pyr = lower_hull(sq5, {1, 1, 1, 1, 0});
        check(pyr.active(4) && nearly(ma_measure(pyr).at(4), 2.0, 1e-12), "pyramid-center-mass");

        // envelope of a bump: corners 0, center +1 -> envelope 0 everywhere
        auto env = convex_envelope(sq5, {0, 0, 0, 0, 1});
        check(nearly(env.value(4), 0.0, 1e-12) && !env.active(4), "envelope-bump");

        // jordan decomposition sign split
        SignedDiscreteMeasure m({{1, 2.0}, {2, -1.0}});
        auto [mp, mm] = jordan_decompose(m);
        check(nearly(mp.at(1), 2.0, 0.0) && nearly(mm.at(2), 1.0, 0.0) && mp.at(2) == 0.0,
              "jordan-split");

        // mass scale inversion
        check(nearly(mass_scale_from_total(std::acos(-1.0) * 0.01, 2).a, 0.1, 1e-12),
              "mass-scale-n2");
        check(nearly(mass_scale_from_total(4.0 / 3.0 * std::acos(-1.0) * 0.001, 3).a, 0.1, 1e-12),
              "mass-scale-n3");

        // radial trivials
        check(radial_dirichlet_offset(2, 1.0, 0.0) == 0.0, "radial-zero-a");
        check(nearly(singularity_profile_value(2, 1.0, 1.0),
                     0.5 * (std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))), 1e-10),
              "w1-closed-form");
        check(obstacle_profile_value(2, 0.5, 0.3) == 0.0, "obstacle-flat-core");

        // zero-measure solve: affine boundary reproduces the affine function
        auto ns = disk_mesh(1.0, 32, 9);
        DirichletProblem p;
        p.nodes = ns;
        p.boundary_values.resize(ns->size());
        for (int i = 0; i < ns->size(); ++i)
            p.boundary_values[i] = 0.3 * ns->points[i].x - 0.2 * ns->points[i].y + 0.1;
        SolverConfig cfg;
        SolveResult sol = solve_dirichlet(p, cfg);
        bool affine_exact = true;
        for (int i = 0; i < ns->size(); ++i)
            affine_exact = affine_exact &&
                           nearly(sol.u.value(i), p.boundary_values[i], 1e-10);
        check(affine_exact, "zero-target-affine");

        // rate fit on an exact power law
        std::vector<AsymptoticRecord> recs;
        for (double a : {0.2, 0.1, 0.05, 0.025}) {
            AsymptoticRecord r;
            r.a = a;
            r.offset = a * a * a;
            recs.push_back(r);
        }
        RateFit rf = rate_fit(recs);
        check(nearly(rf.exponent, 3.0, 1e-10) && !rf.log_correction, "rate-fit-power-law");

        // empty ladder scenario is a no-op
        Scenario s;
        s.name = "noop";
        s.domain_type = "ball";
        s.n = 3;
        RunConfig rc;
        rc.write_files = false;
        auto outs = run_scenario(s, rc);
        check(outs.records.empty(), "empty-ladder-noop");
    } catch (const std::exception& e) {
        failures.push_back(std::string("exception: ") + e.what());
    }
    return failures;
}

// ---------------------------------------------------------------------- cli

int cli(int argc, char** argv) {
    CLI::App app{"discrete Monge-Ampere toolkit"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    int threads = 1;
    long seed = -1;
    double tol = 1e-8;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--seed", seed, "seed override");
    app.add_option("--tol", tol, "solver mass tolerance");

    std::string scenario_path, sweep_dir, results_path, format = "csv";
    auto* run = app.add_subcommand("run", "run one scenario file");
    run->add_option("scenario", scenario_path, "scenario json")->required();
    auto* sweep = app.add_subcommand("sweep", "run every scenario json in a directory");
    sweep->add_option("dir", sweep_dir, "directory of scenario json files")->required();
    auto* report = app.add_subcommand("report", "re-emit a records csv");
    report->add_option("results", results_path, "records.csv path")->required();
    report->add_option("--format", format, "csv|json");
    auto* self = app.add_subcommand("selftest", "run the built-in example suite");
    (void)self;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig rc;
        rc.out_dir = out_dir;
        rc.threads = threads;
        rc.seed_override = seed;
        rc.mass_tol = tol;

        if (app.got_subcommand("run")) {
            std::ifstream f(scenario_path);
            if (!f) {
                std::fprintf(stderr, "cannot open scenario %s\n", scenario_path.c_str());
                return 2;
            }
            std::stringstream ss;
            ss << f.rdbuf();
            Scenario s = scenario_from_json(ss.str());
            RunOutputs outs = run_scenario(s, rc);
            for (const auto& row : outs.domination)
                if (!row.ok) {
                    std::fprintf(stderr,
                                 "classical bound violated: gap=%.17g bound=%.17g (a=%g seed=%ld)\n",
                                 row.gap, row.classical + row.residual, row.a, row.seed);
                    return 1;
                }
            if (outs.sandwich_violations > 0) {
                std::fprintf(stderr, "%d sandwich violations\n", outs.sandwich_violations);
                return 1;
            }
            std::printf("%s: %zu records, %zu reports -> %s\n", s.name.c_str(),
                        outs.records.size(), outs.reports.size(), out_dir.c_str());
            return 0;
        }
        if (app.got_subcommand("sweep")) {
            namespace fs = std::filesystem;
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(sweep_dir))
                if (e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& path : files) {
                std::ifstream f(path);
                std::stringstream ss;
                ss << f.rdbuf();
                Scenario s = scenario_from_json(ss.str());
                RunConfig sub = rc;
                sub.out_dir = fs::path(out_dir) / path.stem();
                RunOutputs outs = run_scenario(s, sub);
                std::printf("%s: %zu records, %zu reports\n", s.name.c_str(),
                            outs.records.size(), outs.reports.size());
                if (outs.sandwich_violations > 0) return 1;
            }
            return 0;
        }
        if (app.got_subcommand("report")) {
            std::ifstream f(results_path);
            if (!f) {
                std::fprintf(stderr, "cannot open results %s\n", results_path.c_str());
                return 2;
            }
            std::string header;
            std::getline(f, header);
            if (format == "csv") {
                std::printf("%s\n", header.c_str());
                std::string line;
                while (std::getline(f, line)) std::printf("%s\n", line.c_str());
                return 0;
            }
            if (format != "json") {
                std::fprintf(stderr, "unknown format %s\n", format.c_str());
                return 2;
            }
            std::vector<std::string> cols;
            std::stringstream hs(header);
            std::string tok;
            while (std::getline(hs, tok, ',')) cols.push_back(tok);
            ojson arr = ojson::array();
            std::string line;
            while (std::getline(f, line)) {
                std::stringstream ls(line);
                ojson row;
                for (const auto& c : cols) {
                    if (!std::getline(ls, tok, ',')) break;
                    try {
                        row[c] = std::stod(tok);
                    } catch (...) {
                        row[c] = tok;
                    }
                }
                arr.push_back(row);
            }
            std::printf("%s\n", arr.dump(2).c_str());
            return 0;
        }
        if (app.got_subcommand("selftest")) {
            auto failures = selftest();
            if (failures.empty()) {
                std::printf("selftest: all checks passed\n");
                return 0;
            }
            for (const auto& name : failures)
                std::fprintf(stderr, "selftest failure: %s\n", name.c_str());
            return 1;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace ma
