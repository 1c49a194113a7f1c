#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "ma/estimates.hpp"
#include "ma/radial.hpp"

namespace ma {

// --- node set builders ---

std::shared_ptr<NodeSet> square_grid(double half, int side);
// inscribed polygon with boundary_count vertices + interior lattice
std::shared_ptr<NodeSet> disk_mesh(double radius, int boundary_count, int lattice_side);
// concentric-ring mesh with a radially graded spacing: h_fine inside
// [fine_lo, fine_hi], h_coarse elsewhere
std::shared_ptr<NodeSet> radial_graded_disk(double radius, int boundary_count, double h_coarse,
                                            double fine_lo, double fine_hi, double h_fine);

// --- backgrounds ---

struct Background {
    std::string kind;  // quadratic | anisotropic-quadratic | custom-density
    double lambda_min = 1.0;
    std::array<double, 3> hessian{1.0, 0.0, 1.0};  // at the origin, for diagnostics
    std::function<double(Vec2)> phi;               // exact graph when available
    std::function<double(Vec2)> density;           // det D^2 phi
};
Background make_background(const std::string& kind);
PLConvexFunction background_function(const Background& bg, std::shared_ptr<const NodeSet> nodes,
                                     const SolverConfig& cfg);

// --- scenarios ---

struct Scenario {
    std::string name;
    int n = 2;
    std::string background = "quadratic";
    std::string domain_type = "disk";  // disk | square | ball
    double radius = 1.0;
    int boundary_nodes = 256;
    int interior = 65;  // lattice side
    std::string perturbation = "singularity";  // singularity | obstacle |
                                               // random-admissible | multi-dirac
    std::vector<double> a_ladder;
    std::vector<long> seeds{1};
    double extended_factor = 1.5;  // dilation used for strictly-interior setups

    void validate() const;
};

Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);

struct DominationRow {
    double a = 0.0;
    long seed = 0;
    double gap = 0.0;        // max_i |u_i - phi_i|
    double classical = 0.0;  // Eq-classical bound
    double residual = 0.0;
    bool ok = false;
};

struct RunOutputs {
    std::vector<AsymptoticRecord> records;
    std::vector<ExtremalReport> reports;
    std::vector<DominationRow> domination;
    std::vector<std::string> coincidence_json;
    int sandwich_violations = 0;
};

struct RunConfig {
    std::filesystem::path out_dir;
    int threads = 1;
    long seed_override = -1;  // < 0: use scenario seeds
    double mass_tol = 1e-8;
    bool write_files = true;
};

RunOutputs run_scenario(const Scenario& s, const RunConfig& rc);

// --- rate fitting ---

struct RateFit {
    double exponent = 0.0;      // slope of log(gap) vs log(a), log factor deflated
    bool log_correction = false;  // rss_log < rss_plain
    double rss_plain = 0.0;     // residuals of gap = C a^2
    double rss_log = 0.0;       // residuals of gap = C a^2 |log a|
};

RateFit rate_fit(const std::vector<AsymptoticRecord>& records);

// random admissible perturbation: nonnegative (or nonpositive) bump of total
// variation exactly omega_n a^n supported on deep-interior nodes
SignedDiscreteMeasure random_admissible_bump(const PLConvexFunction& phi,
                                             const SignedDiscreteMeasure& background,
                                             double budget, bool negative, std::mt19937_64& rng);

std::string reports_csv(const std::vector<ExtremalReport>& reports);

// trivial example suite for `ma-cli selftest`; returns failing check names
std::vector<std::string> selftest();

int cli(int argc, char** argv);

}  // namespace ma
