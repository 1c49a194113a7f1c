#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "ma/geometry.hpp"

namespace ma {

// Finitely many signed atoms at node positions. Atoms are kept sorted by
// node index, at most one per node, weights below 1e-14 pruned.
class SignedDiscreteMeasure {
  public:
    static constexpr double kPruneTol = 1e-14;

    SignedDiscreteMeasure() = default;
    explicit SignedDiscreteMeasure(std::vector<std::pair<int, double>> atoms);

    const std::vector<std::pair<int, double>>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }
    double at(int node) const;
    double total_variation() const;
    double total() const;

    SignedDiscreteMeasure scaled(double s) const;
    SignedDiscreteMeasure restricted_to(const std::vector<char>& keep) const;

    friend SignedDiscreteMeasure operator+(const SignedDiscreteMeasure&,
                                           const SignedDiscreteMeasure&);
    friend SignedDiscreteMeasure operator-(const SignedDiscreteMeasure&,
                                           const SignedDiscreteMeasure&);

  private:
    std::vector<std::pair<int, double>> atoms_;
};

// mu = mu_plus - mu_minus with disjoint supports, both nonnegative.
std::pair<SignedDiscreteMeasure, SignedDiscreteMeasure> jordan_decompose(
    const SignedDiscreteMeasure& mu);

// a with omega_n a^n = |mu|(Omega).
struct MassScale {
    double a = 0.0;
    int n = 2;
    double budget() const;  // omega_n a^n
};

MassScale mass_scale(const SignedDiscreteMeasure& mu, int n);
MassScale mass_scale_from_total(double total_variation, int n);

// Monge-Ampere measure of a PL convex function: atom at node i = area of its
// subdifferential cell; boundary-node cells are clipped to the gradient hull.
SignedDiscreteMeasure ma_measure(const PLConvexFunction& f);

// Nodal discretization of a density: atom i = density(centroid) * area of
// the node's Voronoi cell clipped to the domain. Throws NonPositiveDensity
// when a sampled value is <= 0.
SignedDiscreteMeasure assemble_background(const std::function<double(Vec2)>& density,
                                          const NodeSet& nodes);

}  // namespace ma
