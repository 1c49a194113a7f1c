#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ma/measures.hpp"

namespace ma {

// Dirichlet problem: M u = target in the interior, u = boundary_values on
// the boundary nodes. The target must be nonnegative and supported on
// interior nodes.
struct DirichletProblem {
    std::shared_ptr<const NodeSet> nodes;
    std::vector<double> boundary_values;  // full length; interior entries ignored
    SignedDiscreteMeasure target;
};

struct SolverConfig {
    double mass_tol = 1e-8;  // per-node relative mass tolerance
    int max_iters = 200;     // budget of monotone sweeps (max_iters * N nodal updates)
    double damping = 1.0;    // Newton step scale in (0, 1]
};

struct SolveResult {
    PLConvexFunction u;
    double residual = 0.0;  // total-variation mass residual at exit
    long iters = 0;         // nodal updates performed
};

// Monotone lowering iteration from the boundary-data convex envelope.
SolveResult solve_dirichlet(const DirichletProblem& problem, const SolverConfig& cfg);

// Variant with a per-node lower barrier (used by the obstacle module):
// nodal updates are clipped at floor_values; nodes that land on the floor
// are reported in pinned (mass <= target there instead of equality).
SolveResult solve_dirichlet_floored(const DirichletProblem& problem, const SolverConfig& cfg,
                                    const std::vector<double>& floor_values,
                                    std::vector<char>& pinned);

// Convex cone: M w = omega_n delta_y, w = 0 on the boundary.
SolveResult cone_function(std::shared_ptr<const NodeSet> nodes, int y_node,
                          const SolverConfig& cfg);

// Isolated singularity problem: M u = M phi + omega_n a^n delta_y, u = phi
// on the boundary.
SolveResult isolated_singularity(const PLConvexFunction& phi, int y_node, const MassScale& a,
                                 const SolverConfig& cfg);

}  // namespace ma
