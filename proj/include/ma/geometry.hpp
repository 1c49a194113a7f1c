#pragma once

#include <memory>
#include <vector>

#include "ma/power_cells.hpp"

namespace ma {

// Planar node set inside a convex polygonal domain.
struct NodeSet {
    std::vector<Vec2> points;
    std::vector<char> boundary;  // per-node flag: lies on the domain boundary
    std::vector<Vec2> domain;    // convex polygon, CCW

    int size() const { return (int)points.size(); }
    std::vector<int> interior_indices() const;
    std::vector<int> boundary_indices() const;
    double diameter() const { return polygon_diameter(domain); }
    double inradius() const;

    // Checks the structural invariants: points inside the closed domain,
    // boundary-flagged points on the boundary, no duplicates within 1e-12.
    void validate() const;
};

struct SubdifferentialCell {
    int node_index = -1;
    std::vector<Vec2> gradient_polygon;  // CCW, empty if the node is inactive
    double area = 0.0;
};

struct Facet {
    std::vector<int> node_ids;  // >= 3; more when cofacial facets merge
    Vec2 gradient;
};

// PL convex function given by the lower convex hull of lifted nodes.
// Values are hull-canonical: a node strictly above the hull keeps the hull
// value for evaluation (its raw input value remains accessible).
class PLConvexFunction {
  public:
    PLConvexFunction() = default;
    PLConvexFunction(std::shared_ptr<const NodeSet> nodes, std::vector<double> raw_values);

    const NodeSet& nodes() const { return *nodes_; }
    const std::shared_ptr<const NodeSet>& nodes_ptr() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& raw_values() const { return raw_; }
    double value(int i) const { return values_[i]; }
    bool active(int i) const { return active_[i] != 0; }

    double eval(Vec2 x) const;  // hull function, x in the domain
    SubdifferentialCell subdifferential(int i) const;
    std::vector<Vec2> gradient_image() const;  // CCW hull of facet gradients
    std::vector<Facet> facets(double coplanar_tol = 1e-10) const;

    const PowerCellComplex& cells() const { return *complex_; }

    // Internal: adopt an already-built complex (used by the solver).
    static PLConvexFunction adopt(std::shared_ptr<const NodeSet> nodes,
                                  std::shared_ptr<PowerCellComplex> complex,
                                  std::vector<double> raw_values);

  private:
    std::shared_ptr<const NodeSet> nodes_;
    std::shared_ptr<PowerCellComplex> complex_;
    std::vector<double> values_;
    std::vector<double> raw_;
    std::vector<char> active_;
    void canonicalize();
};

// The PL convex interpolant of nodal data (graph = lower hull of lifted
// points). Throws DegenerateInput when all points are collinear.
PLConvexFunction lower_hull(std::shared_ptr<const NodeSet> nodes, std::vector<double> values);

// Largest convex function below the nodal data; equal to lower_hull with the
// contact set exposed through active()/values().
PLConvexFunction convex_envelope(std::shared_ptr<const NodeSet> nodes, std::vector<double> values);

// f*(p) = max_i (p.x_i - u_i) sampled on slope_nodes.
PLConvexFunction legendre_transform(const PLConvexFunction& f,
                                    std::shared_ptr<const NodeSet> slope_nodes);

}  // namespace ma
