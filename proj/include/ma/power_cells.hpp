#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ma/polygon.hpp"

namespace ma {

namespace detail {
class BucketGrid;
}

// Subdifferential-cell complex of the lower convex hull of lifted sites
// (x_i, v_i). Cell i is the polygon of slopes p where the score
// s_i(p) = p.x_i - v_i beats every other site; equivalently the
// subdifferential of the PL convex interpolant at node i. The cells tile
// slope space (a power diagram), which the incremental update below relies
// on: lowering one value v_i grows cell i and can only shrink the cells it
// floods into.
class PowerCellComplex {
  public:
    PowerCellComplex(std::vector<Vec2> sites, std::vector<char> is_boundary);
    PowerCellComplex(const PowerCellComplex&);
    PowerCellComplex& operator=(const PowerCellComplex&);
    PowerCellComplex(PowerCellComplex&&) noexcept = default;
    PowerCellComplex& operator=(PowerCellComplex&&) noexcept = default;
    ~PowerCellComplex();

    // Rebuild from scratch. full_verify = true checks every cell against
    // every constraint (sound); false trusts near-neighbour candidates plus
    // the previous adjacency (fast inner-loop mode). allow_box_growth lets
    // the clip box adapt to the values; trial evaluations freeze it so a
    // rejected trial cannot leak state.
    void set_values(std::vector<double> values, bool full_verify = true,
                    bool allow_box_growth = true);

    int size() const { return (int)sites_.size(); }
    const std::vector<Vec2>& sites() const { return sites_; }
    const std::vector<double>& values() const { return vals_; }
    double value(int i) const { return vals_[i]; }
    bool boundary(int i) const { return bnd_[i] != 0; }

    bool active(int i) const { return !cells_[i].empty(); }
    const ConvexPolygon& cell(int i) const { return cells_[i]; }
    double cell_area(int i) const { return areas_[i]; }

    // Evaluation of the hull (the PL convex interpolant) at x; valid for x
    // in the convex hull of the sites. Returns the owning node as well.
    double hull_value(Vec2 x, int* owner = nullptr) const;

    struct Trial {
        double area = 0.0;
        double newton_slope = 0.0;  // d(area)/d(-v): sum of edge_len/dist
        ConvexPolygon cell;
    };
    // Cell of node i if its value were lowered to v; nothing is mutated.
    Trial trial_lower(int i, double v) const;

    // Commits v (must be <= vals_[i]); returns the nodes whose cells changed
    // (not including i). Cell areas are kept current.
    std::vector<int> lower(int i, double v);

    // Gradients of all hull facets (the "real" cell vertices, where two
    // site constraints meet). Cofacial duplicates are harmless here.
    std::vector<Vec2> facet_gradients() const;
    // CCW convex hull of the facet gradients = closure of the gradient image.
    std::vector<Vec2> gradient_hull() const;

    // Cell area clipped to a CCW convex polygon in slope space.
    double cell_area_clipped(int i, const std::vector<Vec2>& hull_ccw) const;

    double geometry_eps() const { return eps_; }
    double box_halfwidth() const { return box_; }
    // Enlarges the clip box to at least `half` and rebuilds if needed.
    void ensure_box(double half);

  private:
    std::vector<Vec2> sites_;
    std::vector<double> vals_;
    std::vector<char> bnd_;
    std::vector<ConvexPolygon> cells_;
    std::vector<double> areas_;
    double box_ = 0.0;
    double eps_ = 1e-13;
    std::unique_ptr<detail::BucketGrid> grid_;

    mutable std::vector<std::uint32_t> mark_;
    mutable std::uint32_t epoch_ = 0;

    void rebuild_all(bool full_verify = true, bool allow_box_growth = true);
    ConvexPolygon build_cell(int i, double vi, bool full_verify,
                             const std::vector<int>* extra_candidates) const;
    double required_box() const;
    // All active cells cut or touched by the constraint of site i at value
    // v, found by flooding the diagram; sorted ascending.
    void flood_damaged(int i, double v, std::vector<int>& out) const;
    int locate_seed(int i, double v) const;
    int nearest_active(Vec2 x) const;
    HalfPlane constraint(int owner, int other, double v_owner) const;
    std::uint32_t fresh_epoch() const;
};

}  // namespace ma
