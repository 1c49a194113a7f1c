#pragma once

#include <optional>
#include <vector>

#include "ma/common.hpp"

namespace ma {

// Half-plane {p : n.p <= c}. `origin` tags which constraint produced it
// (node index for cell constraints, negative ids for clip-box sides).
struct HalfPlane {
    Vec2 n;
    double c = 0.0;
    int origin = -1;
};

// Convex polygon, CCW vertex order. edge k joins v[k] -> v[k+1] and carries
// the origin tag of the half-plane whose boundary supports it.
class ConvexPolygon {
  public:
    ConvexPolygon() = default;
    static ConvexPolygon box(Vec2 lo, Vec2 hi);
    static ConvexPolygon from_ccw(std::vector<Vec2> vertices, int edge_origin = -1);

    bool empty() const { return verts_.size() < 3; }
    std::size_t size() const { return verts_.size(); }
    const std::vector<Vec2>& vertices() const { return verts_; }
    const std::vector<int>& edge_origins() const { return origins_; }

    double area() const;
    Vec2 centroid() const;  // area centroid; vertex mean if degenerate

    // Clips in place. Returns true if anything was cut off.
    bool clip(const HalfPlane& h, double eps);

    // max over vertices of n.p (support function); -inf if empty
    double support(Vec2 n) const;
    bool contains(Vec2 p, double eps) const;

    // total length of edges whose origin tag equals `origin`
    double edge_length(int origin) const;

  private:
    std::vector<Vec2> verts_;
    std::vector<int> origins_;
};

// Convex hull of a planar point set (Andrew monotone chain), CCW.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

// Clips c to a CCW convex polygon (normalized edge planes; a degenerate
// polygon empties c).
void clip_to_ccw_polygon(ConvexPolygon& c, const std::vector<Vec2>& hull_ccw, double eps);

double polygon_area(const std::vector<Vec2>& ccw);

// Signed distance-ish test: is p inside the CCW convex polygon within eps?
bool point_in_convex(const std::vector<Vec2>& ccw, Vec2 p, double eps);

// Distance from p to the boundary of the CCW convex polygon.
double dist_to_boundary(const std::vector<Vec2>& ccw, Vec2 p);

double polygon_diameter(const std::vector<Vec2>& pts);

}  // namespace ma
