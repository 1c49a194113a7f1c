#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "ma/geometry.hpp"

namespace ma {

namespace {
constexpr double kDupTol = 1e-12;
}

std::vector<int> NodeSet::interior_indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (!boundary[i]) out.push_back(i);
    return out;
}

std::vector<int> NodeSet::boundary_indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (boundary[i]) out.push_back(i);
    return out;
}

double NodeSet::inradius() const {
    // radius of the largest ball centred at the domain centroid estimate
    Vec2 c{0, 0};
    for (const Vec2& v : domain) c = c + v;
    c = c * (1.0 / double(domain.size()));
    return dist_to_boundary(domain, c);
}

void NodeSet::validate() const {
    if (domain.size() < 3) throw DegenerateInput("NodeSet: domain polygon needs >= 3 vertices");
    if (polygon_area(domain) <= 0) throw DegenerateInput("NodeSet: domain must be CCW with positive area");
    if (boundary.size() != points.size())
        throw DegenerateInput("NodeSet: boundary flag count mismatch");
    const double scale = polygon_diameter(domain);
    for (int i = 0; i < size(); ++i) {
        if (!point_in_convex(domain, points[i], 1e-9 * scale))
            throw DegenerateInput("NodeSet: point outside domain");
        if (boundary[i] && dist_to_boundary(domain, points[i]) > 1e-9 * scale)
            throw DegenerateInput("NodeSet: boundary-flagged point off the boundary");
    }
    // duplicate detection on a sorted copy
    std::vector<int> idx(points.size());
    for (int i = 0; i < size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return points[a].x < points[b].x || (points[a].x == points[b].x && points[a].y < points[b].y);
    });
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        for (std::size_t l = k + 1; l < idx.size(); ++l) {
            if (points[idx[l]].x - points[idx[k]].x > kDupTol) break;
            if ((points[idx[k]] - points[idx[l]]).norm() <= kDupTol)
                throw DegenerateInput("NodeSet: duplicate points");
        }
    }
}

namespace {

bool all_collinear(const std::vector<Vec2>& pts) {
    if (pts.size() < 3) return true;
    Vec2 a = pts[0];
    for (std::size_t j = 1; j < pts.size(); ++j) {
        Vec2 d = pts[j] - a;
        if (d.norm2() < 1e-28) continue;
        for (std::size_t k = j + 1; k < pts.size(); ++k)
            if (std::abs(d.cross(pts[k] - a)) > 1e-14 * d.norm() * (pts[k] - a).norm())
                return false;
        return true;
    }
    return true;
}

}  // namespace

PLConvexFunction::PLConvexFunction(std::shared_ptr<const NodeSet> nodes,
                                   std::vector<double> raw_values) {
    if (!nodes) throw DegenerateInput("PLConvexFunction: null node set");
    if ((int)raw_values.size() != nodes->size())
        throw DegenerateInput("PLConvexFunction: value count mismatch");
    if (all_collinear(nodes->points)) throw DegenerateInput("PLConvexFunction: collinear nodes");
    nodes_ = std::move(nodes);
    raw_ = raw_values;
    auto cx = std::make_shared<PowerCellComplex>(
        nodes_->points, std::vector<char>(nodes_->boundary.begin(), nodes_->boundary.end()));
    cx->set_values(std::move(raw_values));
    complex_ = std::move(cx);
    canonicalize();
}

PLConvexFunction PLConvexFunction::adopt(std::shared_ptr<const NodeSet> nodes,
                                         std::shared_ptr<PowerCellComplex> complex,
                                         std::vector<double> raw_values) {
    PLConvexFunction f;
    f.nodes_ = std::move(nodes);
    f.complex_ = std::move(complex);
    f.raw_ = std::move(raw_values);
    f.canonicalize();
    return f;
}

void PLConvexFunction::canonicalize() {
    const int n = nodes_->size();
    values_.resize(n);
    active_.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        active_[i] = complex_->active(i) ? 1 : 0;
        values_[i] = complex_->value(i);
    }
    // nodes above the hull evaluate to the hull value
    for (int i = 0; i < n; ++i)
        if (!active_[i]) values_[i] = std::min(values_[i], complex_->hull_value(nodes_->points[i]));
}

double PLConvexFunction::eval(Vec2 x) const { return complex_->hull_value(x); }

SubdifferentialCell PLConvexFunction::subdifferential(int i) const {
    SubdifferentialCell s;
    s.node_index = i;
    if (!active_[i]) return s;
    if (nodes_->boundary[i]) {
        auto hull = complex_->gradient_hull();
        ConvexPolygon c = complex_->cell(i);
        clip_to_ccw_polygon(c, hull, complex_->geometry_eps());
        s.gradient_polygon = c.vertices();
        s.area = c.area();
        return s;
    }
    s.gradient_polygon = complex_->cell(i).vertices();
    s.area = complex_->cell_area(i);
    return s;
}

std::vector<Vec2> PLConvexFunction::gradient_image() const { return complex_->gradient_hull(); }

std::vector<Facet> PLConvexFunction::facets(double coplanar_tol) const {
    // Facets correspond to cell vertices where site constraints meet; a
    // vertex shared by 4+ cells is one merged cofacial facet. Vertices are
    // bucketed by gradient within coplanar_tol of slope.
    struct Key {
        long long qx, qy;
        bool operator<(const Key& o) const { return qx < o.qx || (qx == o.qx && qy < o.qy); }
    };
    const double q = std::max(coplanar_tol, 1e-14);
    std::map<Key, Facet> acc;
    const int n = nodes_->size();
    for (int i = 0; i < n; ++i) {
        if (!active_[i]) continue;
        const ConvexPolygon& c = complex_->cell(i);
        const std::size_t m = c.size();
        for (std::size_t k = 0; k < m; ++k) {
            int e_prev = c.edge_origins()[(k + m - 1) % m];
            int e_next = c.edge_origins()[k];
            if (e_prev < 0 || e_next < 0) continue;
            Vec2 g = c.vertices()[k];
            Key key{(long long)std::llround(g.x / q), (long long)std::llround(g.y / q)};
            Facet& f = acc[key];
            if (f.node_ids.empty()) f.gradient = g;
            f.node_ids.push_back(i);
        }
    }
    std::vector<Facet> out;
    out.reserve(acc.size());
    for (auto& [key, f] : acc) {
        std::sort(f.node_ids.begin(), f.node_ids.end());
        f.node_ids.erase(std::unique(f.node_ids.begin(), f.node_ids.end()), f.node_ids.end());
        if (f.node_ids.size() >= 3) out.push_back(std::move(f));
    }
    return out;
}

PLConvexFunction lower_hull(std::shared_ptr<const NodeSet> nodes, std::vector<double> values) {
    return PLConvexFunction(std::move(nodes), std::move(values));
}

PLConvexFunction convex_envelope(std::shared_ptr<const NodeSet> nodes,
                                 std::vector<double> values) {
    return PLConvexFunction(std::move(nodes), std::move(values));
}

PLConvexFunction legendre_transform(const PLConvexFunction& f,
                                    std::shared_ptr<const NodeSet> slope_nodes) {
    const auto& xs = f.nodes().points;
    const auto& vals = f.values();
    std::vector<double> star(slope_nodes->size());
    for (int k = 0; k < slope_nodes->size(); ++k) {
        const Vec2 p = slope_nodes->points[k];
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < xs.size(); ++i) m = std::max(m, p.dot(xs[i]) - vals[i]);
        star[k] = m;
    }
    return PLConvexFunction(std::move(slope_nodes), std::move(star));
}

}  // namespace ma
