#include "ma/polygon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "geometry_internal.hpp"

namespace ma {

double unit_ball_volume(int n) {
    if (n < 1) throw DimensionTooLow("unit_ball_volume: n must be >= 1");
    return std::pow(std::acos(-1.0), 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

ConvexPolygon ConvexPolygon::box(Vec2 lo, Vec2 hi) {
    ConvexPolygon p;
    p.verts_ = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
    // box sides get reserved negative origins -2..-5 (-1 means "unknown")
    p.origins_ = {-2, -3, -4, -5};
    return p;
}

ConvexPolygon ConvexPolygon::from_ccw(std::vector<Vec2> vertices, int edge_origin) {
    ConvexPolygon p;
    p.origins_.assign(vertices.size(), edge_origin);
    p.verts_ = std::move(vertices);
    return p;
}

double ConvexPolygon::area() const {
    if (verts_.size() < 3) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < verts_.size(); ++k) {
        const Vec2& a = verts_[k];
        const Vec2& b = verts_[(k + 1) % verts_.size()];
        s += a.cross(b);
    }
    return 0.5 * s;
}

Vec2 ConvexPolygon::centroid() const {
    if (verts_.empty()) return {};
    double a2 = 0.0;
    Vec2 c{0, 0};
    for (std::size_t k = 0; k < verts_.size(); ++k) {
        const Vec2& p = verts_[k];
        const Vec2& q = verts_[(k + 1) % verts_.size()];
        double w = p.cross(q);
        a2 += w;
        c = c + (p + q) * w;
    }
    if (std::abs(a2) < 1e-300) {
        Vec2 m{0, 0};
        for (const Vec2& v : verts_) m = m + v;
        return m * (1.0 / double(verts_.size()));
    }
    return c * (1.0 / (3.0 * a2));
}

bool ConvexPolygon::clip(const HalfPlane& h, double eps) {
    const std::size_t m = verts_.size();
    if (m == 0) return false;
    bool any_out = false, any_strictly_in = false;
    static thread_local std::vector<double> d;
    d.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        d[k] = h.n.dot(verts_[k]) - h.c;
        if (d[k] > eps) any_out = true;
        if (d[k] < -eps) any_strictly_in = true;
    }
    if (!any_out) return false;
    if (!any_strictly_in) {
        verts_.clear();
        origins_.clear();
        return true;
    }
    static thread_local std::vector<Vec2> nv;
    static thread_local std::vector<int> no;
    nv.clear();
    no.clear();
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t k1 = (k + 1) % m;
        const Vec2& a = verts_[k];
        const Vec2& b = verts_[k1];
        double da = d[k], db = d[k1];
        bool ain = da <= eps, bin = db <= eps;
        if (ain) {
            nv.push_back(a);
            no.push_back(origins_[k]);
            if (!bin) {
                double t = da / (da - db);  // da<=eps<db so denominator > 0
                nv.push_back(a + (b - a) * t);
                no.push_back(h.origin);
            }
        } else if (bin) {
            double t = da / (da - db);
            nv.push_back(a + (b - a) * t);
            no.push_back(origins_[k]);
        }
    }
    // drop duplicate consecutive vertices (degenerate crossings)
    verts_.clear();
    origins_.clear();
    const double eps2 = eps * eps;
    for (std::size_t k = 0; k < nv.size(); ++k) {
        std::size_t k1 = (k + 1) % nv.size();
        if ((nv[k] - nv[k1]).norm2() <= eps2) continue;
        verts_.push_back(nv[k]);
        origins_.push_back(no[k]);
    }
    if (verts_.size() < 3) {
        verts_.clear();
        origins_.clear();
    }
    return true;
}

double ConvexPolygon::support(Vec2 n) const {
    double s = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : verts_) s = std::max(s, n.dot(v));
    return s;
}

bool ConvexPolygon::contains(Vec2 p, double eps) const {
    if (verts_.size() < 3) return false;
    for (std::size_t k = 0; k < verts_.size(); ++k) {
        const Vec2& a = verts_[k];
        const Vec2& b = verts_[(k + 1) % verts_.size()];
        if ((b - a).cross(p - a) < -eps) return false;
    }
    return true;
}

double ConvexPolygon::edge_length(int origin) const {
    double s = 0.0;
    for (std::size_t k = 0; k < verts_.size(); ++k) {
        if (origins_[k] != origin) continue;
        s += (verts_[(k + 1) % verts_.size()] - verts_[k]).norm();
    }
    return s;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Vec2> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

double polygon_area(const std::vector<Vec2>& ccw) {
    double s = 0.0;
    for (std::size_t k = 0; k < ccw.size(); ++k)
        s += ccw[k].cross(ccw[(k + 1) % ccw.size()]);
    return 0.5 * s;
}

bool point_in_convex(const std::vector<Vec2>& ccw, Vec2 p, double eps) {
    if (ccw.size() < 3) return false;
    for (std::size_t k = 0; k < ccw.size(); ++k) {
        const Vec2& a = ccw[k];
        const Vec2& b = ccw[(k + 1) % ccw.size()];
        if ((b - a).cross(p - a) < -eps) return false;
    }
    return true;
}

double dist_to_boundary(const std::vector<Vec2>& ccw, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ccw.size(); ++k) {
        const Vec2& a = ccw[k];
        const Vec2& b = ccw[(k + 1) % ccw.size()];
        Vec2 ab = b - a;
        double t = std::clamp((p - a).dot(ab) / std::max(ab.norm2(), 1e-300), 0.0, 1.0);
        best = std::min(best, (p - (a + ab * t)).norm());
    }
    return best;
}

double polygon_diameter(const std::vector<Vec2>& pts) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            d2 = std::max(d2, (pts[i] - pts[j]).norm2());
    return std::sqrt(d2);
}

namespace detail {

BucketGrid::BucketGrid(const std::vector<Vec2>& pts) : pts_(pts) {
    lo_ = {1e300, 1e300};
    hi_ = {-1e300, -1e300};
    for (const Vec2& p : pts) {
        lo_.x = std::min(lo_.x, p.x);
        lo_.y = std::min(lo_.y, p.y);
        hi_.x = std::max(hi_.x, p.x);
        hi_.y = std::max(hi_.y, p.y);
    }
    if (pts.empty()) {
        lo_ = {0, 0};
        hi_ = {1, 1};
    }
    side_ = std::max(1, (int)std::floor(std::sqrt((double)pts.size() / 2.0)));
    double w = std::max({hi_.x - lo_.x, hi_.y - lo_.y, 1e-12});
    cell_ = w / side_ * (1.0 + 1e-12);
    buckets_.assign((std::size_t)side_ * side_, {});
    for (int i = 0; i < (int)pts.size(); ++i) buckets_[bucket_of(pts[i])].push_back(i);
}

int BucketGrid::bucket_of(Vec2 p) const {
    int bx = std::clamp((int)((p.x - lo_.x) / cell_), 0, side_ - 1);
    int by = std::clamp((int)((p.y - lo_.y) / cell_), 0, side_ - 1);
    return by * side_ + bx;
}

void BucketGrid::collect_ring(int i, int ring, std::vector<int>& out) const {
    Vec2 p = pts_[i];
    int bx = std::clamp((int)((p.x - lo_.x) / cell_), 0, side_ - 1);
    int by = std::clamp((int)((p.y - lo_.y) / cell_), 0, side_ - 1);
    auto visit = [&](int cx, int cy) {
        if (cx < 0 || cy < 0 || cx >= side_ || cy >= side_) return;
        for (int j : buckets_[(std::size_t)cy * side_ + cx])
            if (j != i) out.push_back(j);
    };
    if (ring == 0) {
        visit(bx, by);
        return;
    }
    for (int cx = bx - ring; cx <= bx + ring; ++cx) {
        visit(cx, by - ring);
        visit(cx, by + ring);
    }
    for (int cy = by - ring + 1; cy <= by + ring - 1; ++cy) {
        visit(bx - ring, cy);
        visit(bx + ring, cy);
    }
}

int BucketGrid::nearest(Vec2 q, int exclude) const {
    int best = -1;
    double bd = 1e300;
    std::vector<int> cand;
    int bx = std::clamp((int)((q.x - lo_.x) / cell_), 0, side_ - 1);
    int by = std::clamp((int)((q.y - lo_.y) / cell_), 0, side_ - 1);
    for (int ring = 0; ring < side_ + 1; ++ring) {
        cand.clear();
        int lo = std::max({bx - ring, by - ring, 0});
        (void)lo;
        for (int cx = bx - ring; cx <= bx + ring; ++cx)
            for (int cy = by - ring; cy <= by + ring; ++cy) {
                if (std::max(std::abs(cx - bx), std::abs(cy - by)) != ring) continue;
                if (cx < 0 || cy < 0 || cx >= side_ || cy >= side_) continue;
                for (int j : buckets_[(std::size_t)cy * side_ + cx]) cand.push_back(j);
            }
        for (int j : cand) {
            if (j == exclude) continue;
            double d = (pts_[j] - q).norm2();
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        if (best >= 0 && bd <= (double)ring * ring * cell_ * cell_) break;
    }
    return best;
}

}  // namespace detail

}  // namespace ma
