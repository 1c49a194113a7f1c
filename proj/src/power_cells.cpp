#include "ma/power_cells.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geometry_internal.hpp"

namespace ma {

PowerCellComplex::PowerCellComplex(std::vector<Vec2> sites, std::vector<char> is_boundary)
    : sites_(std::move(sites)), bnd_(std::move(is_boundary)) {
    if (sites_.size() < 3) throw DegenerateInput("PowerCellComplex: need at least 3 sites");
    if (bnd_.size() != sites_.size())
        throw DegenerateInput("PowerCellComplex: boundary flag count mismatch");
    cells_.resize(sites_.size());
    areas_.assign(sites_.size(), 0.0);
    mark_.assign(sites_.size(), 0);
    grid_ = std::make_unique<detail::BucketGrid>(sites_);
}

PowerCellComplex::~PowerCellComplex() = default;

PowerCellComplex::PowerCellComplex(const PowerCellComplex& o)
    : sites_(o.sites_),
      vals_(o.vals_),
      bnd_(o.bnd_),
      cells_(o.cells_),
      areas_(o.areas_),
      box_(o.box_),
      eps_(o.eps_),
      mark_(o.mark_),
      epoch_(o.epoch_) {
    grid_ = std::make_unique<detail::BucketGrid>(sites_);
}

PowerCellComplex& PowerCellComplex::operator=(const PowerCellComplex& o) {
    if (this == &o) return *this;
    sites_ = o.sites_;
    vals_ = o.vals_;
    bnd_ = o.bnd_;
    cells_ = o.cells_;
    areas_ = o.areas_;
    box_ = o.box_;
    eps_ = o.eps_;
    mark_ = o.mark_;
    epoch_ = o.epoch_;
    grid_ = std::make_unique<detail::BucketGrid>(sites_);
    return *this;
}

std::uint32_t PowerCellComplex::fresh_epoch() const {
    if (++epoch_ == 0) {
        std::fill(mark_.begin(), mark_.end(), 0);
        epoch_ = 1;
    }
    return epoch_;
}

HalfPlane PowerCellComplex::constraint(int owner, int other, double v_owner) const {
    return HalfPlane{sites_[other] - sites_[owner], vals_[other] - v_owner, other};
}

double PowerCellComplex::required_box() const {
    // Lipschitz estimate from near-neighbour divided differences plus a
    // coarse global slope; backstopped by the auto-grow in lower().
    double lip = 1.0;
    std::vector<int> cand;
    const int n = size();
    int stride = std::max(1, n / 512);
    for (int i = 0; i < n; i += stride) {
        cand.clear();
        for (int ring = 0; ring <= 1; ++ring) grid_->collect_ring(i, ring, cand);
        for (int j : cand) {
            double d = (sites_[j] - sites_[i]).norm();
            if (d > 1e-14) lip = std::max(lip, std::abs(vals_[j] - vals_[i]) / d);
        }
    }
    return 8.0 * lip + 8.0;
}

void PowerCellComplex::set_values(std::vector<double> values, bool full_verify,
                                  bool allow_box_growth) {
    if (values.size() != sites_.size())
        throw DegenerateInput("PowerCellComplex: value count mismatch");
    vals_ = std::move(values);
    if (allow_box_growth) box_ = std::max(box_, required_box());
    rebuild_all(full_verify, allow_box_growth);
}

void PowerCellComplex::ensure_box(double half) {
    if (half <= box_) return;
    box_ = half;
    if (!vals_.empty()) rebuild_all();
}

void PowerCellComplex::rebuild_all(bool full_verify, bool allow_box_growth) {
    const int n = size();
    std::vector<int> prev;
    for (int attempt = 0;; ++attempt) {
        eps_ = 1e-13 * std::max(1.0, box_);
        bool box_hit = false;
        for (int i = 0; i < n; ++i) {
            const std::vector<int>* extra = nullptr;
            if (!full_verify && !cells_[i].empty()) {
                prev.clear();
                for (int o : cells_[i].edge_origins())
                    if (o >= 0) prev.push_back(o);
                extra = &prev;
            }
            cells_[i] = build_cell(i, vals_[i], full_verify, extra);
            areas_[i] = cells_[i].area();
            if (!bnd_[i] && !cells_[i].empty()) {
                for (int o : cells_[i].edge_origins())
                    if (o <= -2) box_hit = true;
            }
        }
        if (!box_hit || !allow_box_growth || attempt >= 8) break;
        box_ *= 2.0;
    }
}

ConvexPolygon PowerCellComplex::build_cell(int i, double vi, bool full_verify,
                                           const std::vector<int>* extra_candidates) const {
    ConvexPolygon poly = ConvexPolygon::box({-box_, -box_}, {box_, box_});
    const Vec2 xi = sites_[i];
    // warm-up clips from near neighbours
    static thread_local std::vector<int> cand;
    cand.clear();
    int max_ring = full_verify ? 2 : 3;
    for (int ring = 0; ring <= max_ring && cand.size() < 48; ++ring)
        grid_->collect_ring(i, ring, cand);
    if (extra_candidates)
        cand.insert(cand.end(), extra_candidates->begin(), extra_candidates->end());
    for (int j : cand) {
        if (j == i) continue;
        poly.clip(HalfPlane{sites_[j] - xi, vals_[j] - vi, j}, eps_);
        if (poly.empty()) return poly;
    }
    if (!full_verify) return poly;
    // one sound verification pass: clipping only shrinks the polygon, so a
    // constraint checked against an earlier (larger) polygon stays satisfied
    const int n = size();
    double r2 = 0.0;
    for (const Vec2& p : poly.vertices()) r2 = std::max(r2, p.norm2());
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dv = vals_[j] - vi;
        const Vec2 d = sites_[j] - xi;
        const double d2 = d.norm2();
        if (dv >= 0.0 && dv * dv >= r2 * d2) continue;
        double m = -std::numeric_limits<double>::infinity();
        for (const Vec2& p : poly.vertices()) m = std::max(m, p.dot(d));
        if (m - dv > eps_ * (1.0 + std::abs(dv))) {
            poly.clip(HalfPlane{d, dv, j}, eps_);
            if (poly.empty()) return poly;
            r2 = 0.0;
            for (const Vec2& p : poly.vertices()) r2 = std::max(r2, p.norm2());
        }
    }
    return poly;
}

int PowerCellComplex::nearest_active(Vec2 x) const {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    // expanding rings over the bucket grid until an active site is found
    std::vector<int> cand;
    int probe = grid_->nearest(x);
    if (probe >= 0 && active(probe)) return probe;
    for (int i = 0; i < size(); ++i) {
        if (!active(i)) continue;
        double d = (sites_[i] - x).norm2();
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

double PowerCellComplex::hull_value(Vec2 x, int* owner) const {
    auto score = [&](int k) {
        double m = -std::numeric_limits<double>::infinity();
        const Vec2 dx = x - sites_[k];
        for (const Vec2& p : cells_[k].vertices()) m = std::max(m, p.dot(dx));
        return vals_[k] + m;
    };
    int k = nearest_active(x);
    if (k < 0) throw DegenerateInput("hull_value: no active cells");
    const std::uint32_t ep = fresh_epoch();
    mark_[k] = ep;
    double best = score(k);
    for (int steps = 0; steps < size(); ++steps) {
        int next = -1;
        double next_val = best;
        for (int o : cells_[k].edge_origins()) {
            if (o < 0 || mark_[o] == ep || !active(o)) continue;
            mark_[o] = ep;
            double s = score(o);
            if (s > next_val + 1e-15 * (1.0 + std::abs(next_val))) {
                next_val = s;
                next = o;
            }
        }
        if (next < 0) break;
        k = next;
        best = next_val;
    }
    if (owner) *owner = k;
    return best;
}

int PowerCellComplex::locate_seed(int i, double v) const {
    const Vec2 xi = sites_[i];
    auto phi = [&](int k) {
        double m = -std::numeric_limits<double>::infinity();
        const Vec2 d = xi - sites_[k];
        for (const Vec2& p : cells_[k].vertices()) m = std::max(m, p.dot(d));
        return m - (v - vals_[k]);
    };
    int k = nearest_active(xi);
    if (k < 0) return -1;
    const std::uint32_t ep = fresh_epoch();
    mark_[k] = ep;
    double best = phi(k);
    for (int steps = 0; steps < size(); ++steps) {
        if (best > eps_) return k;
        int next = -1;
        double next_val = best;
        for (int o : cells_[k].edge_origins()) {
            if (o < 0 || mark_[o] == ep || !active(o)) continue;
            mark_[o] = ep;
            double s = phi(o);
            if (s > next_val) {
                next_val = s;
                next = o;
            }
        }
        if (next < 0) break;
        k = next;
        best = next_val;
    }
    if (best > eps_) return k;
    // concavity says a local max is global; a degenerate plateau can still
    // stall the walk, so fall back to a full scan before giving up
    for (int j = 0; j < size(); ++j) {
        if (j == i || !active(j)) continue;
        if (phi(j) > eps_) return j;
    }
    return -1;
}

void PowerCellComplex::flood_damaged(int i, double v, std::vector<int>& out) const {
    out.clear();
    const Vec2 xi = sites_[i];
    // cut test: does the constraint of site i at value v reach cell j?
    auto touched = [&](int j) {
        const Vec2 d = xi - sites_[j];
        const double c = v - vals_[j];
        double m = -std::numeric_limits<double>::infinity();
        for (const Vec2& p : cells_[j].vertices()) m = std::max(m, p.dot(d));
        return m >= c - eps_ * (1.0 + std::abs(c));
    };
    static thread_local std::vector<int> queue;
    queue.clear();
    const std::uint32_t ep = fresh_epoch();
    mark_[i] = ep;
    auto push_neighbors = [&](int j) {
        for (int o : cells_[j].edge_origins()) {
            if (o < 0 || mark_[o] == ep) continue;
            mark_[o] = ep;
            queue.push_back(o);
        }
    };
    if (active(i)) {
        push_neighbors(i);
    } else {
        int s = locate_seed(i, v);
        if (s < 0) return;
        if (mark_[s] != ep) {
            mark_[s] = ep;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        int j = queue.back();
        queue.pop_back();
        if (!active(j)) continue;
        if (!touched(j)) continue;
        out.push_back(j);
        push_neighbors(j);
    }
    std::sort(out.begin(), out.end());
}

PowerCellComplex::Trial PowerCellComplex::trial_lower(int i, double v) const {
    static thread_local std::vector<int> damaged;
    flood_damaged(i, v, damaged);
    if (damaged.empty() && !active(i)) return Trial{};  // v is still above the hull
    ConvexPolygon poly = ConvexPolygon::box({-box_, -box_}, {box_, box_});
    const Vec2 xi = sites_[i];
    auto clip_by = [&](int j) {
        if (j == i || poly.empty()) return;
        poly.clip(HalfPlane{sites_[j] - xi, vals_[j] - v, j}, eps_);
    };
    // sound candidate set: previous active constraints plus everything the
    // new cell floods into (plus their own neighbours for degenerate ties)
    const std::uint32_t ep = fresh_epoch();
    auto try_mark = [&](int j) {
        if (j < 0 || mark_[j] == ep) return false;
        mark_[j] = ep;
        return true;
    };
    std::vector<int> cand;
    for (int o : cells_[i].edge_origins())
        if (o >= 0 && try_mark(o)) cand.push_back(o);
    for (int j : damaged) {
        if (try_mark(j)) cand.push_back(j);
        for (int o : cells_[j].edge_origins())
            if (o >= 0 && try_mark(o)) cand.push_back(o);
    }
    std::sort(cand.begin(), cand.end());
    for (int j : cand) clip_by(j);
    Trial t;
    t.area = poly.area();
    if (!poly.empty()) {
        for (std::size_t k = 0; k < poly.size(); ++k) {
            int o = poly.edge_origins()[k];
            if (o < 0) continue;
            double len = (poly.vertices()[(k + 1) % poly.size()] - poly.vertices()[k]).norm();
            t.newton_slope += len / (sites_[o] - xi).norm();
        }
    }
    t.cell = std::move(poly);
    return t;
}

std::vector<int> PowerCellComplex::lower(int i, double v) {
    if (v > vals_[i] + eps_)
        throw Error("PowerCellComplex::lower: value may only decrease");
    std::vector<int> damaged;
    for (int attempt = 0;; ++attempt) {
        Trial t = trial_lower(i, v);
        bool hits_box = false;
        if (!bnd_[i] && !t.cell.empty())
            for (int o : t.cell.edge_origins())
                if (o <= -2) hits_box = true;
        if (!hits_box || attempt >= 8) {
            flood_damaged(i, v, damaged);
            for (int j : damaged) {
                cells_[j].clip(HalfPlane{sites_[i] - sites_[j], v - vals_[j], i}, eps_);
                areas_[j] = cells_[j].area();
            }
            vals_[i] = v;
            cells_[i] = std::move(t.cell);
            areas_[i] = cells_[i].area();
            return damaged;
        }
        box_ *= 2.0;
        rebuild_all();
    }
}

std::vector<Vec2> PowerCellComplex::facet_gradients() const {
    std::vector<Vec2> out;
    for (int i = 0; i < size(); ++i) {
        const ConvexPolygon& c = cells_[i];
        const std::size_t m = c.size();
        for (std::size_t k = 0; k < m; ++k) {
            int e_prev = c.edge_origins()[(k + m - 1) % m];
            int e_next = c.edge_origins()[k];
            if (e_prev >= 0 && e_next >= 0) out.push_back(c.vertices()[k]);
        }
    }
    return out;
}

std::vector<Vec2> PowerCellComplex::gradient_hull() const {
    return convex_hull(facet_gradients());
}

void clip_to_ccw_polygon(ConvexPolygon& c, const std::vector<Vec2>& hull_ccw, double eps) {
    if (hull_ccw.size() < 3) {
        c = ConvexPolygon();
        return;
    }
    for (std::size_t k = 0; k < hull_ccw.size() && !c.empty(); ++k) {
        Vec2 a = hull_ccw[k];
        Vec2 b = hull_ccw[(k + 1) % hull_ccw.size()];
        Vec2 n{b.y - a.y, a.x - b.x};  // outward normal of a CCW edge; inside is n.p <= n.a
        double len = n.norm();
        if (len < 1e-300) continue;
        c.clip(HalfPlane{n * (1.0 / len), n.dot(a) / len, -1}, eps);
    }
}

double PowerCellComplex::cell_area_clipped(int i, const std::vector<Vec2>& hull_ccw) const {
    ConvexPolygon c = cells_[i];
    clip_to_ccw_polygon(c, hull_ccw, eps_);
    return c.area();
}

}  // namespace ma
