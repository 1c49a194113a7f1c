#include "ma/measures.hpp"

#include <algorithm>
#include <cmath>

namespace ma {

SignedDiscreteMeasure::SignedDiscreteMeasure(std::vector<std::pair<int, double>> atoms) {
    std::sort(atoms.begin(), atoms.end());
    atoms_.reserve(atoms.size());
    for (std::size_t k = 0; k < atoms.size();) {
        int node = atoms[k].first;
        double w = 0.0;
        while (k < atoms.size() && atoms[k].first == node) w += atoms[k++].second;
        if (std::abs(w) > kPruneTol) atoms_.emplace_back(node, w);
    }
}

double SignedDiscreteMeasure::at(int node) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), node,
                               [](const auto& a, int n) { return a.first < n; });
    return (it != atoms_.end() && it->first == node) ? it->second : 0.0;
}

double SignedDiscreteMeasure::total_variation() const {
    double s = 0.0;
    for (const auto& [i, w] : atoms_) s += std::abs(w);
    return s;
}

double SignedDiscreteMeasure::total() const {
    double s = 0.0;
    for (const auto& [i, w] : atoms_) s += w;
    return s;
}

SignedDiscreteMeasure SignedDiscreteMeasure::scaled(double s) const {
    std::vector<std::pair<int, double>> a = atoms_;
    for (auto& [i, w] : a) w *= s;
    return SignedDiscreteMeasure(std::move(a));
}

SignedDiscreteMeasure SignedDiscreteMeasure::restricted_to(const std::vector<char>& keep) const {
    std::vector<std::pair<int, double>> a;
    for (const auto& [i, w] : atoms_)
        if (i < (int)keep.size() && keep[i]) a.emplace_back(i, w);
    return SignedDiscreteMeasure(std::move(a));
}

SignedDiscreteMeasure operator+(const SignedDiscreteMeasure& a, const SignedDiscreteMeasure& b) {
    std::vector<std::pair<int, double>> m = a.atoms_;
    m.insert(m.end(), b.atoms_.begin(), b.atoms_.end());
    return SignedDiscreteMeasure(std::move(m));
}

SignedDiscreteMeasure operator-(const SignedDiscreteMeasure& a, const SignedDiscreteMeasure& b) {
    std::vector<std::pair<int, double>> m = a.atoms_;
    for (const auto& [i, w] : b.atoms_) m.emplace_back(i, -w);
    return SignedDiscreteMeasure(std::move(m));
}

std::pair<SignedDiscreteMeasure, SignedDiscreteMeasure> jordan_decompose(
    const SignedDiscreteMeasure& mu) {
    std::vector<std::pair<int, double>> plus, minus;
    for (const auto& [i, w] : mu.atoms()) {
        if (w > 0)
            plus.emplace_back(i, w);
        else
            minus.emplace_back(i, -w);
    }
    return {SignedDiscreteMeasure(std::move(plus)), SignedDiscreteMeasure(std::move(minus))};
}

double MassScale::budget() const { return unit_ball_volume(n) * std::pow(a, n); }

MassScale mass_scale_from_total(double total_variation, int n) {
    if (n < 2) throw DimensionTooLow("mass_scale: n must be >= 2");
    MassScale s;
    s.n = n;
    s.a = std::pow(total_variation / unit_ball_volume(n), 1.0 / n);
    return s;
}

MassScale mass_scale(const SignedDiscreteMeasure& mu, int n) {
    return mass_scale_from_total(mu.total_variation(), n);
}

SignedDiscreteMeasure ma_measure(const PLConvexFunction& f) {
    const auto& cx = f.cells();
    const NodeSet& nodes = f.nodes();
    auto hull = cx.gradient_hull();
    std::vector<std::pair<int, double>> atoms;
    for (int i = 0; i < nodes.size(); ++i) {
        if (!f.active(i)) continue;
        double w = nodes.boundary[i] ? cx.cell_area_clipped(i, hull) : cx.cell_area(i);
        if (w > SignedDiscreteMeasure::kPruneTol) atoms.emplace_back(i, w);
    }
    return SignedDiscreteMeasure(std::move(atoms));
}

SignedDiscreteMeasure assemble_background(const std::function<double(Vec2)>& density,
                                          const NodeSet& nodes) {
    // Voronoi cells realized as power cells of the lifted paraboloid
    std::vector<double> lift(nodes.size());
    for (int i = 0; i < nodes.size(); ++i) lift[i] = 0.5 * nodes.points[i].norm2();
    PowerCellComplex cx(nodes.points, std::vector<char>(nodes.boundary.begin(), nodes.boundary.end()));
    double r = 0.0;
    for (const Vec2& v : nodes.domain) r = std::max(r, v.norm());
    cx.ensure_box(4.0 * r + 4.0);
    cx.set_values(std::move(lift));

    const double eps = cx.geometry_eps();
    std::vector<std::pair<int, double>> atoms;
    for (int i = 0; i < nodes.size(); ++i) {
        ConvexPolygon c = cx.cell(i);
        clip_to_ccw_polygon(c, nodes.domain, eps);
        if (c.empty()) continue;
        double rho = density(c.centroid());
        if (rho <= 0.0) throw NonPositiveDensity("assemble_background: density <= 0 sampled");
        double w = rho * c.area();
        if (w > SignedDiscreteMeasure::kPruneTol) atoms.emplace_back(i, w);
    }
    // also guard against non-positive density at the nodes themselves
    for (int i = 0; i < nodes.size(); ++i)
        if (density(nodes.points[i]) <= 0.0)
            throw NonPositiveDensity("assemble_background: density <= 0 sampled");
    return SignedDiscreteMeasure(std::move(atoms));
}

}  // namespace ma
