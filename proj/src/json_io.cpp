#include "ma/json_io.hpp"

#include <json.hpp>

namespace ma {

using ojson = nlohmann::ordered_json;

namespace {

ojson nodeset_values(const NodeSet& nodes, const std::vector<double>& values) {
    ojson j;
    auto& pts = j["points"] = ojson::array();
    for (const Vec2& p : nodes.points) pts.push_back({p.x, p.y});
    j["values"] = values;
    auto& b = j["boundary"] = ojson::array();
    for (char f : nodes.boundary) b.push_back((bool)f);
    return j;
}

}  // namespace

std::string nodeset_values_json(const NodeSet& nodes, const std::vector<double>& values) {
    return nodeset_values(nodes, values).dump();
}

std::string to_json(const PLConvexFunction& f) {
    return nodeset_values(f.nodes(), f.values()).dump();
}

std::pair<std::shared_ptr<NodeSet>, std::vector<double>> nodeset_values_from_json(
    const std::string& text, std::vector<Vec2> domain_hint) {
    ojson j = ojson::parse(text);
    auto nodes = std::make_shared<NodeSet>();
    for (const auto& p : j.at("points")) nodes->points.push_back({p.at(0), p.at(1)});
    for (const auto& b : j.at("boundary")) nodes->boundary.push_back(b.get<bool>() ? 1 : 0);
    std::vector<double> values = j.at("values").get<std::vector<double>>();
    if (!domain_hint.empty()) {
        nodes->domain = std::move(domain_hint);
    } else {
        // fall back to the hull of the boundary-flagged points
        std::vector<Vec2> bpts;
        for (int i = 0; i < nodes->size(); ++i)
            if (nodes->boundary[i]) bpts.push_back(nodes->points[i]);
        nodes->domain = convex_hull(bpts);
    }
    return {std::move(nodes), std::move(values)};
}

std::string to_json(const SignedDiscreteMeasure& mu) {
    ojson j;
    auto& atoms = j["atoms"] = ojson::array();
    for (const auto& [i, w] : mu.atoms()) atoms.push_back({i, w});
    return j.dump();
}

SignedDiscreteMeasure measure_from_json(const std::string& text) {
    ojson j = ojson::parse(text);
    std::vector<std::pair<int, double>> atoms;
    for (const auto& a : j.at("atoms")) atoms.emplace_back(a.at(0).get<int>(), a.at(1).get<double>());
    return SignedDiscreteMeasure(std::move(atoms));
}

std::string to_json(const SolveResult& r) {
    ojson j = nodeset_values(r.u.nodes(), r.u.values());
    j["residual"] = r.residual;
    j["iters"] = r.iters;
    return j.dump();
}

std::string to_json(const CoincidenceSet& k) {
    ojson j;
    j["nodes"] = k.nodes;
    j["mass"] = k.mass;
    j["h"] = k.h;
    return j.dump();
}

}  // namespace ma
