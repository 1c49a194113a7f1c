#pragma once

#include <memory>
#include <string>

#include "ma/estimates.hpp"

namespace ma {

// {"points": [[x,y],...], "values": [...], "boundary": [...]} field order fixed
std::string to_json(const PLConvexFunction& f);
std::string nodeset_values_json(const NodeSet& nodes, const std::vector<double>& values);
std::pair<std::shared_ptr<NodeSet>, std::vector<double>> nodeset_values_from_json(
    const std::string& text, std::vector<Vec2> domain_hint = {});

// {"atoms": [[index, weight],...]}
std::string to_json(const SignedDiscreteMeasure& mu);
SignedDiscreteMeasure measure_from_json(const std::string& text);

// geometry json + {"residual": r, "iters": k}
std::string to_json(const SolveResult& r);

// {"nodes": [...], "mass": m, "h": h}
std::string to_json(const CoincidenceSet& k);

}  // namespace ma
