#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "icensus/divpoly.hpp"
#include "icensus/heights.hpp"
#include "icensus/optimizer.hpp"
#include "icensus/repulsion.hpp"

namespace icensus::report {

using Json = nlohmann::json;  // std::map objects: keys come out sorted

/// Fixed 30 significant digits, so equal values always print identically.
std::string real_str(const Real& v);

Json to_json(const CurveModel& c);
Json to_json(const IntPoint& p);
Json to_json(const CensusResult& r);
Json to_json(const SmallPointStats& s);
Json to_json(const HeightProfile& h);
Json to_json(const PairStat& s);
Json to_json(const CosHistogram& h);
Json to_json(const SurveyResult& s);
Json to_json(const DivPoly& p);
Json to_json(const CodeBoundResult& r);
Json to_json(const OptimizerParams& p);
Json to_json(const ConstraintCheck& c);
Json to_json(const BoundReport& r);

std::string sha256_hex(const std::string& bytes);

/// {"config", "result", "content_hash"}; the hash covers the canonical dump of
/// config and result.
Json envelope(const Json& config, const Json& result);

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string dump(const Json& j);

void write_census_csv(std::ostream& out, const CensusResult& r);
void write_pairs_csv(std::ostream& out, const std::vector<PairStat>& pairs);

}  // namespace icensus::report
