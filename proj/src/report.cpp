#include "icensus/report.hpp"

#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace icensus::report {

std::string real_str(const Real& v) {
  if (boost::multiprecision::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (boost::multiprecision::isnan(v)) return "nan";
  return v.str(30);
}

Json to_json(const CurveModel& c) { return {{"a", to_string(c.a)}, {"b", to_string(c.b)}}; }

Json to_json(const IntPoint& p) { return Json::array({to_string(p.first), to_string(p.second)}); }

Json to_json(const CensusResult& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json pts = Json::array();
    for (const auto& p : row.points) pts.push_back(to_json(p));
    rows.push_back({{"curve", to_json(row.curve)},
                    {"naive_height", real_str(naive_height(row.curve))},
                    {"integral_count", row.integral_count()},
                    {"points", pts},
                    {"x_bound", to_string(row.x_bound_used)}});
  }
  return {{"rows", rows},
          {"summary",
           {{"total_points", r.summary.total_points},
            {"curve_count", r.summary.curve_count},
            {"average", to_string(r.summary.average)},
            {"average_decimal", real_str(to_real(r.summary.average))}}}};
}

Json to_json(const SmallPointStats& s) {
  return {{"triple_count", s.triple_count},
          {"family_size", s.family_size},
          {"ratio", real_str(s.ratio)},
          {"x_bound", to_string(s.x_bound)}};
}

Json to_json(const HeightProfile& h) {
  Json locals = Json::object();
  for (const auto& [place, v] : h.local) locals[place] = real_str(v);
  return {{"weil", real_str(h.weil)},
          {"canonical", real_str(h.canonical)},
          {"locals", locals},
          {"precision_goal", real_str(h.precision_goal)},
          {"error_bound", real_str(h.error_bound)}};
}

Json to_json(const PairStat& s) {
  Json j = {{"curve", to_json(s.curve)},
            {"p", to_json(s.p)},
            {"r", to_json(s.r)},
            {"h_p", real_str(s.h_p)},
            {"h_r", real_str(s.h_r)},
            {"hhat_sum", real_str(s.hhat_sum)},
            {"excess", real_str(s.excess)}};
  j["cos_angle"] = s.cos_angle ? Json(real_str(*s.cos_angle)) : Json(nullptr);
  const auto ce = cos_excess(s);
  j["cos_excess"] = ce ? Json(real_str(*ce)) : Json(nullptr);
  return j;
}

Json to_json(const CosHistogram& h) {
  Json bins = Json::array();
  const double width = (CosHistogram::hi - CosHistogram::lo) / static_cast<double>(h.bins.size());
  for (std::size_t i = 0; i < h.bins.size(); ++i) {
    std::ostringstream lo;
    lo << std::setprecision(4) << CosHistogram::lo + width * static_cast<double>(i);
    bins.push_back({{"lo", lo.str()}, {"count", h.bins[i]}});
  }
  return {{"bins", bins}, {"undefined", h.undefined}, {"mass", h.mass()}};
}

Json to_json(const SurveyResult& s) {
  Json worst = Json::array();
  for (const auto& w : s.worst) worst.push_back(to_json(w));
  return {{"curve_count", s.curve_count},
          {"pair_count", s.pair_count},
          {"max_excess", s.max_excess ? Json(real_str(*s.max_excess)) : Json(nullptr)},
          {"max_cos_excess", s.max_cos_excess ? Json(real_str(*s.max_cos_excess)) : Json(nullptr)},
          {"cos_histogram", to_json(s.cos_histogram)},
          {"worst", worst}};
}

Json to_json(const DivPoly& p) {
  Json terms = Json::array();
  for (const auto& t : p.terms) {
    terms.push_back({{"f_x", t.fx}, {"f_A", t.fA}, {"f_B", t.fB}, {"coeff", to_string(t.coeff)}});
  }
  return {{"n", p.n}, {"y_factor", p.y_factor}, {"weight", p.weight}, {"terms", terms}};
}

Json to_json(const CodeBoundResult& r) {
  return {{"r", r.r},
          {"theta", real_str(r.theta)},
          {"method", method_token(r.method)},
          {"bound", real_str(r.bound)},
          {"certified", r.certified}};
}

Json to_json(const OptimizerParams& p) {
  Json js = Json::object();
  for (const auto& [r, j] : p.J_by_rank) js[std::to_string(r)] = real_str(j);
  return {{"c", real_str(p.c)},
          {"D", real_str(p.D)},
          {"s", p.s},
          {"J_default", real_str(p.J_default)},
          {"J_by_rank", js},
          {"C", real_str(c_constant(p))},
          {"c_uses_dtilde_squared", p.c_uses_dtilde_squared}};
}

Json to_json(const ConstraintCheck& c) {
  Json j = {{"iv_empty", c.iv_empty},
            {"roth_count", c.roth_count},
            {"kappa", real_str(c.kappa)},
            {"iv_lhs", real_str(c.iv_lhs)},
            {"roth_lhs", real_str(c.roth_lhs)}};
  if (!c.reason.empty()) j["reason"] = c.reason;
  return j;
}

Json to_json(const BoundReport& r) {
  Json per = Json::object();
  for (const auto& [rank, v] : r.per_rank) per[std::to_string(rank)] = to_string(v);
  Json dist = Json::array();
  for (const auto& q : r.distribution) dist.push_back(to_string(q));
  return {{"per_rank", per},
          {"aggregate", real_str(r.aggregate)},
          {"constraints", to_json(r.constraints)},
          {"params", to_json(r.params)},
          {"tail_bound", real_str(r.tail_bound)},
          {"r_max", r.r_max},
          {"distribution", dist},
          {"delta_terms", "dropped (delta -> 0)"}};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw ComputationError("sha256 failed");
  }
  std::ostringstream out;
  for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return out.str();
}

Json envelope(const Json& config, const Json& result) {
  const Json body = {{"config", config}, {"result", result}};
  Json out = body;
  out["content_hash"] = "sha256:" + sha256_hex(body.dump());
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_census_csv(std::ostream& out, const CensusResult& r) {
  out << "a,b,naive_height,integral_count\n";
  for (const auto& row : r.rows) {
    out << row.curve.a << ',' << row.curve.b << ',' << real_str(naive_height(row.curve)) << ','
        << row.integral_count() << '\n';
  }
}

void write_pairs_csv(std::ostream& out, const std::vector<PairStat>& pairs) {
  out << "a,b,px,py,rx,ry,h_p,h_r,hhat_sum,excess,cos_angle\n";
  for (const auto& s : pairs) {
    out << s.curve.a << ',' << s.curve.b << ',' << s.p.first << ',' << s.p.second << ',' << s.r.first << ','
        << s.r.second << ',' << real_str(s.h_p) << ',' << real_str(s.h_r) << ',' << real_str(s.hhat_sum) << ','
        << real_str(s.excess) << ',' << (s.cos_angle ? real_str(*s.cos_angle) : std::string()) << '\n';
  }
}

}  // namespace icensus::report
