#include "icensus/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <boost/program_options/parsers.hpp>
#include <omp.h>

namespace icensus::cli {
namespace {

using report::Json;

const std::map<std::string, std::vector<std::string>>& key_table() {
  static const std::map<std::string, std::vector<std::string>> t = {
      {"census", {"curve"}},
      {"small-points", {"exponent"}},
      {"heights", {"curve", "point"}},
      {"gap-survey", {"bullet-only", "min-height", "worst-count"}},
      {"divpoly-verify", {"n-max", "samples", "seed", "psi"}},
      {"code-bound", {"r", "theta", "method", "lp-degree", "kl-invert"}},
      {"optimize",
       {"model", "probabilities", "caps", "floor-rank0", "floor-rank1", "floor-rank01", "density", "r-max",
        "refine-iterations", "grid-c", "grid-D", "grid-s", "grid-J", "j-min-rank", "j-max-rank", "search", "c", "D",
        "s", "J", "c-uses-dtilde-squared"}},
      {"verify-identities", {"samples", "seed"}},
  };
  return t;
}

const char* describe(const std::string& cmd) {
  if (cmd == "census") return "integral points on every curve of a family slice (or one --curve A,B)";
  if (cmd == "small-points") return "count (x, y, E) with |x| <= T^exponent";
  if (cmd == "heights") return "Weil, canonical and local heights of --point on --curve";
  if (cmd == "gap-survey") return "gap-principle excess over pairs of integral points";
  if (cmd == "divpoly-verify") return "division-polynomial multiplication against the group law";
  if (cmd == "code-bound") return "spherical / projective code bounds";
  if (cmd == "optimize") return "per-rank and aggregate bounds, optionally searched over parameters";
  if (cmd == "verify-identities") return "randomized checks of the algebraic identities";
  return "";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  return out;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ValidationError("not an integer: '" + s + "'");
  return v;
}

Real parse_real(const std::string& s) {
  if (s.empty()) throw ValidationError("empty number");
  if (s.find('/') != std::string::npos) return to_real(parse_rational(s));
  try {
    std::size_t used = 0;
    (void)std::stod(s, &used);
    if (used != s.size()) throw ValidationError("not a number: '" + s + "'");
  } catch (const std::logic_error&) {
    throw ValidationError("not a number: '" + s + "'");
  }
  return Real(s);
}

// "pi", "pi/3", "2pi/5", or a number
Real parse_angle(const std::string& s) {
  const auto at = s.find("pi");
  if (at == std::string::npos) return parse_real(s);
  Real num = 1;
  if (at > 0) num = parse_real(s.substr(0, at));
  std::string rest = s.substr(at + 2);
  Real den = 1;
  if (!rest.empty()) {
    if (rest[0] != '/') throw ValidationError("angle must look like k pi / m: '" + s + "'");
    den = parse_real(rest.substr(1));
  }
  if (den == 0) throw ValidationError("zero denominator in angle");
  return num * pi_real() / den;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError("not a boolean: '" + s + "'");
}

std::vector<Real> parse_real_list(const std::string& s) {
  std::vector<Real> out;
  for (const auto& t : split(s, ',')) out.push_back(parse_real(t));
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

// collects every problem instead of stopping at the first
class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  template <class F>
  void with(const std::string& key, F f) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return;
    try {
      f(it->second);
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  void fail(const std::string& key, const std::string& why) { errors_.push_back("--" + key + ": " + why); }
  void require(bool ok, const std::string& key, const std::string& why) {
    if (!ok) fail(key, why);
  }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  const KeyValues& kv_;
  std::vector<std::string> errors_;
};

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  std::replace(k.begin(), k.end(), '.', '-');
  return k;
}

// random curve through an integral point; small multiples of it give rational coordinates
std::pair<CurveModel, CurvePoint> random_pair(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(-20, 20);
  std::uniform_int_distribution<long> k(1, 3);
  for (;;) {
    const long x0 = d(rng), y0 = d(rng), a = d(rng);
    if (y0 == 0) continue;
    const BigInt b = BigInt(y0) * y0 - BigInt(x0) * x0 * x0 - BigInt(a) * x0;
    CurveModel c{BigInt(a), b};
    if (discriminant(c) == 0) continue;
    const CurvePoint p = scalar_multiple(c, CurvePoint::affine(Rational(x0), Rational(y0)), k(rng));
    if (p.identity) continue;
    if (mpz_sizeinbase(p.x.get_den().get_mpz_t(), 2) > 64) continue;
    return {c, p};
  }
}

std::vector<std::vector<Real>> random_gram(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const std::size_t k = 1 + rng() % 6;
    std::vector<double> diag(k);
    for (auto& v : diag) v = 1 + 9 * u(rng);
    std::sort(diag.begin(), diag.end());
    std::vector<std::vector<Real>> g(k, std::vector<Real>(k));
    for (std::size_t i = 0; i < k; ++i) {
      g[i][i] = diag[i];
      for (std::size_t j = 0; j < i; ++j) g[i][j] = g[j][i] = Real((u(rng) - 0.5) * diag[j]);
    }
    // keep positive definite draws only (Cholesky)
    std::vector<std::vector<Real>> l(k, std::vector<Real>(k));
    bool pd = true;
    for (std::size_t i = 0; i < k && pd; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        Real s = g[i][j];
        for (std::size_t t = 0; t < j; ++t) s -= l[i][t] * l[j][t];
        if (i == j) {
          if (!(s > Real("1e-9"))) {
            pd = false;
            break;
          }
          l[i][i] = sqrt(s);
        } else {
          l[i][j] = s / l[j][j];
        }
      }
    }
    if (pd) return g;
  }
}

Json check(bool passed, Json detail) { return {{"passed", passed}, {"detail", std::move(detail)}}; }

Outcome run_census(const RunConfig& cfg) {
  const CensusResult res = cfg.curve ? census_curves({*cfg.curve}, cfg.x_bound) : census(cfg.family, cfg.T, cfg.x_bound);
  Outcome o;
  o.result = report::to_json(res);
  if (cfg.format == "csv") {
    std::ostringstream s;
    report::write_census_csv(s, res);
    o.csv = s.str();
  }
  return o;
}

Outcome run_heights(const RunConfig& cfg) {
  const CurvePoint p = CurvePoint::affine(cfg.point->first, cfg.point->second);
  const HeightProfile h = canonical_height(*cfg.curve, p, cfg.precision);
  const GapReport gap = height_gap_report(*cfg.curve, p, cfg.precision);
  Outcome o;
  o.result = report::to_json(h);
  o.result["residual"] = report::real_str(gap.residual);
  o.result["difference_bound"] = report::real_str(global_difference_bound(*cfg.curve));
  o.result["real_period"] = report::real_str(real_period(*cfg.curve, cfg.precision));
  return o;
}

Outcome run_gap_survey(const RunConfig& cfg) {
  SurveyOptions opts;
  opts.precision_goal = cfg.precision;
  opts.bullet_only = cfg.bullet_only;
  opts.delta = cfg.delta;
  opts.worst_count = cfg.worst_count;
  if (cfg.min_height) {
    opts.min_height = *cfg.min_height;
  } else if (cfg.bullet_only) {
    opts.min_height = gap_min_height(cfg.T, cfg.delta);
  }
  const SurveyResult s = repulsion_survey(cfg.family, cfg.T, cfg.x_bound.value_or(BigInt(10000)), opts);
  Outcome o;
  o.result = report::to_json(s);
  o.result["min_height"] = report::real_str(opts.min_height);
  if (cfg.format == "csv") {
    std::ostringstream out;
    report::write_pairs_csv(out, s.worst);
    o.csv = out.str();
  }
  return o;
}

Outcome run_divpoly(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uint64_t mismatches = 0, comparisons = 0;
  Json first_bad = nullptr;
  for (unsigned i = 0; i < cfg.samples; ++i) {
    const auto [c, p] = random_pair(rng);
    CurvePoint acc = CurvePoint::at_infinity();
    for (unsigned n = 1; n <= cfg.n_max; ++n) {
      acc = add(c, acc, p);
      ++comparisons;
      if (!(multiply_point(c, p, n) == acc)) {
        if (mismatches++ == 0) first_bad = {{"curve", report::to_json(c)}, {"n", n}};
      }
    }
  }
  Outcome o;
  o.result = {{"samples", cfg.samples},
              {"n_max", cfg.n_max},
              {"comparisons", comparisons},
              {"mismatches", mismatches},
              {"all_equal", mismatches == 0},
              {"first_mismatch", first_bad}};
  if (cfg.psi) o.result["psi"] = report::to_json(*psi(*cfg.psi, std::max(*cfg.psi, kDefaultNMax)));
  o.passed = mismatches == 0;
  return o;
}

Outcome run_code_bound(const RunConfig& cfg) {
  Outcome o;
  if (cfg.kl_invert) {
    const auto k = kl_invert(*cfg.kl_invert);
    o.result = {{"method", "kl"},
                {"base", report::real_str(*cfg.kl_invert)},
                {"theta", report::real_str(k.theta)},
                {"cos_theta", report::real_str(k.cos_theta)}};
    return o;
  }
  CodeBoundResult r;
  if (cfg.method == "best") {
    r = best_code_bound(cfg.r, cfg.theta);
  } else {
    switch (parse_method(cfg.method)) {
      case CodeMethod::Cap:
        r = {cfg.r, cfg.theta, CodeMethod::Cap, cap_bound(cfg.r, cfg.theta, true), true};
        break;
      case CodeMethod::Rp1:
        if (cfg.r != 2) throw ValidationError("rp1 applies to r = 2 only");
        r = {cfg.r, cfg.theta, CodeMethod::Rp1, Real(rp1_bound(cfg.theta)), true};
        break;
      case CodeMethod::Kl: {
        // main term only: base^r without the subexponential factor
        const Real base = kl_base(cfg.theta);
        r = {cfg.r, cfg.theta, CodeMethod::Kl, boost::multiprecision::pow(base, cfg.r), false};
        o.result = report::to_json(r);
        o.result["rate"] = report::real_str(kl_rate(cfg.theta));
        o.result["base"] = report::real_str(base);
        return o;
      }
      case CodeMethod::Lp:
        r = lp_bound(cfg.r, cfg.theta, cfg.lp_degree);
        break;
    }
  }
  o.result = report::to_json(r);
  return o;
}

Outcome run_optimize(const RunConfig& cfg) {
  Outcome o;
  if (!cfg.search) {
    o.result = report::to_json(aggregate_bound(cfg.rank_model, cfg.params, cfg.grid.r_max));
    return o;
  }
  const OptimizeResult res = optimize(cfg.rank_model, cfg.grid);
  o.result = report::to_json(res.best);
  o.result["evaluations"] = res.audit.size();
  Real worst = res.best.aggregate;
  for (const auto& a : res.audit) worst = std::max(worst, a.aggregate);
  o.result["worst_evaluated"] = report::real_str(worst);
  return o;
}

Outcome run_identities(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  Json checks = Json::object();
  bool all = true;
  auto put = [&](const std::string& name, bool ok, Json detail) {
    checks[name] = check(ok, std::move(detail));
    all = all && ok;
  };

  Real worst = 0;
  for (const char* d : {"1.5", "10", "612.117"}) {
    const Real D(d), t = d_tilde(D);
    worst = std::max(worst, Real(abs(t * t / ((t * t - 1) * (t * t - 1)) - 1 / (D * D))));
  }
  put("d_tilde_identity", worst < Real("1e-30"), report::real_str(worst));

  const Real gap = abs(cap_gamma_ratio(3) - cap_gamma_majorant(3));
  put("cap_gamma_equality_r3", gap < Real("1e-20"), report::real_str(gap));

  const auto k = kl_invert(Real(3));
  const Real kl_err = abs(kl_base(k.theta) - 3);
  put("kl_inverse", kl_err < Real("1e-8"), report::real_str(kl_err));

  std::uint64_t basis_fail = 0;
  for (unsigned i = 0; i < cfg.samples; ++i) {
    const auto g = random_gram(rng);
    std::vector<int> signs(g.size());
    for (auto& e : signs) e = (rng() & 1) ? 1 : -1;
    if (!verify_basis_inequality(g, signs)) ++basis_fail;
  }
  put("basis_inequality", basis_fail == 0, {{"trials", cfg.samples}, {"failures", basis_fail}});

  std::uint64_t triple_fail = 0;
  const unsigned triples = std::min(cfg.samples, 20u);
  for (unsigned i = 0; i < triples; ++i) {
    const auto [c, p] = random_pair(rng);
    if (!triple_root_identity_check(c, p, 5, rng())) ++triple_fail;
  }
  put("triple_root_identity", triple_fail == 0, {{"curves", triples}, {"failures", triple_fail}});

  Outcome o;
  o.result = {{"checks", checks}, {"all_passed", all}};
  o.passed = all;
  return o;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"census",     "small-points", "heights",  "gap-survey",
                                             "divpoly-verify", "code-bound", "optimize", "verify-identities"};
  return c;
}

const std::vector<std::string>& common_keys() {
  static const std::vector<std::string> k = {"family", "T",       "x-bound", "delta", "precision",
                                             "threads", "out",    "format",  "config"};
  return k;
}

const std::vector<std::string>& command_keys(const std::string& command) {
  const auto& t = key_table();
  const auto it = t.find(command);
  if (it == t.end()) throw ValidationError("unknown subcommand '" + command + "'\n" + usage());
  return it->second;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  namespace po = boost::program_options;
  KeyValues out;
  try {
    const po::options_description none;
    const auto parsed = po::parse_config_file(in, none, true);
    for (const auto& o : parsed.options) {
      if (o.value.empty()) continue;
      out[normalize_key(o.string_key)] = o.value.front();
    }
  } catch (const po::error& e) {
    throw ValidationError("config file '" + path + "': " + e.what());
  }
  return out;
}

RunConfig resolve(const std::string& command, const KeyValues& kv) {
  const auto& own = command_keys(command);
  RunConfig cfg;
  cfg.command = command;
  Reader rd(kv);
  for (const auto& [k, v] : kv) {
    const bool known = std::find(common_keys().begin(), common_keys().end(), k) != common_keys().end() ||
                       std::find(own.begin(), own.end(), k) != own.end();
    if (!known) rd.fail(k, "not an option of '" + command + "'");
  }

  rd.with("family", [&](const std::string& v) { cfg.family = parse_family(v); });
  rd.with("T", [&](const std::string& v) {
    cfg.T = parse_real(v);
    if (!(cfg.T >= 1)) throw ValidationError("T must be >= 1");
  });
  rd.with("x-bound", [&](const std::string& v) {
    cfg.x_bound = parse_bigint(v);
    if (*cfg.x_bound < 0) throw ValidationError("x-bound must be >= 0");
  });
  rd.with("delta", [&](const std::string& v) {
    cfg.delta = parse_real(v);
    if (!(cfg.delta > 0 && cfg.delta < 1)) throw ValidationError("delta must lie in (0, 1)");
  });
  rd.with("precision", [&](const std::string& v) {
    cfg.precision = parse_real(v);
    if (!(cfg.precision >= Real("1e-14") && cfg.precision <= Real("1e-2"))) {
      throw ValidationError("precision must lie in [1e-14, 1e-2]");
    }
  });
  rd.with("threads", [&](const std::string& v) {
    const auto t = parse_int(v);
    if (t < 0 || t > 1024) throw ValidationError("threads must lie in [0, 1024]");
    cfg.threads = static_cast<int>(t);
  });
  rd.with("out", [&](const std::string& v) { cfg.out = v; });
  rd.with("format", [&](const std::string& v) {
    if (v != "json" && v != "csv") throw ValidationError("format must be json or csv");
    if (v == "csv" && command != "census" && command != "gap-survey") {
      throw ValidationError("csv output exists for census and gap-survey only");
    }
    cfg.format = v;
  });

  rd.with("curve", [&](const std::string& v) {
    const auto parts = split(v, ',');
    if (parts.size() != 2) throw ValidationError("curve must be A,B");
    CurveModel c{parse_bigint(parts[0]), parse_bigint(parts[1])};
    if (discriminant(c) == 0) throw ValidationError("singular curve (discriminant 0)");
    cfg.curve = c;
  });
  rd.with("point", [&](const std::string& v) {
    const auto parts = split(v, ',');
    if (parts.size() != 2) throw ValidationError("point must be X,Y");
    cfg.point = std::make_pair(parse_rational(parts[0]), parse_rational(parts[1]));
  });
  rd.with("exponent", [&](const std::string& v) {
    cfg.exponent = parse_real(v);
    if (!(cfg.exponent >= 0 && cfg.exponent <= 6)) throw ValidationError("exponent must lie in [0, 6]");
  });

  rd.with("bullet-only", [&](const std::string& v) { cfg.bullet_only = parse_bool(v); });
  rd.with("min-height", [&](const std::string& v) {
    cfg.min_height = parse_real(v);
    if (*cfg.min_height < 0) throw ValidationError("min-height must be >= 0");
  });
  rd.with("worst-count", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 0 || n > 100000) throw ValidationError("worst-count must lie in [0, 100000]");
    cfg.worst_count = static_cast<std::size_t>(n);
  });

  rd.with("n-max", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 1 || n > 64) throw ValidationError("n-max must lie in [1, 64]");
    cfg.n_max = static_cast<unsigned>(n);
  });
  rd.with("samples", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 1 || n > 10000000) throw ValidationError("samples must lie in [1, 10^7]");
    cfg.samples = static_cast<unsigned>(n);
  });
  rd.with("seed", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 0) throw ValidationError("seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(n);
  });
  rd.with("psi", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 1 || n > 200) throw ValidationError("psi index must lie in [1, 200]");
    cfg.psi = static_cast<unsigned>(n);
  });

  rd.with("r", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 2 || n > 10000) throw ValidationError("r must lie in [2, 10000]");
    cfg.r = static_cast<int>(n);
  });
  rd.with("theta", [&](const std::string& v) {
    cfg.theta = parse_angle(v);
    if (!(cfg.theta > 0 && cfg.theta < pi_real())) throw ValidationError("theta must lie in (0, pi)");
  });
  rd.with("method", [&](const std::string& v) {
    if (v != "best") (void)parse_method(v);
    cfg.method = v;
  });
  rd.with("lp-degree", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 0 || n > 40) throw ValidationError("lp-degree must lie in [0, 40]");
    cfg.lp_degree = static_cast<int>(n);
  });
  rd.with("kl-invert", [&](const std::string& v) {
    cfg.kl_invert = parse_real(v);
    if (!(*cfg.kl_invert > 1 && *cfg.kl_invert <= 10)) throw ValidationError("kl-invert base must lie in (1, 10]");
  });

  // optimizer: model first, then overrides
  rd.with("model", [&](const std::string& v) {
    if (v != "minimalist" && v != "moments" && v != "explicit") {
      throw ValidationError("model must be minimalist, moments or explicit");
    }
    cfg.model = v;
  });
  cfg.rank_model = cfg.model == "moments" ? moment_model() : minimalist_model();
  if (cfg.model == "explicit") {
    cfg.rank_model.density = 1;
    rd.require(rd.has("probabilities"), "probabilities", "required by the explicit model");
  }
  rd.with("probabilities", [&](const std::string& v) {
    if (cfg.model != "explicit") throw ValidationError("only the explicit model takes probabilities");
    cfg.rank_model.probabilities.clear();
    for (const auto& t : split(v, ',')) cfg.rank_model.probabilities.push_back(parse_rational(t));
  });
  rd.with("caps", [&](const std::string& v) {
    if (cfg.model != "moments") throw ValidationError("only the moments model takes caps");
    cfg.rank_model.moment_caps.clear();
    for (const auto& t : split(v, ',')) {
      const auto bc = split(t, ':');
      if (bc.size() != 2) throw ValidationError("caps must be base:cap,base:cap,...");
      cfg.rank_model.moment_caps.emplace_back(parse_bigint(bc[0]), parse_rational(bc[1]));
    }
  });
  auto floor_key = [&](const char* key, std::optional<Rational>& slot) {
    rd.with(key, [&](const std::string& v) {
      if (cfg.model != "moments") throw ValidationError("floors apply to the moments model");
      if (v == "none") {
        slot.reset();
      } else {
        slot = parse_rational(v);
      }
    });
  };
  floor_key("floor-rank0", cfg.rank_model.floor_rank0);
  floor_key("floor-rank1", cfg.rank_model.floor_rank1);
  floor_key("floor-rank01", cfg.rank_model.floor_rank01);
  rd.with("density", [&](const std::string& v) { cfg.rank_model.density = parse_rational(v); });
  if (command == "optimize") {
    try {
      cfg.rank_model.validate();
    } catch (const ValidationError& e) {
      rd.fail("model", e.what());
    }
  }

  cfg.grid = default_grid();
  cfg.params = reference_params();
  rd.with("r-max", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 1 || n > 200) throw ValidationError("r-max must lie in [1, 200]");
    cfg.grid.r_max = static_cast<int>(n);
  });
  rd.with("refine-iterations", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 0 || n > 200) throw ValidationError("refine-iterations must lie in [0, 200]");
    cfg.grid.refine_iterations = static_cast<int>(n);
  });
  rd.with("grid-c", [&](const std::string& v) {
    cfg.grid.c = parse_real_list(v);
    for (const auto& c : cfg.grid.c) {
      if (!(c > 0 && c < 1)) throw ValidationError("grid c values must lie in (0, 1)");
    }
  });
  rd.with("grid-D", [&](const std::string& v) {
    cfg.grid.D = parse_real_list(v);
    for (const auto& d : cfg.grid.D) {
      if (!(d > 1)) throw ValidationError("grid D values must exceed 1");
    }
  });
  rd.with("grid-s", [&](const std::string& v) {
    cfg.grid.s.clear();
    for (const auto& t : split(v, ',')) {
      const auto n = parse_int(t);
      if (n < 1 || n > 100) throw ValidationError("grid s values must lie in [1, 100]");
      cfg.grid.s.push_back(static_cast<int>(n));
    }
  });
  rd.with("grid-J", [&](const std::string& v) {
    cfg.grid.J = parse_real_list(v);
    for (const auto& j : cfg.grid.J) {
      if (!(j > 1 && j < 2)) throw ValidationError("grid J values must lie in (1, 2)");
    }
  });
  rd.with("j-min-rank", [&](const std::string& v) { cfg.grid.j_min_rank = static_cast<int>(parse_int(v)); });
  rd.with("j-max-rank", [&](const std::string& v) { cfg.grid.j_max_rank = static_cast<int>(parse_int(v)); });
  rd.require(cfg.grid.j_min_rank <= cfg.grid.j_max_rank, "j-min-rank", "must not exceed j-max-rank");
  rd.with("search", [&](const std::string& v) { cfg.search = parse_bool(v); });
  rd.with("c", [&](const std::string& v) {
    cfg.params.c = parse_real(v);
    if (!(cfg.params.c > 0 && cfg.params.c < 1)) throw ValidationError("c must lie in (0, 1)");
  });
  rd.with("D", [&](const std::string& v) {
    cfg.params.D = parse_real(v);
    if (!(cfg.params.D > 1)) throw ValidationError("D must exceed 1");
  });
  rd.with("s", [&](const std::string& v) {
    const auto n = parse_int(v);
    if (n < 1 || n > 100) throw ValidationError("s must lie in [1, 100]");
    cfg.params.s = static_cast<int>(n);
  });
  rd.with("J", [&](const std::string& v) {
    cfg.params.J_default = parse_real(v);
    if (!(cfg.params.J_default > 1 && cfg.params.J_default < 2)) throw ValidationError("J must lie in (1, 2)");
  });
  rd.with("c-uses-dtilde-squared", [&](const std::string& v) {
    cfg.params.c_uses_dtilde_squared = parse_bool(v);
  });
  bool param_keys = false;
  for (const char* k : {"c", "D", "s", "J", "c-uses-dtilde-squared"}) param_keys = param_keys || rd.has(k);
  if (param_keys && cfg.search && rd.has("search")) {
    rd.fail("search", "c, D, s, J fix a single point; set search = false to evaluate it");
  } else if (param_keys && !rd.has("search")) {
    cfg.search = false;
  }

  if (command == "heights") {
    rd.require(cfg.curve.has_value(), "curve", "required");
    rd.require(cfg.point.has_value(), "point", "required");
    if (cfg.curve && cfg.point) {
      const CurvePoint p = CurvePoint::affine(cfg.point->first, cfg.point->second);
      rd.require(on_curve(*cfg.curve, p), "point", "not on the curve");
    }
  }
  if (command == "census" && cfg.curve && rd.has("family")) rd.fail("curve", "give either --curve or --family");
  if (command == "code-bound" && !cfg.kl_invert) {
    if (cfg.method == "rp1") rd.require(cfg.r == 2, "r", "rp1 applies to r = 2");
    if (cfg.method == "cap") rd.require(cfg.r >= 3, "r", "cap needs r >= 3");
    if (cfg.method == "lp") rd.require(cfg.r <= 16, "r", "lp supports r <= 16");
    if (cfg.method != "cap") rd.require(cfg.theta <= pi_real() / 2, "theta", "must be <= pi/2 for this method");
  }

  if (!rd.errors().empty()) {
    std::string msg = "invalid configuration for '" + command + "':";
    for (const auto& e : rd.errors()) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return cfg;
}

Json config_json(const RunConfig& cfg) {
  using report::real_str;
  Json j = {{"command", cfg.command}};
  const std::string& c = cfg.command;
  if (c == "census" || c == "small-points" || c == "gap-survey") {
    if (!cfg.curve) {
      j["family"] = family_token(cfg.family);
      j["T"] = real_str(cfg.T);
    }
  }
  if (c == "census") {
    if (cfg.curve) j["curve"] = report::to_json(*cfg.curve);
    j["x_bound"] = cfg.x_bound ? Json(to_string(*cfg.x_bound)) : Json("default");
  }
  if (c == "small-points") j["exponent"] = real_str(cfg.exponent);
  if (c == "heights") {
    j["curve"] = report::to_json(*cfg.curve);
    j["point"] = {to_string(cfg.point->first), to_string(cfg.point->second)};
    j["precision"] = real_str(cfg.precision);
  }
  if (c == "gap-survey") {
    j["x_bound"] = to_string(cfg.x_bound.value_or(BigInt(10000)));
    j["precision"] = real_str(cfg.precision);
    j["bullet_only"] = cfg.bullet_only;
    j["delta"] = real_str(cfg.delta);
    j["min_height"] = cfg.min_height ? Json(real_str(*cfg.min_height)) : Json("default");
    j["worst_count"] = cfg.worst_count;
  }
  if (c == "divpoly-verify" || c == "verify-identities") {
    j["samples"] = cfg.samples;
    j["seed"] = cfg.seed;
  }
  if (c == "divpoly-verify") {
    j["n_max"] = cfg.n_max;
    j["psi"] = cfg.psi ? Json(*cfg.psi) : Json(nullptr);
  }
  if (c == "code-bound") {
    if (cfg.kl_invert) {
      j["kl_invert"] = real_str(*cfg.kl_invert);
    } else {
      j["r"] = cfg.r;
      j["theta"] = real_str(cfg.theta);
      j["method"] = cfg.method;
      if (cfg.method == "lp") j["lp_degree"] = cfg.lp_degree;
    }
  }
  if (c == "optimize") {
    const RankModel& m = cfg.rank_model;
    Json model = {{"name", cfg.model}, {"density", to_string(m.density)}};
    if (m.kind == RankModel::Kind::Explicit) {
      Json p = Json::array();
      for (const auto& q : m.probabilities) p.push_back(to_string(q));
      model["probabilities"] = p;
    } else {
      Json caps = Json::array();
      for (const auto& [b, cap] : m.moment_caps) caps.push_back({to_string(b), to_string(cap)});
      model["caps"] = caps;
      auto fl = [](const std::optional<Rational>& f) { return f ? Json(to_string(*f)) : Json(nullptr); };
      model["floors"] = {{"rank0", fl(m.floor_rank0)}, {"rank1", fl(m.floor_rank1)}, {"rank01", fl(m.floor_rank01)}};
    }
    j["model"] = model;
    j["r_max"] = cfg.grid.r_max;
    j["search"] = cfg.search;
    if (cfg.search) {
      auto reals = [](const std::vector<Real>& v) {
        Json a = Json::array();
        for (const auto& x : v) a.push_back(real_str(x));
        return a;
      };
      j["grid"] = {{"c", reals(cfg.grid.c)},
                   {"D", reals(cfg.grid.D)},
                   {"s", cfg.grid.s},
                   {"J", reals(cfg.grid.J)},
                   {"j_min_rank", cfg.grid.j_min_rank},
                   {"j_max_rank", cfg.grid.j_max_rank},
                   {"refine_iterations", cfg.grid.refine_iterations}};
    } else {
      j["params"] = report::to_json(cfg.params);
    }
  }
  return j;
}

Outcome execute(const RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "census") return run_census(cfg);
  if (c == "small-points") {
    Outcome o;
    o.result = report::to_json(small_point_statistics(cfg.family, cfg.T, cfg.exponent));
    return o;
  }
  if (c == "heights") return run_heights(cfg);
  if (c == "gap-survey") return run_gap_survey(cfg);
  if (c == "divpoly-verify") return run_divpoly(cfg);
  if (c == "code-bound") return run_code_bound(cfg);
  if (c == "optimize") return run_optimize(cfg);
  if (c == "verify-identities") return run_identities(cfg);
  throw ValidationError("unknown subcommand '" + c + "'\n" + usage());
}

std::string usage() {
  std::ostringstream out;
  out << "usage: icensus <subcommand> [--key value ...] [--config FILE]\n\nsubcommands:\n";
  for (const auto& c : commands()) out << "  " << c << std::string(20 - c.size(), ' ') << describe(c) << '\n';
  out << "\ncommon options:";
  for (const auto& k : common_keys()) out << " --" << k;
  out << "\n\nper-subcommand options:\n";
  for (const auto& c : commands()) {
    out << "  " << c << ":";
    for (const auto& k : command_keys(c)) out << " --" << k;
    out << '\n';
  }
  out << "\nexit status: 0 ok, 1 invalid input, 2 computation failed\n";
  return out.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Integral points on elliptic curve families, heights and rank-aggregated bounds", "icensus"};
  app.require_subcommand(1, 1);
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd, describe(cmd));
    for (const auto& k : common_keys()) sub->add_option("--" + k, flags[k]);
    for (const auto& k : command_keys(cmd)) sub->add_option("--" + k, flags[k]);
    subs[cmd] = sub;
  }
  if (argc >= 2 && argv[1][0] != '-' &&
      std::find(commands().begin(), commands().end(), std::string(argv[1])) == commands().end()) {
    err << "error: unknown subcommand '" << argv[1] << "'\n\n" << usage();
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto chosen = app.get_subcommands();
    out << (chosen.empty() ? usage() : chosen.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  CLI::App* sub = subs.at(cmd);
  try {
    KeyValues kv;
    if (sub->count("--config") > 0) {
      kv = read_config_file(flags["config"]);
      kv.erase("config");
    }
    for (const auto& k : common_keys()) {
      if (k != "config" && sub->count("--" + k) > 0) kv[k] = flags[k];
    }
    for (const auto& k : command_keys(cmd)) {
      if (sub->count("--" + k) > 0) kv[k] = flags[k];
    }
    const RunConfig cfg = resolve(cmd, kv);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    const Outcome o = execute(cfg);
    const std::string json = report::dump(report::envelope(config_json(cfg), o.result));

    auto emit = [&](const std::string& path, const std::string& text) {
      if (path.empty()) {
        out << text;
        return;
      }
      std::ofstream f(path, std::ios::binary);
      if (!f || !(f << text)) throw ComputationError("cannot write '" + path + "'");
    };
    if (cfg.format == "csv") {
      emit(cfg.out, o.csv);
      if (!cfg.out.empty()) emit(cfg.out + ".json", json);
    } else {
      emit(cfg.out, json);
    }
    if (!o.passed) {
      err << "computation error: verification failed\n";
      return 2;
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "computation error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace icensus::cli
