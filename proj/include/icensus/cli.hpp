#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icensus/report.hpp"

namespace icensus::cli {

/// Option name -> raw value. Names use dashes ("x-bound"); config files may
/// also write underscores or [section] prefixes ("grid.c" becomes "grid-c").
using KeyValues = std::map<std::string, std::string>;

const std::vector<std::string>& commands();
/// Keys accepted by a subcommand, in addition to the common ones.
const std::vector<std::string>& command_keys(const std::string& command);
const std::vector<std::string>& common_keys();

/// key = value lines, '#' comments, optional [section] headers.
KeyValues read_config_file(const std::string& path);

struct RunConfig {
  std::string command;
  Family family = Family::Universal;
  Real T = 10;
  std::optional<BigInt> x_bound;
  Real delta = Real("0.1");
  Real precision = Real("1e-8");
  int threads = 0;  // 0: OpenMP default
  std::string out;  // empty: stdout
  std::string format = "json";

  std::optional<CurveModel> curve;
  std::optional<std::pair<Rational, Rational>> point;
  Real exponent = 2;

  int r = 3;
  Real theta = pi_real() / 3;
  std::string method = "best";
  int lp_degree = 24;
  std::optional<Real> kl_invert;

  std::string model = "minimalist";
  RankModel rank_model;
  SearchGrid grid;
  bool search = true;
  OptimizerParams params;

  unsigned n_max = 8;
  unsigned samples = 100;
  std::uint64_t seed = 1;
  std::optional<unsigned> psi;

  bool bullet_only = false;
  std::optional<Real> min_height;
  std::size_t worst_count = 100;
};

/// Validates every key before anything runs; all problems are reported
/// together in one ValidationError.
RunConfig resolve(const std::string& command, const KeyValues& kv);

/// Resolved settings that determine the result (threads and output paths excluded).
report::Json config_json(const RunConfig& cfg);

struct Outcome {
  report::Json result;
  std::string csv;  // filled for census and gap-survey
  bool passed = true;  // verify-identities: every identity held
};

Outcome execute(const RunConfig& cfg);

std::string usage();

/// Full command line entry: 0 ok, 1 validation error, 2 computation error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace icensus::cli
