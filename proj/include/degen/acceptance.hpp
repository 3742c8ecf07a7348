#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace degen {

/// Thresholds of the acceptance suite. Any field can be overridden from a
/// config [acceptance] table by name.
struct AcceptanceTolerances {
  double roots = 1e-12;
  double roots_seconds = 1.0;
  double constant_error = 1e-9;
  double constant_seconds = 5.0;
  double halving_ratio = 3.0;
  double decay_exponent = 1.5;
  double decay_tol = 0.05;
  double decay_r2 = 0.999;
  double manufactured_seconds = 60.0;
  double weighted_tol = 0.1;
  double weighted_trace = 0.05;
  double log_slope_tol = 0.05;
  double trace_discrepancy = 1e-3;
  double barrier_points = 1e5;
  double barrier_t_min = 1e-8;
  double barrier_seconds = 30.0;
  double agreement = 1e-6;
  int monotone_tail = 5;
  int continuation_steps = 40;
  double identity = 1e-12;
  int identity_samples = 1000;
  double identity_seconds = 1.0;
  int parser_cases = 30;
  int fuzz_inputs = 10000;

  static AcceptanceTolerances from_overrides(const nlohmann::json& overrides);
  nlohmann::json to_json() const;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  std::string detail;
  nlohmann::json metrics = nlohmann::json::object();
};

/// One PASS/FAIL line.
std::string format_result(const CriterionResult& r);

/// Runs criteria 1-10 in order (or only those listed in `only`).
std::vector<CriterionResult> run_acceptance(
    const AcceptanceTolerances& tol, std::uint64_t seed = 0,
    const std::function<void(const CriterionResult&)>& on_result = {},
    const std::vector<int>& only = {});

/// Parser precedence/associativity cases: input and fully parenthesized form.
const std::vector<std::pair<std::string, std::string>>& parser_precedence_cases();

struct FuzzOutcome {
  int inputs = 0;
  int accepted = 0;
  int rejected = 0;
  int crashes = 0;          // exceptions other than ParseError
  int bad_offsets = 0;      // ParseError offset beyond the input
  std::string first_problem;
};

/// Random token soup fed to the parser.
FuzzOutcome fuzz_parser(int inputs, std::uint64_t seed);

}  // namespace degen
