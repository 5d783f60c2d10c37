#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fadingfl/linkmath.hpp"

namespace fadingfl {

struct CheckResult {
  std::string name;
  std::string tolerance;  // human-readable acceptance rule
  double observed = 0.0;
  bool passed = false;
};

using MinGainFunction = std::function<double(const MinGainStats&, double)>;

struct ValidationOptions {
  std::size_t gof_samples = 100000;      // KS / chi-square sample size
  std::size_t mc_rounds = 100000;        // E[R_min] and Jensen Monte Carlo
  std::size_t outage_samples = 1000000;  // client-rounds per outage check
  std::size_t success_rounds = 10000;    // FRFL rounds for the mean-success check
  std::uint64_t seed = 1;
  // The min-gain checks evaluate these, so a deliberately broken version can
  // be substituted to confirm the checks catch it.
  MinGainFunction min_gain_cdf = fadingfl::min_gain_cdf;
  MinGainFunction min_gain_pdf = fadingfl::min_gain_pdf;
};

/// Models exercised by the report: Rayleigh(1), Rician(12 dB, 1), Nakagami(3, 1).
std::vector<FadingModel> reference_models();

/// Runs every analytic-vs-Monte Carlo check on the reference models.
std::vector<CheckResult> run_validation(const ValidationOptions& options = {});

/// One line per check: status, name, observed value, tolerance.
void write_validation_report(std::ostream& out, std::span<const CheckResult> results);

bool all_passed(std::span<const CheckResult> results);

}  // namespace fadingfl
