#include "fadingfl/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fadingfl/quadrature.hpp"
#include "fadingfl/random.hpp"
#include "fadingfl/scheduler.hpp"
#include "fadingfl/stats.hpp"

namespace fadingfl {
namespace {

constexpr double kAlpha = 0.01;

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

class Report {
 public:
  void add(std::string name, std::string tolerance, double observed, bool passed) {
    results_.push_back({std::move(name), std::move(tolerance), observed, passed});
  }
  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::vector<CheckResult> results_;
};

void channel_checks(const FadingModel& model, const ValidationOptions& opt, std::uint64_t index,
                    Report& report) {
  const std::string prefix = "channel." + model.kind() + ".";

  RandomStream rng(opt.seed, StreamTag::monte_carlo, index);
  std::vector<double> draws(opt.gof_samples);
  for (double& h : draws) h = model.sample(rng);
  const double d = stats::ks_statistic(draws, [&](double h) { return model.cdf(h); });
  const double crit = stats::ks_critical_value(draws.size(), kAlpha);
  report.add(prefix + "ks_samples", fmt("D < %.5f (KS, 1%%)", crit), d, d < crit);

  double worst = 0.0;
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    worst = std::max(worst, std::abs(model.cdf(model.quantile(p)) - p));
  }
  report.add(prefix + "quantile_roundtrip", "max |F(q(p)) - p| <= 1e-8, p = 0.01..0.99", worst,
             worst <= 1e-8);

  const double mass = integrate([&](double h) { return model.pdf(h); }, 0.0, model.quantile(1.0 - 1e-12));
  report.add(prefix + "pdf_integral", "|integral of pdf - 1| <= 2e-3", std::abs(mass - 1.0),
             std::abs(mass - 1.0) <= 2e-3);

  const double h = model.quantile(0.5);
  const double step = 1e-5 * h;
  const double fd = (model.cdf(h + step) - model.cdf(h - step)) / (2.0 * step);
  const double rel = std::abs(fd - model.pdf(h)) / model.pdf(h);
  report.add(prefix + "pdf_matches_cdf_slope", "relative error <= 1e-4 at the median", rel, rel <= 1e-4);
}

void min_gain_checks(const FadingModel& model, std::size_t c, const ValidationOptions& opt,
                     std::uint64_t index, Report& report) {
  const std::string prefix = "min_gain." + model.kind() + ".C" + std::to_string(c) + ".";
  const MinGainStats stats(c, model);
  auto cdf = [&](double h) { return opt.min_gain_cdf(stats, h); };
  auto pdf = [&](double h) { return opt.min_gain_pdf(stats, h); };

  RandomStream rng(opt.seed, StreamTag::monte_carlo, index);
  std::vector<double> minima(opt.gof_samples);
  for (double& m : minima) {
    m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c; ++k) m = std::min(m, model.sample(rng));
  }

  const double d = stats::ks_statistic(minima, cdf);
  const double crit = stats::ks_critical_value(minima.size(), kAlpha);
  report.add(prefix + "ks", fmt("D < %.5f (KS, 1%%)", crit), d, d < crit);

  // Equiprobable bins under the reference order statistic; expected counts
  // come from integrating the density under test. `minima` is sorted.
  constexpr std::size_t bins = 50;
  std::vector<double> edges{0.0};
  for (std::size_t b = 1; b < bins; ++b) edges.push_back(stats.quantile(static_cast<double>(b) / bins));
  edges.push_back(std::numeric_limits<double>::infinity());
  std::vector<double> observed(bins, 0.0);
  std::vector<double> expected(bins, 0.0);
  const double n = static_cast<double>(minima.size());
  double below = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const auto lo = std::lower_bound(minima.begin(), minima.end(), edges[b]);
    const auto hi = std::lower_bound(minima.begin(), minima.end(), edges[b + 1]);
    observed[b] = static_cast<double>(hi - lo);
    if (b + 1 < bins) {
      expected[b] = n * integrate(pdf, edges[b], edges[b + 1]);
      below += expected[b];
    } else {
      expected[b] = n - below;
    }
  }
  const double chi2 = stats::chi_square_statistic(observed, expected);
  const double chi2_crit = stats::chi_square_critical_value(bins - 1, kAlpha);
  report.add(prefix + "chi2_pdf", fmt("X2 < %.2f (49 dof, 1%%)", chi2_crit), chi2, chi2 < chi2_crit);

  const double h = stats.quantile(0.5);
  const double step = 1e-5 * h;
  const double fd = (cdf(h + step) - cdf(h - step)) / (2.0 * step);
  const double rel = std::abs(fd - pdf(h)) / pdf(h);
  report.add(prefix + "pdf_matches_cdf_slope", "relative error <= 1e-4 at the median", rel, rel <= 1e-4);
}

void rate_checks(const FadingModel& model, double a, const ValidationOptions& opt, std::uint64_t index,
                 Report& report) {
  const std::string prefix = "min_rate." + model.kind() + ".A" + fmt("%g", a) + ".";
  const LinkConfig cfg{1e6, a, 1000000};
  for (const std::size_t c : {1u, 10u, 20u, 40u}) {
    const MinGainStats stats(c, model);
    const double quad = expected_min_rate(cfg, stats, QuadratureMethod{});
    const double mc = expected_min_rate(cfg, stats, MonteCarloMethod{opt.mc_rounds, opt.seed + index * 64 + c});
    const double rel = std::abs(quad - mc) / quad;
    report.add(prefix + "C" + std::to_string(c) + ".quadrature_vs_mc", "relative difference <= 0.5%", rel,
               rel <= 5e-3);

    // Jensen: E[Z / R_min] >= Z / E[R_min].
    RandomStream rng(opt.seed, StreamTag::monte_carlo, index * 64 + 32 + c);
    std::vector<double> gains(c);
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t r = 0; r < opt.mc_rounds; ++r) {
      for (double& h : gains) h = model.sample(rng);
      if (const auto t = sfl_round_duration(cfg, gains)) {
        total += *t;
        ++counted;
      }
    }
    const double mean_duration = counted == opt.mc_rounds ? total / static_cast<double>(counted)
                                                          : std::numeric_limits<double>::infinity();
    const double bound = static_cast<double>(cfg.payload_bits) / quad;
    const double ratio = mean_duration / bound;
    report.add(prefix + "C" + std::to_string(c) + ".jensen", "mean SFL duration / (Z / E[R_min]) >= 1", ratio,
               ratio >= 1.0);
  }
}

void outage_checks(const FadingModel& model, const ValidationOptions& opt, std::uint64_t index, Report& report) {
  for (const double a : {1.0, 10.0}) {
    for (const double eps : {0.2, 0.5}) {
      const std::string prefix =
          "outage." + model.kind() + ".A" + fmt("%g", a) + ".eps" + fmt("%g", eps) + ".";
      const LinkConfig cfg{1e6, a, 1000000};
      const RateSelection sel = frfl_select_rate(cfg, model, FrflTargetPolicy{eps}, 10);
      const double err = std::abs(outage_probability(cfg, model, sel.rate_bps) - eps);
      report.add(prefix + "rate_roundtrip", "|outage(R*) - eps| <= 1e-8", err, err <= 1e-8);

      RandomStream rng(opt.seed, StreamTag::monte_carlo, ++index);
      std::size_t failures = 0;
      for (std::size_t i = 0; i < opt.outage_samples; ++i) {
        if (achievable_rate(cfg, model.sample(rng)) < sel.rate_bps) ++failures;
      }
      const double freq = static_cast<double>(failures) / static_cast<double>(opt.outage_samples);
      const double z = (freq - eps) / stats::binomial_standard_error(eps, opt.outage_samples);
      report.add(prefix + "empirical", "|frequency - eps| <= 3 standard errors (|z| shown)", std::abs(z),
                 std::abs(z) <= 3.0);
    }
  }

  // Mean delivered updates per FRFL round at eps = 0.5 with C = 40.
  const LinkConfig cfg{1e6, 1.0, 1000000};
  const RateSelection sel = frfl_select_rate(cfg, model, FrflTargetPolicy{0.5}, 40);
  const Policy fixed = FrflFixedPolicy{sel.rate_bps};
  RandomStream rng(opt.seed, StreamTag::monte_carlo, ++index);
  std::vector<ClientId> selected(40);
  for (ClientId k = 0; k < 40; ++k) selected[k] = k;
  std::vector<double> gains(40);
  double sum = 0.0;
  for (std::size_t r = 0; r < opt.success_rounds; ++r) {
    for (double& h : gains) h = model.sample(rng);
    sum += static_cast<double>(execute_round(fixed, cfg, selected, gains).success_count());
  }
  const double mean = sum / static_cast<double>(opt.success_rounds);
  const double se = std::sqrt(40 * 0.25 / static_cast<double>(opt.success_rounds));
  const double z = (mean - 20.0) / se;
  report.add("successes." + model.kind() + ".C40.eps0.5", "|mean - 20| <= 3 standard errors (|z| shown)",
             std::abs(z), std::abs(z) <= 3.0);
}

}  // namespace

std::vector<FadingModel> reference_models() {
  return {FadingModel::rayleigh(1.0), FadingModel::rician_db(12.0, 1.0), FadingModel::nakagami(3.0, 1.0)};
}

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
  Report report;
  const auto models = reference_models();
  for (std::size_t m = 0; m < models.size(); ++m) {
    const std::uint64_t base = 1000 * (m + 1);
    channel_checks(models[m], options, base, report);
    for (const std::size_t c : {10u, 20u, 40u}) min_gain_checks(models[m], c, options, base + c, report);
    rate_checks(models[m], 1.0, options, base + 100, report);
    rate_checks(models[m], 10.0, options, base + 200, report);
    outage_checks(models[m], options, base + 300, report);
  }
  return report.take();
}

void write_validation_report(std::ostream& out, std::span<const CheckResult> results) {
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  std::size_t passed = 0;
  for (const auto& r : results) {
    char observed[32];
    std::snprintf(observed, sizeof observed, "%.4g", r.observed);
    out << (r.passed ? "PASS  " : "FAIL  ") << r.name << std::string(width - r.name.size() + 2, ' ')
        << "observed=" << observed << "  tolerance: " << r.tolerance << '\n';
    if (r.passed) ++passed;
  }
  out << passed << "/" << results.size() << " checks passed\n";
}

bool all_passed(std::span<const CheckResult> results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace fadingfl
