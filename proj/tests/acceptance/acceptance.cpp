// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Details for each criterion go to stdout
// above its verdict line.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fadingfl/commands.hpp"
#include "fadingfl/stats.hpp"

using namespace fadingfl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// Collects failed sub-checks for one criterion.
class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)) {}

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      failures_.push_back(what);
      std::printf("    fail: %s\n", what.c_str());
    }
  }
  bool passed() const { return failures_.empty(); }

  void verdict(int index, const std::string& summary) const {
    std::printf("%s  criterion %d: %s (%s)\n", passed() ? "PASS" : "FAIL", index, title_.c_str(),
                summary.c_str());
    std::fflush(stdout);
  }

 private:
  std::string title_;
  std::vector<std::string> failures_;
};

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

const std::vector<FadingModel>& models() {
  static const std::vector<FadingModel> m{FadingModel::rayleigh(1.0), FadingModel::rician_db(12.0, 1.0),
                                          FadingModel::nakagami(3.0, 1.0)};
  return m;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

// ---- 1 ---------------------------------------------------------------------

bool distribution_fidelity() {
  Criterion crit("distribution fidelity");
  const auto start = Clock::now();
  double worst_d_ratio = 0.0;
  for (const auto& m : models()) {
    RandomStream rng(101, StreamTag::monte_carlo);
    std::vector<double> xs(100000);
    for (double& x : xs) x = m.sample(rng);
    const double d = stats::ks_statistic(xs, [&](double h) { return m.cdf(h); });
    const double limit = stats::ks_critical_value(xs.size(), 0.01);
    worst_d_ratio = std::max(worst_d_ratio, d / limit);
    crit.expect(d < limit, m.describe() + " KS D=" + fmt("%.5f", d));

    double worst_rt = 0.0;
    for (int i = 1; i <= 999; ++i) {
      const double p = i / 1000.0;
      worst_rt = std::max(worst_rt, std::abs(m.cdf(m.quantile(p)) - p));
    }
    crit.expect(worst_rt <= 1e-8, m.describe() + " round trip " + fmt("%.3g", worst_rt));

    const double hi = m.quantile(1.0 - 1e-12);
    const double mass = integrate([&](double h) { return m.pdf(h); }, 0.0, hi);
    crit.expect(std::abs(mass - 1.0) <= 2e-3, m.describe() + " pdf mass " + fmt("%.6f", mass));
  }
  const double elapsed = seconds_since(start);
  crit.expect(elapsed < 30.0, "runtime " + fmt("%.1f s", elapsed));
  crit.verdict(1, "max D/D_crit " + fmt("%.3f", worst_d_ratio) + ", " + fmt("%.1f s", elapsed));
  return crit.passed();
}

// ---- 2 ---------------------------------------------------------------------

bool order_statistics() {
  Criterion crit("order statistics of the minimum gain");
  const std::size_t rounds = 100000;
  const std::size_t bins = 50;
  const double chi2_limit = stats::chi_square_critical_value(bins - 1, 0.01);
  double worst_d_ratio = 0.0;
  double worst_chi2 = 0.0;
  for (const auto& m : models()) {
    for (const std::size_t c : {10u, 20u, 40u}) {
      const MinGainStats s(c, m);
      RandomStream rng(200 + c, StreamTag::monte_carlo);
      std::vector<double> mins(rounds);
      for (double& v : mins) {
        v = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c; ++k) v = std::min(v, m.sample(rng));
      }
      const std::string tag = m.describe() + " C=" + std::to_string(c);

      const double d = stats::ks_statistic(mins, [&](double h) { return min_gain_cdf(s, h); });
      const double limit = stats::ks_critical_value(rounds, 0.01);
      worst_d_ratio = std::max(worst_d_ratio, d / limit);
      crit.expect(d < limit, tag + " KS D=" + fmt("%.5f", d));

      // Chi-square on equiprobable bins; expected counts from the integrated pdf.
      std::vector<double> edges{0.0};
      for (std::size_t b = 1; b < bins; ++b) edges.push_back(s.quantile(static_cast<double>(b) / bins));
      edges.push_back(s.quantile(1.0 - 1e-12));
      std::vector<double> observed(bins, 0.0), expected(bins, 0.0);
      for (const double v : mins) {
        const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
        observed[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
      }
      for (std::size_t b = 0; b < bins; ++b) {
        expected[b] = rounds * integrate([&](double h) { return min_gain_pdf(s, h); }, edges[b], edges[b + 1]);
      }
      const double chi2 = stats::chi_square_statistic(observed, expected);
      worst_chi2 = std::max(worst_chi2, chi2);
      crit.expect(chi2 < chi2_limit, tag + " chi2=" + fmt("%.2f", chi2));
    }
  }
  crit.verdict(2, "max D/D_crit " + fmt("%.3f", worst_d_ratio) + ", max chi2 " + fmt("%.1f", worst_chi2) +
                      " < " + fmt("%.1f", chi2_limit));
  return crit.passed();
}

// ---- 3 ---------------------------------------------------------------------

bool rate_curve_shape() {
  Criterion crit("expected minimum rate curve shape");
  const std::size_t max_c = 40;
  double worst_rel = 0.0;
  double rayleigh_drop = 0.0;
  for (const double a : {1.0, 10.0}) {
    const LinkConfig link{1.0, a, 1};
    std::vector<std::vector<double>> curves;
    for (const auto& m : models()) {
      std::vector<double> quad;
      for (std::size_t c = 1; c <= max_c; ++c) quad.push_back(expected_min_rate(link, MinGainStats(c, m)));
      const auto mc = expected_min_rate_curve_mc(link, m, max_c, MonteCarloMethod{100000, 7});
      const std::string tag = m.describe() + " A=" + fmt("%g", a);
      for (std::size_t i = 0; i < max_c; ++i) {
        const double rel = std::abs(mc[i] - quad[i]) / quad[i];
        worst_rel = std::max(worst_rel, rel);
        crit.expect(rel <= 0.005, tag + " C=" + std::to_string(i + 1) + " quadrature vs MC " + fmt("%.4f", rel));
        if (i > 0) crit.expect(quad[i] < quad[i - 1], tag + " not decreasing at C=" + std::to_string(i + 1));
      }
      curves.push_back(quad);
    }
    if (a == 1.0) {
      rayleigh_drop = curves[0][9] / curves[0][0];
      crit.expect(rayleigh_drop < 0.5, "Rayleigh A=1 C=10 / C=1 = " + fmt("%.3f", rayleigh_drop));
    }
    // Faster decay: lower value relative to the single-client rate.
    for (std::size_t i = 9; i < max_c; ++i) {
      const double ray = curves[0][i] / curves[0][0];
      const double rice = curves[1][i] / curves[1][0];
      const double naka = curves[2][i] / curves[2][0];
      crit.expect(ray < rice && ray < naka,
                  "A=" + fmt("%g", a) + " C=" + std::to_string(i + 1) + " Rayleigh does not decay fastest");
    }
  }
  crit.verdict(3, "Rayleigh A=1 C=10/C=1 " + fmt("%.3f", rayleigh_drop) + ", max quadrature/MC diff " +
                      fmt("%.4f", worst_rel));
  return crit.passed();
}

// ---- 4 ---------------------------------------------------------------------

bool outage_calibration() {
  Criterion crit("outage calibration");
  const std::size_t draws = 1000000;
  double worst_z = 0.0;
  for (const auto& m : models()) {
    for (const double a : {1.0, 10.0}) {
      for (const double eps : {0.2, 0.5}) {
        const LinkConfig link{1e6, a, 1'628'480};
        const RateSelection sel = frfl_select_rate(link, m, FrflTargetPolicy{eps}, 20);
        RandomStream rng(400 + static_cast<std::uint64_t>(a * 10 + eps * 100), StreamTag::monte_carlo);
        std::size_t failures = 0;
        for (std::size_t i = 0; i < draws; ++i) {
          if (achievable_rate(link, m.sample(rng)) < sel.rate_bps) ++failures;
        }
        const double freq = static_cast<double>(failures) / draws;
        const double z = std::abs(freq - eps) / stats::binomial_standard_error(eps, draws);
        worst_z = std::max(worst_z, z);
        crit.expect(z <= 3.0, m.describe() + " A=" + fmt("%g", a) + " eps=" + fmt("%g", eps) +
                                  " failure fraction " + fmt("%.5f", freq));
      }
    }
  }
  // Mean successes per round at C = 40, eps = 0.5 through the round executor.
  double worst_success_z = 0.0;
  for (const auto& m : models()) {
    const LinkConfig link{1e6, 1.0, 1'628'480};
    const Policy fixed = FrflFixedPolicy{frfl_select_rate(link, m, FrflTargetPolicy{0.5}, 40).rate_bps};
    RandomStream sel_rng(450, StreamTag::selection), ch_rng(450, StreamTag::channel);
    const std::size_t rounds = 20000;
    double total = 0.0;
    std::vector<double> gains(40);
    for (std::size_t r = 0; r < rounds; ++r) {
      const auto selected = select_clients(100, 40, sel_rng);
      for (double& h : gains) h = m.sample(ch_rng);
      total += static_cast<double>(execute_round(fixed, link, selected, gains).success_count());
    }
    const double mean = total / rounds;
    const double se = std::sqrt(40 * 0.25 / rounds);
    const double z = std::abs(mean - 20.0) / se;
    worst_success_z = std::max(worst_success_z, z);
    crit.expect(z <= 3.0, m.describe() + " mean successes " + fmt("%.3f", mean));
  }
  crit.verdict(4, "max |z| outage " + fmt("%.2f", worst_z) + ", successes " + fmt("%.2f", worst_success_z));
  return crit.passed();
}

// ---- 5 ---------------------------------------------------------------------

bool jensen_bound() {
  Criterion crit("Jensen bound on SFL round duration");
  const std::uint64_t z_bits = 1'628'480;
  double rayleigh_min_margin = std::numeric_limits<double>::infinity();
  for (const auto& m : models()) {
    for (const double a : {1.0, 10.0}) {
      for (const std::size_t c : {10u, 20u, 40u}) {
        const LinkConfig link{1e6, a, z_bits};
        const double bound = static_cast<double>(z_bits) / expected_min_rate(link, MinGainStats(c, m));
        RandomStream rng(500 + c, StreamTag::monte_carlo);
        std::vector<double> gains(c);
        const std::size_t rounds = 100000;
        double total = 0.0;
        for (std::size_t r = 0; r < rounds; ++r) {
          for (double& h : gains) h = m.sample(rng);
          total += sfl_round_duration(link, gains).value_or(std::numeric_limits<double>::infinity());
        }
        const double mean = total / rounds;
        const std::string tag = m.describe() + " A=" + fmt("%g", a) + " C=" + std::to_string(c);
        crit.expect(mean >= bound, tag + " mean " + fmt("%.4f", mean) + " < bound " + fmt("%.4f", bound));
        if (m.kind() == "rayleigh" && a == 1.0) {
          rayleigh_min_margin = std::min(rayleigh_min_margin, mean / bound - 1.0);
          crit.expect(mean >= 1.01 * bound, tag + " margin below 1%");
        }
      }
    }
  }
  crit.verdict(5, "smallest Rayleigh A=1 margin " + fmt("%.1f%%", 100.0 * rayleigh_min_margin));
  return crit.passed();
}

// ---- 6 ---------------------------------------------------------------------

bool learning_correctness() {
  Criterion crit("learning correctness");
  // Finite differences on a small network with a hidden layer.
  const DenseNetwork net({4, 5, 3});
  RandomStream rng(600);
  Dataset data{4, 3, {}, {}};
  std::vector<float> x(4);
  for (int i = 0; i < 12; ++i) {
    for (float& v : x) v = static_cast<float>(rng.normal());
    data.push_back(x, static_cast<std::uint8_t>(i % 3));
  }
  std::vector<std::size_t> batch(data.size());
  std::iota(batch.begin(), batch.end(), 0);
  const ModelParams params = net.initialize(rng);
  std::vector<double> grad;
  net.loss_and_gradient(params, data, batch, &grad);
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    ModelParams up = params, down = params;
    up.values[p] += 1e-6;
    down.values[p] -= 1e-6;
    const double fd = (mean_loss(net, up, data, batch) - mean_loss(net, down, data, batch)) / 2e-6;
    worst = std::max(worst, std::abs(fd - grad[p]) / std::max({std::abs(fd), std::abs(grad[p]), 1e-6}));
  }
  crit.expect(worst < 1e-4, "finite-difference relative error " + fmt("%.3g", worst));

  // Weighted-average examples.
  const auto vec = [](std::vector<double> v) { return ModelParams{{v.size()}, std::move(v)}; };
  const ModelParams zero = vec({0.0, 0.0});
  crit.expect(fedavg_aggregate(std::vector<ClientUpdate>{{vec({1, 1}), 1}, {vec({5, 9}), 3}}, zero).values ==
                  std::vector<double>{4.0, 7.0},
              "[1,1]x1 + [5,9]x3 != [4,7]");
  crit.expect(fedavg_aggregate(std::vector<ClientUpdate>{{vec({2.5, -1}), 4}, {vec({-2.5, 1}), 4}}, zero).values ==
                  std::vector<double>{0.0, 0.0},
              "v and -v do not cancel");
  const ModelParams one = vec({0.1, 0.7});
  crit.expect(fedavg_aggregate(std::vector<ClientUpdate>{{std::nullopt, 0}, {one, 17}}, zero) == one,
              "single survivor not copied");

  // Dropout equivalence on random cases.
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + rng.index(6);
    std::vector<ClientUpdate> present, mixed;
    const std::size_t n = 1 + rng.index(8);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> v(dim);
      for (double& w : v) w = rng.normal();
      const ClientUpdate u{vec(v), 1 + rng.index(600)};
      present.push_back(u);
      if (rng.index(2) == 0) mixed.push_back({std::nullopt, 0});
      mixed.push_back(u);
    }
    mixed.push_back({std::nullopt, 0});
    const ModelParams prev = vec(std::vector<double>(dim, 0.0));
    if (!(fedavg_aggregate(present, prev) == fedavg_aggregate(mixed, prev))) ++mismatches;
  }
  crit.expect(mismatches == 0, std::to_string(mismatches) + " dropout-equivalence mismatches");
  crit.verdict(6, "max FD error " + fmt("%.2g", worst) + ", dropout mismatches " + std::to_string(mismatches) +
                      "/1000");
  return crit.passed();
}

// ---- 7 and 8 ---------------------------------------------------------------

std::size_t find_cell(const TrainResult& r, const std::string& label) {
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    if (r.cells[i].label() == label) return i;
  }
  throw std::runtime_error("cell not in the default grid: " + label);
}

const ExperimentTrace& trace_of(const TrainResult& r, std::size_t cell, std::size_t seed_index) {
  return *r.grid.runs.at(cell * r.seeds.size() + seed_index).trace;
}

bool headline_ordering(std::size_t jobs) {
  Criterion crit("headline ordering on the default grid");
  const RunConfig config;  // defaults: 36 cells x 5 seeds on synthetic data
  const auto start = Clock::now();
  const DatasetPair data = load_dataset(config);
  const TrainResult result = run_training(config, data, jobs);
  const double elapsed = seconds_since(start);
  std::printf("    default grid: %zu cells x %zu seeds in %.1f s on %zu thread(s)\n", result.cells.size(),
              result.seeds.size(), elapsed, jobs);
  crit.expect(result.grid.all_succeeded(), "some replicates failed");
  crit.expect(elapsed < 1800.0, "default grid took " + fmt("%.0f s", elapsed));
  if (!result.grid.all_succeeded()) {
    crit.verdict(7, "grid failures");
    return false;
  }

  const std::size_t sfl = find_cell(result, "rayleigh-A1-C20-sfl-noniid");
  const std::size_t f02 = find_cell(result, "rayleigh-A1-C20-frfl0.2-noniid");
  const std::size_t f05 = find_cell(result, "rayleigh-A1-C20-frfl0.5-noniid");
  std::size_t faster = 0;
  double t_sfl_sum = 0.0, t_frfl_sum = 0.0;
  std::size_t both = 0;
  for (std::size_t s = 0; s < result.seeds.size(); ++s) {
    const auto& a = trace_of(result, sfl, s);
    const auto& b = trace_of(result, f02, s);
    const auto& c = trace_of(result, f05, s);
    const auto t_sfl = time_to_accuracy(a, 0.9);
    const auto t_frfl = time_to_accuracy(c, 0.9);
    std::printf("    seed %llu: rounds SFL %zu, FRFL0.2 %zu, FRFL0.5 %zu; t90 SFL %s, FRFL0.5 %s\n",
                static_cast<unsigned long long>(result.seeds[s]), a.rounds_completed(), b.rounds_completed(),
                c.rounds_completed(), t_sfl ? fmt("%.2f s", *t_sfl).c_str() : "not reached",
                t_frfl ? fmt("%.2f s", *t_frfl).c_str() : "not reached");
    const std::string seed = "seed " + std::to_string(result.seeds[s]);
    crit.expect(b.rounds_completed() > a.rounds_completed(), seed + ": FRFL0.2 rounds not above SFL");
    crit.expect(c.rounds_completed() > a.rounds_completed(), seed + ": FRFL0.5 rounds not above SFL");
    if (t_frfl && (!t_sfl || *t_frfl < *t_sfl)) ++faster;
    if (t_sfl && t_frfl) {
      t_sfl_sum += *t_sfl;
      t_frfl_sum += *t_frfl;
      ++both;
    }
  }
  crit.expect(faster >= 4, "FRFL0.5 reaches 90% first on only " + std::to_string(faster) + "/5 seeds");
  const std::string reduction =
      both > 0 ? fmt("%.0f%%", 100.0 * (1.0 - t_frfl_sum / t_sfl_sum)) + " over " + std::to_string(both) +
                     " seeds where both reach 90%"
               : std::string("no seed where both reach 90%");
  std::printf("    time-to-90%% reduction FRFL0.5 vs SFL: %s\n", reduction.c_str());
  crit.verdict(7, "FRFL0.5 faster on " + std::to_string(faster) + "/5 seeds, reduction " + reduction + ", grid " +
                      fmt("%.0f s", elapsed));
  return crit.passed();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool determinism(std::size_t jobs) {
  Criterion crit("byte-identical rerun");
  RunConfig config;
  config.quality_factors = {1.0};
  config.clients_per_round = {20};
  config.data_modes = {DataMode::noniid};
  config.seeds = {1, 2};
  const auto base = std::filesystem::temp_directory_path() / "fadingfl_acceptance";
  std::filesystem::remove_all(base);
  std::ostringstream log;
  const int first = train_command(config, base / "first", jobs, log);
  const int second = train_command(config, base / "second", 1, log);
  crit.expect(first == 0 && second == 0, "train failed:\n" + log.str());
  std::size_t bytes = 0;
  for (const char* name : {"traces.csv", "summary.csv"}) {
    const std::string a = slurp(base / "first" / name);
    const std::string b = slurp(base / "second" / name);
    bytes += a.size();
    crit.expect(!a.empty() && a == b, std::string(name) + " differs between runs");
  }
  std::filesystem::remove_all(base);
  crit.verdict(8, std::to_string(bytes) + " bytes compared, " + std::to_string(jobs) + " vs 1 thread(s)");
  return crit.passed();
}

}  // namespace

int main() {
  const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  int failed = 0;
  const std::vector<std::function<bool()>> criteria{
      distribution_fidelity, order_statistics, rate_curve_shape, outage_calibration, jensen_bound,
      learning_correctness, [&] { return headline_ordering(jobs); }, [&] { return determinism(jobs); }};
  for (const auto& c : criteria) {
    try {
      if (!c()) ++failed;
    } catch (const std::exception& e) {
      std::printf("FAIL  criterion raised: %s\n", e.what());
      ++failed;
    }
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
