#include "fadingfl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <set>
#include <sstream>
#include <type_traits>

#include "fadingfl/error.hpp"
#include "overloaded.hpp"

namespace fadingfl {
namespace {

using nlohmann::json;

// Placeholder for a value about to be overwritten by a read.
template <typename T>
T blank() {
  if constexpr (std::is_same_v<T, FadingModel>) {
    return FadingModel::rayleigh();
  } else {
    return T{};
  }
}

// Reads keys from one JSON object and rejects any it was never asked about.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) read(*it, sub(key), out);
  }

  template <typename T>
  T require(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) fail(path_, std::string("missing key '") + key + "'");
    T out{};
    read(*it, sub(key), out);
    return out;
  }

  bool has(const char* key) const { return j_.contains(key); }

  // Reads a nested object with its own key check, if present.
  template <typename F>
  void nested(const char* key, F&& fn) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      ObjectReader inner(*it, sub(key));
      fn(inner);
      inner.finish();
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(path_, "unknown key '" + key + "'");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError((path.empty() ? std::string("config") : path) + ": " + what);
  }

 private:
  std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  static void read(const json& v, const std::string& path, double& out) {
    if (!v.is_number()) fail(path, "expected a number");
    out = v.get<double>();
  }
  static void read(const json& v, const std::string& path, bool& out) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    out = v.get<bool>();
  }
  static void read(const json& v, const std::string& path, std::string& out) {
    if (!v.is_string()) fail(path, "expected a string");
    out = v.get<std::string>();
  }
  template <typename T>
    requires std::is_integral_v<T> && (!std::is_same_v<T, bool>)
  static void read(const json& v, const std::string& path, T& out) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      fail(path, "expected a nonnegative integer");
    }
    const auto raw = v.get<std::uint64_t>();
    if (raw > std::numeric_limits<T>::max()) fail(path, "integer out of range");
    out = static_cast<T>(raw);
  }
  template <typename T>
  static void read(const json& v, const std::string& path, std::optional<T>& out) {
    if (v.is_null()) {
      out.reset();
      return;
    }
    T inner{};
    read(v, path, inner);
    out = inner;
  }
  template <typename T>
  static void read(const json& v, const std::string& path, std::vector<T>& out) {
    if (!v.is_array()) fail(path, "expected an array");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      T item = blank<T>();
      read(v[i], path + "[" + std::to_string(i) + "]", item);
      out.push_back(std::move(item));
    }
  }
  static void read(const json& v, const std::string& path, FadingModel& out);
  static void read(const json& v, const std::string& path, Policy& out);
  static void read(const json& v, const std::string& path, DataMode& out);

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Wraps factory std::invalid_argument as ConfigError with the key path.
template <typename F>
auto checked(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const std::invalid_argument& e) {
    ObjectReader::fail(path, e.what());
  }
}

void ObjectReader::read(const json& v, const std::string& path, FadingModel& out) {
  ObjectReader r(v, path);
  const auto kind = r.require<std::string>("kind");
  double sigma2 = 1.0;
  r.get("sigma2", sigma2);
  if (kind == "rayleigh") {
    out = checked(path, [&] { return FadingModel::rayleigh(sigma2); });
  } else if (kind == "rician") {
    if (r.has("k_factor") == r.has("k_factor_db")) {
      fail(path, "rician needs exactly one of 'k_factor' or 'k_factor_db'");
    }
    std::optional<double> linear;
    std::optional<double> db;
    r.get("k_factor", linear);
    r.get("k_factor_db", db);
    out = checked(path, [&] {
      return linear ? FadingModel::rician(*linear, sigma2) : FadingModel::rician_db(*db, sigma2);
    });
  } else if (kind == "nakagami") {
    const auto m = r.require<double>("m");
    out = checked(path, [&] { return FadingModel::nakagami(m, sigma2); });
  } else {
    fail(path, "unknown channel kind '" + kind + "'");
  }
  r.finish();
}

void ObjectReader::read(const json& v, const std::string& path, Policy& out) {
  ObjectReader r(v, path);
  const auto kind = r.require<std::string>("kind");
  if (kind == "sfl") {
    out = SflPolicy{};
  } else if (kind == "frfl") {
    out = FrflTargetPolicy{r.require<double>("outage_target")};
  } else if (kind == "frfl_fixed") {
    out = FrflFixedPolicy{r.require<double>("rate_bps")};
  } else {
    fail(path, "unknown policy kind '" + kind + "'");
  }
  r.finish();
  checked(path, [&] {
    validate_policy(out);
    return 0;
  });
}

void ObjectReader::read(const json& v, const std::string& path, DataMode& out) {
  std::string s;
  read(v, path, s);
  if (s == "iid") {
    out = DataMode::iid;
  } else if (s == "noniid") {
    out = DataMode::noniid;
  } else {
    fail(path, "data mode must be 'iid' or 'noniid'");
  }
}

json channel_json(const FadingModel& model) {
  return std::visit(
      detail::Overloaded{
          [](const RayleighParams& p) { return json{{"kind", "rayleigh"}, {"sigma2", p.sigma2}}; },
          [](const RicianParams& p) {
            return json{{"kind", "rician"}, {"k_factor", p.k_factor}, {"sigma2", p.sigma2}};
          },
          [](const NakagamiParams& p) {
            return json{{"kind", "nakagami"}, {"m", p.m}, {"sigma2", p.sigma2}};
          }},
      model.params());
}

json policy_json(const Policy& policy) {
  return std::visit(detail::Overloaded{
                        [](const SflPolicy&) { return json{{"kind", "sfl"}}; },
                        [](const FrflTargetPolicy& p) {
                          return json{{"kind", "frfl"}, {"outage_target", p.outage_target}};
                        },
                        [](const FrflFixedPolicy& p) {
                          return json{{"kind", "frfl_fixed"}, {"rate_bps", p.rate_bps}};
                        }},
                    policy);
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  require(n_total > 0, "n_total must be positive");
  for (const double a : quality_factors) require(a > 0.0 && std::isfinite(a), "quality_factors must be positive");
  for (const std::size_t c : clients_per_round) {
    require(c >= 1 && c <= n_total, "clients_per_round entries must lie in [1, n_total]");
  }
  require(bandwidth_hz > 0.0 && std::isfinite(bandwidth_hz), "bandwidth_hz must be positive");
  require(budget_s > 0.0 && std::isfinite(budget_s), "budget_s must be positive");
  require(local_compute_s >= 0.0 && std::isfinite(local_compute_s), "local_compute_s must be nonnegative");
  require(!round_cap_s || *round_cap_s > 0.0, "round_cap_s must be positive");
  require(bits_per_param > 0, "bits_per_param must be positive");
  require(!payload_bits || *payload_bits > 0, "payload_bits must be positive");
  require(samples_per_client > 0, "samples_per_client must be positive");
  require(noniid.min_samples <= noniid.max_samples, "noniid.min_samples exceeds max_samples");
  require(noniid.min_classes >= 1, "noniid.min_classes must be at least 1");
  require(noniid.max_classes == 0 || noniid.min_classes <= noniid.max_classes,
          "noniid.min_classes exceeds max_classes");
  require(rates_max_clients >= 1, "rates_max_clients must be at least 1");
  require(monte_carlo_rounds >= 1, "monte_carlo_rounds must be at least 1");
  require(synthetic.spec.classes >= 1 && synthetic.spec.dim >= 1, "synthetic shape must be positive");
  require(dataset == "synthetic" || dataset == "mnist" || dataset.rfind("mnist:", 0) == 0,
          "dataset must be 'synthetic', 'mnist' or 'mnist:<dir>'");
  try {
    hyper.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: training: ") + e.what());
  }
}

std::vector<ExperimentConfig> RunConfig::expand_grid() const {
  validate();
  std::vector<ExperimentConfig> cells;
  for (const auto& channel : channels) {
    for (const double a : quality_factors) {
      for (const std::size_t c : clients_per_round) {
        for (const auto& policy : policies) {
          for (const DataMode mode : data_modes) {
            ExperimentConfig cell;
            cell.n_total = n_total;
            cell.clients_per_round = c;
            cell.channel = channel;
            cell.bandwidth_hz = bandwidth_hz;
            cell.quality_factor = a;
            cell.policy = policy;
            cell.budget_s = budget_s;
            cell.local_compute_s = local_compute_s;
            if (round_cap_s) cell.round_cap_s = *round_cap_s;
            cell.data_mode = mode;
            cell.hyper = hyper;
            cell.hidden_layers = hidden_layers;
            cell.samples_per_client = samples_per_client;
            cell.noniid = noniid;
            cell.bits_per_param = bits_per_param;
            cell.payload_bits = payload_bits;
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  return cells;
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  ObjectReader r(j, "");
  r.get("channels", cfg.channels);
  r.get("quality_factors", cfg.quality_factors);
  r.get("clients_per_round", cfg.clients_per_round);
  r.get("policies", cfg.policies);
  r.get("data_modes", cfg.data_modes);
  r.get("n_total", cfg.n_total);
  r.get("bandwidth_hz", cfg.bandwidth_hz);
  r.get("budget_s", cfg.budget_s);
  r.get("local_compute_s", cfg.local_compute_s);
  r.get("round_cap_s", cfg.round_cap_s);
  r.get("hidden_layers", cfg.hidden_layers);
  r.get("bits_per_param", cfg.bits_per_param);
  r.get("payload_bits", cfg.payload_bits);
  r.get("samples_per_client", cfg.samples_per_client);
  r.get("seeds", cfg.seeds);
  r.get("dataset", cfg.dataset);
  r.get("output_dir", cfg.output_dir);
  r.get("rates_max_clients", cfg.rates_max_clients);
  r.get("monte_carlo_rounds", cfg.monte_carlo_rounds);
  r.nested("training", [&](ObjectReader& t) {
    t.get("learning_rate", cfg.hyper.learning_rate);
    t.get("momentum", cfg.hyper.momentum);
    t.get("local_epochs", cfg.hyper.local_epochs);
    t.get("batch_size", cfg.hyper.batch_size);
  });
  r.nested("noniid", [&](ObjectReader& n) {
    n.get("min_classes", cfg.noniid.min_classes);
    n.get("max_classes", cfg.noniid.max_classes);
    n.get("min_samples", cfg.noniid.min_samples);
    n.get("max_samples", cfg.noniid.max_samples);
  });
  r.nested("synthetic", [&](ObjectReader& s) {
    s.get("classes", cfg.synthetic.spec.classes);
    s.get("train_per_class", cfg.synthetic.spec.per_class);
    s.get("test_per_class", cfg.synthetic.test_per_class);
    s.get("dim", cfg.synthetic.spec.dim);
    s.get("separation", cfg.synthetic.spec.separation);
    s.get("noise", cfg.synthetic.spec.noise);
    s.get("seed", cfg.synthetic.seed);
  });
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  json channels = json::array();
  for (const auto& c : cfg.channels) channels.push_back(channel_json(c));
  json policies = json::array();
  for (const auto& p : cfg.policies) policies.push_back(policy_json(p));
  json modes = json::array();
  for (const DataMode m : cfg.data_modes) modes.push_back(to_string(m));

  json j;
  j["channels"] = channels;
  j["quality_factors"] = cfg.quality_factors;
  j["clients_per_round"] = cfg.clients_per_round;
  j["policies"] = policies;
  j["data_modes"] = modes;
  j["n_total"] = cfg.n_total;
  j["bandwidth_hz"] = cfg.bandwidth_hz;
  j["budget_s"] = cfg.budget_s;
  j["local_compute_s"] = cfg.local_compute_s;
  j["round_cap_s"] = optional_json(cfg.round_cap_s);
  j["hidden_layers"] = cfg.hidden_layers;
  j["bits_per_param"] = cfg.bits_per_param;
  j["payload_bits"] = optional_json(cfg.payload_bits);
  j["training"] = {{"learning_rate", cfg.hyper.learning_rate},
                   {"momentum", cfg.hyper.momentum},
                   {"local_epochs", cfg.hyper.local_epochs},
                   {"batch_size", cfg.hyper.batch_size}};
  j["samples_per_client"] = cfg.samples_per_client;
  j["noniid"] = {{"min_classes", cfg.noniid.min_classes},
                 {"max_classes", cfg.noniid.max_classes},
                 {"min_samples", cfg.noniid.min_samples},
                 {"max_samples", cfg.noniid.max_samples}};
  j["seeds"] = cfg.seeds;
  j["dataset"] = cfg.dataset;
  j["synthetic"] = {{"classes", cfg.synthetic.spec.classes},
                    {"train_per_class", cfg.synthetic.spec.per_class},
                    {"test_per_class", cfg.synthetic.test_per_class},
                    {"dim", cfg.synthetic.spec.dim},
                    {"separation", cfg.synthetic.spec.separation},
                    {"noise", cfg.synthetic.spec.noise},
                    {"seed", cfg.synthetic.seed}};
  j["output_dir"] = optional_json(cfg.output_dir);
  j["rates_max_clients"] = cfg.rates_max_clients;
  j["monte_carlo_rounds"] = cfg.monte_carlo_rounds;
  return j.dump(2) + "\n";
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto number = [&](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ConfigError("seeds: '" + std::string(s) + "' is not a nonnegative integer");
    }
    return v;
  };
  std::vector<std::uint64_t> seeds;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    if (const auto dash = item.find('-'); dash != std::string_view::npos) {
      const auto lo = number(item.substr(0, dash));
      const auto hi = number(item.substr(dash + 1));
      if (hi < lo || hi - lo > 1000000) throw ConfigError("seeds: bad range '" + std::string(item) + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(number(item));
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) throw ConfigError("seeds: trailing comma");
  }
  if (seeds.empty()) throw ConfigError("seeds: empty list");
  return seeds;
}

}  // namespace fadingfl
