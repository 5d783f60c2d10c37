#include <doctest.h>

#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fadingfl/config.hpp"
#include "fadingfl/error.hpp"

using namespace fadingfl;

TEST_CASE("defaults round-trip through JSON") {
  const RunConfig defaults;
  CHECK(parse_run_config("{}") == defaults);
  const std::string text = serialize_run_config(defaults);
  CHECK(parse_run_config(text) == defaults);
  CHECK(serialize_run_config(parse_run_config(text)) == text);
}

TEST_CASE("a full document round-trips") {
  const char* doc = R"({
    "channels": [{"kind": "rayleigh", "sigma2": 0.5},
                 {"kind": "rician", "k_factor_db": 12},
                 {"kind": "nakagami", "m": 3, "sigma2": 1}],
    "quality_factors": [1, 10],
    "clients_per_round": [20],
    "policies": [{"kind": "sfl"}, {"kind": "frfl", "outage_target": 0.3},
                 {"kind": "frfl_fixed", "rate_bps": 250000}],
    "data_modes": ["noniid"],
    "budget_s": 12.5,
    "round_cap_s": 4,
    "payload_bits": 698880,
    "training": {"learning_rate": 0.02, "batch_size": 16},
    "noniid": {"min_classes": 2, "max_classes": 5},
    "synthetic": {"dim": 32, "separation": 7.5},
    "seeds": [3, 4],
    "output_dir": "out"
  })";
  const RunConfig cfg = parse_run_config(doc);
  CHECK(cfg.channels.size() == 3);
  CHECK(cfg.channels[1] == FadingModel::rician_db(12.0, 1.0));
  CHECK(cfg.policies[1] == Policy{FrflTargetPolicy{0.3}});
  CHECK(cfg.policies[2] == Policy{FrflFixedPolicy{250000}});
  CHECK(cfg.round_cap_s == 4.0);
  CHECK(cfg.payload_bits == 698880u);
  CHECK(cfg.hyper.learning_rate == 0.02);
  CHECK(cfg.hyper.momentum == 0.5);
  CHECK(cfg.hyper.batch_size == 16);
  CHECK(cfg.noniid.max_classes == 5);
  CHECK(cfg.noniid.max_samples == 600);
  CHECK(cfg.synthetic.spec.dim == 32);
  CHECK(cfg.output_dir == "out");
  CHECK(parse_run_config(serialize_run_config(cfg)) == cfg);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_run_config(R"({"bandwith_hz": 1e6})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"training": {"lr": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"channels": [{"kind": "rayleigh", "k": 1}]})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"policies": [{"kind": "sfl", "outage_target": 0.2}]})"), ConfigError);
}

TEST_CASE("malformed and invalid values are rejected") {
  CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[]"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"budget_s": "30"})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"budget_s": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"clients_per_round": [200]})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"policies": [{"kind": "frfl", "outage_target": 1.5}]})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"channels": [{"kind": "nakagami", "m": 0.2}]})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"channels": [{"kind": "weibull"}]})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"data_modes": ["sorted"]})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"training": {"momentum": 1.0}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"dataset": "cifar"})"), ConfigError);
}

TEST_CASE("empty grid axes are allowed") {
  const RunConfig cfg = parse_run_config(R"({"policies": []})");
  CHECK(cfg.expand_grid().empty());
}

TEST_CASE("grid expansion order and contents") {
  RunConfig cfg;
  const auto cells = cfg.expand_grid();
  REQUIRE(cells.size() == 1 * 2 * 3 * 3 * 2);
  CHECK(cells[0].label() == "rayleigh-A1-C10-sfl-iid");
  CHECK(cells[1].label() == "rayleigh-A1-C10-sfl-noniid");
  CHECK(cells[2].label() == "rayleigh-A1-C10-frfl0.2-iid");
  CHECK(cells[6].label() == "rayleigh-A1-C20-sfl-iid");
  CHECK(cells[18].label() == "rayleigh-A10-C10-sfl-iid");
  for (const auto& c : cells) {
    CHECK(c.budget_s == 30.0);
    CHECK(c.n_total == 100);
    CHECK(c.round_cap_s == std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
  CHECK(parse_seed_list("1,2,5-8") == std::vector<std::uint64_t>{1, 2, 5, 6, 7, 8});
  CHECK(parse_seed_list(" 3 , 4 ") == std::vector<std::uint64_t>{3, 4});
  CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("8-5"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("x"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("-3"), ConfigError);
}

TEST_CASE("shipped example configurations load") {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(std::filesystem::path(FADINGFL_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_run_config(entry.path()));
    ++count;
  }
  CHECK(count >= 3);
  CHECK(load_run_config(std::filesystem::path(FADINGFL_SOURCE_DIR) / "configs" / "all_channels.json")
            .expand_grid()
            .size() == 108);
}
