#include <doctest.h>

#include <fstream>
#include <sstream>

#include "crn/errors.hpp"
#include "crn/pipeline.hpp"

using namespace crn;
using nlohmann::json;

namespace {

std::string config_path(const std::string& name) { return std::string(CRN_CONFIG_DIR) + "/" + name; }

PipelineConfig small_m5() {
  auto cfg = load_config(config_path("mass_transfer_m5.json"));
  cfg.n_samples = 400;
  cfg.n_discovery = 4000;
  cfg.data.points = 8;
  return cfg;
}

json strip_timing(json j) {
  j.erase("timing");
  return j;
}

json base_json() {
  std::ifstream in(config_path("mass_transfer_m5.json"));
  return json::parse(in);
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = load_config(config_path("mass_transfer_m5.json"));
  CHECK(cfg.network.reaction_count() == 5);
  CHECK(cfg.true_reactions == std::vector<int>{0, 1, 2, 3});
  CHECK(cfg.synthesis_mode());
  CHECK(cfg.true_network().reaction_count() == 4);
  CHECK(cfg.n_samples == 2000);
  CHECK(cfg.n_discovery == 20000);
  CHECK(cfg.seed == 2011);
  CHECK(cfg.measure.alpha == 1.5);
  CHECK(cfg.data.points == 50);
  CHECK(cfg.data.ssa.x0 == std::vector<std::int64_t>{1000, 0, 0, 0});
  CHECK(cfg.data.ssa.t_grid.size() == 20);
  CHECK(cfg.optimizer.effective_restarts(5) == 16);

  const auto planar = load_config(config_path("planar.json"));
  CHECK_FALSE(planar.synthesis_mode());
  CHECK(planar.network.species.size() == 2);
  CHECK_THROWS_AS(planar.true_network(), ConfigError);

  for (int m = 6; m <= 9; ++m)
    CHECK(load_config(config_path("mass_transfer_m" + std::to_string(m) + ".json")).network.reaction_count() == m);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(load_config(config_path("missing.json")), ConfigError);
  auto bad = [](auto edit) {
    json j = base_json();
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["unknown_key"] = 1; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["schema_version"] = 2; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["true_reactions"] = {0, 1}; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["true_reactions"] = {1, 9}; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["reactions"].push_back("B7"); })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["measure"]["alpha"] = -1; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["measure"]["kind"] = "uniform"; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["volume"]["n_samples"] = 0; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["optimizer"]["method"] = "newton"; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["data"]["grid"]["count"] = 0; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j["seed"] = "x"; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& j) { j.erase("reactions"); })), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("config echo round-trips") {
  const auto cfg = load_config(config_path("mass_transfer_m7.json"));
  const json echo = config_to_json(cfg);
  const auto again = parse_config(echo);
  CHECK(config_to_json(again) == echo);
  CHECK(again.network.reactions == cfg.network.reactions);
  CHECK(again.true_reactions == cfg.true_reactions);
}

TEST_CASE("stage seeds are distinct and deterministic") {
  const auto a = stage_seeds(2011), b = stage_seeds(2011), c = stage_seeds(2012);
  CHECK(a.datagen == b.datagen);
  CHECK(a.optimizer == b.optimizer);
  CHECK(a.datagen != a.discovery);
  CHECK(a.volume != a.optimizer);
  CHECK(a.volume != c.volume);
}

TEST_CASE("dataset csv round trip") {
  const auto cfg = small_m5();
  auto rows = run_simulate(cfg);
  REQUIRE(rows.size() == 8);
  rows[3].converged = false;
  std::stringstream ss;
  write_dataset_csv(ss, cfg.network.species, rows);
  const auto back = read_dataset_csv(ss, cfg.network.species);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].id == rows[i].id);
    CHECK(back[i].k == rows[i].k);
    CHECK(back[i].standard_errors == rows[i].standard_errors);
    CHECK(back[i].converged == rows[i].converged);
    CHECK(back[i].residual_norm == rows[i].residual_norm);
  }
}

TEST_CASE("dataset csv errors") {
  const SpeciesSet sp({"A0", "A1", "A2", "A3"});
  auto read = [&](const std::string& text) {
    std::istringstream in(text);
    return read_dataset_csv(in, sp);
  };
  CHECK_THROWS_AS(read(""), DataError);
  CHECK_THROWS_AS(read("id,K_B0\n"), DataError);
  CHECK_THROWS_AS(read("id,K_A0,K_A1,K_A2,K_A3\n1,-1,0.5,x,0.5\n"), DataError);
  CHECK_THROWS_AS(read("id,K_A0,K_A1,K_A2,K_A3\n1,-1,0.5\n"), DataError);
  const auto ok = read("id,K_A0,K_A1,K_A2,K_A3\n1,-1,0.5,0.25,0.5\n");
  REQUIRE(ok.size() == 1);
  CHECK(ok[0].converged);
  CHECK(ok[0].k(2) == 0.25);
}

TEST_CASE("simulate needs a true network") {
  auto cfg = load_config(config_path("planar.json"));
  CHECK_THROWS_AS(run_simulate(cfg), ConfigError);
  auto one = small_m5();
  one.data.points = 1;
  CHECK(run_simulate(one).size() == 1);
}

TEST_CASE("inference is deterministic apart from timing") {
  const auto cfg = small_m5();
  const auto a = run_infer(cfg);
  const auto b = run_infer(cfg);
  CHECK(strip_timing(infer_report(cfg, a)) == strip_timing(infer_report(cfg, b)));
  CHECK(a.fit.support == std::vector<int>{0, 1, 2, 3});
  CHECK(a.assignment.counts.total() + a.assignment.flagged() >= 8 - a.dropped_unsupported);
}

TEST_CASE("stages compose through the csv file format") {
  const auto cfg = small_m5();
  const auto rows = run_simulate(cfg);
  std::stringstream ss;
  write_dataset_csv(ss, cfg.network.species, rows);
  const auto back = read_dataset_csv(ss, cfg.network.species);
  const auto direct = run_infer(cfg);
  const auto staged = run_infer(cfg, &back);
  CHECK(staged.fit.best_neg_ll == direct.fit.best_neg_ll);
  CHECK(staged.fit.best_theta == direct.fit.best_theta);
  CHECK(staged.assignment.counts.u == direct.assignment.counts.u);
}

TEST_CASE("data outside every block is a data error") {
  const auto cfg = small_m5();
  std::vector<DataRow> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[static_cast<std::size_t>(i)].id = i + 1;
    rows[static_cast<std::size_t>(i)].k = (RateVector(4) << 1, 0, 0, 0).finished();
    rows[static_cast<std::size_t>(i)].standard_errors = Eigen::VectorXd::Zero(4);
  }
  CHECK_THROWS_AS(run_infer(cfg, &rows), DataError);
  std::vector<DataRow> wrong(1);
  wrong[0].k = RateVector::Zero(3);
  CHECK_THROWS_AS(run_infer(cfg, &wrong), DataError);
}

TEST_CASE("geometry summaries") {
  auto five = small_m5();
  const auto g5 = run_geometry(five);
  const auto s5 = summarize_report(geometry_report(five, g5));
  CHECK(s5.kind == "geometry");
  CHECK(s5.cones == 5);
  CHECK(s5.nondegenerate == 5);
  CHECK(s5.blocks == 6);
  CHECK(s5.d_eff == 4);
  CHECK_FALSE(s5.has_fit);

  auto ex1 = load_config(config_path("identifiability.json"));
  ex1.n_samples = 300;
  ex1.n_discovery = 4000;
  const auto s1 = summarize_report(geometry_report(ex1, run_geometry(ex1)));
  CHECK(s1.cones == 10);
  CHECK(s1.nondegenerate == 8);
  CHECK(s1.blocks == 5);
  CHECK(s1.d_eff == 3);
}

TEST_CASE("report summaries and plot tables") {
  const auto cfg = small_m5();
  const auto r = run_infer(cfg);
  const json report = infer_report(cfg, r);
  const auto s = summarize_report(report);
  CHECK(s.kind == "infer");
  CHECK(s.has_fit);
  CHECK(s.support == std::vector<int>{1, 2, 3, 4});
  CHECK(s.neg_ll == doctest::Approx(r.fit.best_neg_ll));
  const std::string text = format_summary(s);
  CHECK(text.find("5") != std::string::npos);

  const auto tables = plot_tables(report);
  for (const char* key : {"volumes", "theta", "minima", "points"}) {
    REQUIRE(tables.count(key) == 1);
    CHECK(tables.at(key).find('\n') != std::string::npos);
  }
  CHECK_THROWS_AS(summarize_report(json::object()), DataError);
  CHECK_THROWS_AS(summarize_report(json{{"kind", "other"}}), DataError);
}

TEST_CASE("console block format") {
  FitResult fit;
  fit.best_neg_ll = 33.1874;
  fit.best_theta = (Theta(5) << 1, 1, 1, 1, 1e-9).finished();
  fit.best_hits = 16;
  fit.restarts = 16;
  fit.success_rate = 1.0;
  const std::string text = console_block(fit);
  CHECK(text.find("Minimum of negative log-likelihood: 33.19") != std::string::npos);
  CHECK(text.find("Theta:") != std::string::npos);
  CHECK(text.find("Hits: 16 out of 16, 100%.") != std::string::npos);
  CHECK(text.find("1e-09") == std::string::npos);
}

TEST_CASE("cone labels") {
  CHECK(cone_label({0, 1, 3}, 5) == "124");
  CHECK(cone_label({0, 9}, 12) == "1,10");
}
