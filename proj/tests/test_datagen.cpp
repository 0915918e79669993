#include <doctest.h>

#include <cmath>

#include "crn/datagen.hpp"
#include "crn/errors.hpp"
#include "crn/parallel.hpp"
#include "crn/presets.hpp"

using namespace crn;

namespace {

Eigen::VectorXd x0_of(const SsaConfig& cfg) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(cfg.x0.size()));
  for (std::size_t i = 0; i < cfg.x0.size(); ++i) x(static_cast<Eigen::Index>(i)) = double(cfg.x0[i]);
  return x;
}

}  // namespace

TEST_CASE("gamma rate draws have the right mean") {
  const auto net = presets::mass_transfer_true();
  auto eng = rng::make_engine(1);
  const int n = 20000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n / 4; ++i)
    for (double r : draw_rates(net, 1.5, 2.0, eng)) {
      CHECK(r > 0.0);
      sum += r;
      sq += r * r;
    }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean - 0.75) < 4 * std::sqrt(1.5 / 4.0 / n));  // mean alpha/lambda, var alpha/lambda^2
  CHECK(var == doctest::Approx(0.375).epsilon(0.1));
  CHECK_THROWS_AS(draw_rates(net, 0.0, 1.0, eng), ConfigError);
}

TEST_CASE("stochastic trajectories respect stoichiometry") {
  const auto net = presets::mass_transfer_true();
  const auto cfg = default_ssa_config(net);
  auto eng = rng::make_engine(3);
  const std::vector<double> rates = {1.0, 0.5, 0.7, 0.3};
  const auto tr = simulate_ssa(net, rates, cfg, eng, true);
  REQUIRE(tr.states.rows() == 20);
  REQUIRE(tr.states.cols() == 4);
  std::int64_t prev_src = 1000;
  for (Eigen::Index i = 0; i < tr.states.rows(); ++i) {
    CHECK(tr.states(i, 0) <= prev_src);
    prev_src = tr.states(i, 0);
    for (Eigen::Index s = 0; s < 4; ++s) CHECK(tr.states(i, s) >= 0);
  }
  for (std::size_t j = 1; j < tr.jumps.size(); ++j) CHECK(tr.jumps[j].time >= tr.jumps[j - 1].time);
  std::int64_t fired_by_end = 0;
  for (const auto& j : tr.jumps) fired_by_end += j.time <= cfg.t_grid.back() ? 1 : 0;
  CHECK(1000 - tr.states(19, 0) == fired_by_end);
  // A3 gains 1 from R1 and 2 from R4.
  std::int64_t a3 = 0;
  for (const auto& j : tr.jumps)
    if (j.time <= cfg.t_grid.back()) a3 += j.reaction == 0 ? 1 : j.reaction == 3 ? 2 : 0;
  CHECK(tr.states(19, 3) == a3);
}

TEST_CASE("ensemble mean matches the closed form") {
  const auto net = presets::mass_transfer_true();
  const auto cfg = default_ssa_config(net);
  const std::vector<double> rates = {0.8, 0.4, 1.1, 0.6};
  const auto k = rate_vector(net, rates);
  const auto expect = closed_form(k, x0_of(cfg), 0, cfg.t_grid);
  const int n = 400;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(20, 4), sq = Eigen::MatrixXd::Zero(20, 4);
  for (int i = 0; i < n; ++i) {
    auto eng = rng::make_engine(1000 + static_cast<std::uint64_t>(i));
    const Eigen::MatrixXd x = simulate_ssa(net, rates, cfg, eng).states.cast<double>();
    sum += x;
    sq += x.cwiseProduct(x);
  }
  const Eigen::MatrixXd mean = sum / n;
  int outside = 0;
  for (Eigen::Index t = 0; t < 20; ++t)
    for (Eigen::Index s = 0; s < 4; ++s) {
      const double var = sq(t, s) / n - mean(t, s) * mean(t, s);
      const double se = std::sqrt(std::max(var, 0.0) / (n - 1));
      if (std::abs(mean(t, s) - expect(t, s)) > 4 * se) ++outside;
    }
  CHECK(outside == 0);
}

TEST_CASE("closed form") {
  const RateVector k = (RateVector(4) << -2, 0.5, 0.5, 1).finished();
  const Eigen::VectorXd x0 = (Eigen::VectorXd(4) << 100, 1, 2, 3).finished();
  const auto c = closed_form(k, x0, 0, {0.0, 0.5, 1.0});
  CHECK((c.row(0).transpose() - x0).norm() < 1e-12);
  CHECK(c(2, 0) == doctest::Approx(100 * std::exp(-2.0)));
  CHECK(c(1, 1) == doctest::Approx(1 + 0.5 * 100 * (1 - std::exp(-1.0)) / 2));
  // d/dt at 0 equals K * x0_src.
  const double h = 1e-6;
  const auto d = closed_form(k, x0, 0, {h});
  for (Eigen::Index s = 0; s < 4; ++s) CHECK((d(0, s) - x0(s)) / h == doctest::Approx(k(s) * 100).epsilon(1e-4));
  const RateVector bad = (RateVector(4) << 1, 0, 0, 0).finished();
  CHECK_THROWS_AS(closed_form(bad, x0, 0, {1.0}), NumericalError);
  // Zero loss rate: constant source, linear products.
  const RateVector frozen = RateVector::Zero(4);
  CHECK((closed_form(frozen, x0, 0, {3.0}).row(0).transpose() - x0).norm() < 1e-12);
}

TEST_CASE("noiseless least squares recovers K") {
  const auto net = presets::mass_transfer_true();
  const auto cfg = default_ssa_config(net);
  for (const auto& rates : std::vector<std::vector<double>>{{1, 0.5, 0.7, 0.3}, {0.05, 2.5, 0.4, 1.2}}) {
    const auto k = rate_vector(net, rates);
    const auto counts = closed_form(k, x0_of(cfg), 0, cfg.t_grid);
    const auto est = fit_k(cfg.t_grid, counts, x0_of(cfg), 0);
    CHECK(est.converged);
    CHECK((est.k - k).norm() <= 1e-8 * k.norm());
    CHECK(est.residual_norm < 1e-6);
  }
}

TEST_CASE("fit input errors") {
  const Eigen::VectorXd x0 = (Eigen::VectorXd(2) << 10, 0).finished();
  CHECK_THROWS_AS(fit_k({1.0, 2.0}, Eigen::MatrixXd::Zero(3, 2), x0, 0), DataError);
  CHECK_THROWS_AS(fit_k({1.0}, Eigen::MatrixXd::Zero(1, 2), x0, 0), DataError);
  CHECK_THROWS_AS(fit_k({1.0, 2.0}, Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2), 0), DataError);
}

TEST_CASE("ssa configuration") {
  const auto net = presets::mass_transfer_true();
  auto cfg = default_ssa_config(net);
  CHECK(cfg.x0 == std::vector<std::int64_t>{1000, 0, 0, 0});
  CHECK(cfg.t_grid.size() == 20);
  CHECK(cfg.t_grid.back() == doctest::Approx(1.0));
  CHECK_NOTHROW(cfg.validate(4));
  CHECK_THROWS_AS(cfg.validate(3), ConfigError);
  cfg.t_grid = {0.5, 0.5};
  CHECK_THROWS_AS(cfg.validate(4), ConfigError);
  cfg.t_grid = {};
  CHECK_THROWS_AS(cfg.validate(4), ConfigError);
  CHECK_THROWS_AS(uniform_grid(0, 1.0), ConfigError);
  CHECK(uniform_grid(4, 2.0) == std::vector<double>{0.5, 1.0, 1.5, 2.0});
}

TEST_CASE("source species") {
  CHECK(source_species(presets::mass_transfer_true()) == 0u);
  const SpeciesSet sp({"A", "B"});
  const auto two = make_conic_network(sp, {{"A", 2}}, {{{"B", 1}}});
  CHECK_THROWS_AS(source_species(two), ConfigError);
  const auto empty = make_conic_network(sp, {}, {{{"B", 1}}});
  CHECK_THROWS_AS(source_species(empty), ConfigError);
}

TEST_CASE("datasets are reproducible and thread-count independent") {
  const auto net = presets::mass_transfer_true();
  DataGenConfig cfg;
  cfg.points = 6;
  cfg.ssa = default_ssa_config(net);
  cfg.seed = 11;
  const auto serial = generate_dataset_serial(net, cfg);
  REQUIRE(serial.size() == 6);
  for (int threads : {1, 2, 4}) {
    par::set_threads(threads);
    const auto ds = generate_dataset(net, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(ds[i].true_rates == serial[i].true_rates);
      CHECK(ds[i].estimate.k == serial[i].estimate.k);
    }
  }
  par::set_threads(0);
  // Point i depends only on (seed, i).
  cfg.points = 3;
  const auto prefix = generate_dataset(net, cfg);
  for (std::size_t i = 0; i < 3; ++i) CHECK(prefix[i].estimate.k == serial[i].estimate.k);
  for (const auto& p : serial) {
    CHECK(p.estimate.converged);
    CHECK(p.estimate.k(0) < 0.0);
    CHECK(p.estimate.standard_errors.size() == 4);
  }
}
