#include "crn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "crn/errors.hpp"

namespace crn {

void SsaConfig::validate(std::size_t species_count) const {
  if (x0.size() != species_count) throw ConfigError("x0 must list every species");
  for (auto x : x0)
    if (x < 0) throw ConfigError("x0 counts must be nonnegative");
  if (t_grid.empty()) throw ConfigError("time grid is empty");
  double prev = 0.0;
  for (double t : t_grid) {
    if (!(t > prev) || !std::isfinite(t))
      throw ConfigError("time grid must be positive and strictly increasing");
    prev = t;
  }
}

std::vector<double> uniform_grid(int count, double t_end) {
  if (count < 1 || !(t_end > 0)) throw ConfigError("grid needs count >= 1 and t_end > 0");
  std::vector<double> g;
  for (int i = 1; i <= count; ++i) g.push_back(t_end * i / count);
  return g;
}

std::size_t source_species(const ReactionNetwork& net) {
  const Complex& src = net.source_complex;
  std::size_t n = 0;
  std::string name;
  for (const auto& [s, c] : src) {
    if (c == 0) continue;
    if (c != 1) throw ConfigError("source complex must be a single species with coefficient 1");
    ++n;
    name = s;
  }
  if (n != 1) throw ConfigError("source complex must be a single species with coefficient 1");
  auto idx = net.species.index_of(name);
  if (!idx) throw ConfigError("unknown source species");
  return *idx;
}

SsaConfig default_ssa_config(const ReactionNetwork& net) {
  SsaConfig cfg;
  cfg.x0.assign(net.species_count(), 0);
  cfg.x0[source_species(net)] = 1000;
  cfg.t_grid = uniform_grid(20, 1.0);
  return cfg;
}

std::vector<double> draw_rates(const ReactionNetwork& net, double alpha, double lambda,
                               rng::Engine& engine) {
  if (!(alpha > 0) || !(lambda > 0)) throw ConfigError("rate distribution parameters must be positive");
  std::gamma_distribution<double> gamma(alpha, 1.0 / lambda);
  std::vector<double> rates(net.reaction_count());
  for (auto& r : rates) r = gamma(engine);
  return rates;
}

Trajectory simulate_ssa(const ReactionNetwork& net, const std::vector<double>& rates,
                        const SsaConfig& cfg, rng::Engine& engine, bool record_jumps) {
  const std::size_t d = net.species_count();
  const std::size_t m = net.reaction_count();
  cfg.validate(d);
  if (rates.size() != m) throw ConfigError("one rate constant per reaction is required");

  // Source stoichiometry per species, for the mass-action falling factorials.
  std::vector<std::vector<std::pair<std::size_t, int>>> reactants(m);
  for (std::size_t r = 0; r < m; ++r)
    for (const auto& [name, c] : net.reactions[r].source)
      if (c > 0) reactants[r].emplace_back(*net.species.index_of(name), c);

  Trajectory traj;
  traj.times = cfg.t_grid;
  traj.true_rates = rates;
  traj.states.resize(static_cast<Eigen::Index>(cfg.t_grid.size()), static_cast<Eigen::Index>(d));

  std::vector<std::int64_t> x = cfg.x0;
  std::vector<double> propensity(m);
  std::exponential_distribution<double> waiting(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double t = 0.0;
  std::size_t next = 0;
  const double t_end = cfg.t_grid.back();

  auto record_until = [&](double horizon) {
    while (next < cfg.t_grid.size() && cfg.t_grid[next] < horizon) {
      for (std::size_t s = 0; s < d; ++s)
        traj.states(static_cast<Eigen::Index>(next), static_cast<Eigen::Index>(s)) = x[s];
      ++next;
    }
  };

  while (t <= t_end) {
    double total = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      double a = rates[r];
      for (const auto& [s, c] : reactants[r])
        for (int i = 0; i < c; ++i) a *= static_cast<double>(std::max<std::int64_t>(x[s] - i, 0));
      propensity[r] = a;
      total += a;
    }
    if (!(total > 0.0)) break;
    const double dt = waiting(engine) / total;
    // States at grid times strictly before the next jump are the current state.
    record_until(t + dt);
    t += dt;
    if (t > t_end) break;
    double pick = unit(engine) * total;
    std::size_t r = 0;
    for (; r + 1 < m; ++r) {
      if (pick < propensity[r]) break;
      pick -= propensity[r];
    }
    while (propensity[r] == 0.0) --r;  // guards rounding at the top end
    for (std::size_t s = 0; s < d; ++s) x[s] += net.reactions[r].vector[s];
    if (record_jumps) traj.jumps.push_back({t, static_cast<int>(r)});
  }
  record_until(std::numeric_limits<double>::infinity());
  return traj;
}

namespace {

// phi(l, t) = (1 - exp(-l t)) / l and its derivative in l, stable near l = 0.
double phi(double l, double t) {
  const double z = l * t;
  if (std::abs(z) < 1e-4) return t * (1.0 - z / 2.0 + z * z / 6.0);
  return -std::expm1(-z) / l;
}

double phi_dl(double l, double t) {
  const double z = l * t;
  if (std::abs(z) < 1e-4) return t * t * (-0.5 + z / 3.0 - z * z / 8.0);
  return (t * std::exp(-z) * l + std::expm1(-z)) / (l * l);
}

}  // namespace

Eigen::MatrixXd closed_form(const RateVector& k, const Eigen::VectorXd& x0, std::size_t source,
                            const std::vector<double>& times) {
  if (k.size() != x0.size()) throw NumericalError("K and x0 differ in length");
  const auto src = static_cast<Eigen::Index>(source);
  if (k(src) > 0.0) throw NumericalError("source species cannot be produced (K_src > 0)");
  const double l = -k(src);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), k.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double f = phi(l, times[i]);
    for (Eigen::Index s = 0; s < k.size(); ++s)
      out(static_cast<Eigen::Index>(i), s) =
          s == src ? x0(src) * std::exp(-l * times[i]) : x0(s) + k(s) * x0(src) * f;
  }
  return out;
}

RateVector rate_vector(const ReactionNetwork& net, const std::vector<double>& rates) {
  RateVector k = RateVector::Zero(static_cast<Eigen::Index>(net.species_count()));
  for (std::size_t r = 0; r < net.reaction_count(); ++r)
    for (std::size_t s = 0; s < net.species_count(); ++s)
      k(static_cast<Eigen::Index>(s)) += rates[r] * net.reactions[r].vector[s];
  return k;
}

namespace {

// Parameters: p(0) = lambda = -K_src, then K_s for every s != src in order.
RateVector params_to_k(const Eigen::VectorXd& p, Eigen::Index d, Eigen::Index src) {
  RateVector k(d);
  Eigen::Index j = 1;
  for (Eigen::Index s = 0; s < d; ++s) k(s) = s == src ? -p(0) : p(j++);
  return k;
}

struct GnResult {
  Eigen::VectorXd params;
  double rss = 0.0;
  bool converged = false;
  Eigen::MatrixXd jacobian;
};

void residuals_and_jacobian(const Eigen::VectorXd& p, const std::vector<double>& times,
                            const Eigen::MatrixXd& counts, const Eigen::VectorXd& x0,
                            Eigen::Index src, Eigen::VectorXd& res, Eigen::MatrixXd* jac) {
  const Eigen::Index d = counts.cols();
  const auto n = static_cast<Eigen::Index>(times.size());
  res.resize(n * d);
  if (jac) jac->setZero(n * d, d);
  const double l = p(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = times[static_cast<std::size_t>(i)];
    const double f = phi(l, t);
    const double df = phi_dl(l, t);
    Eigen::Index j = 1;
    for (Eigen::Index s = 0; s < d; ++s) {
      const Eigen::Index row = i * d + s;
      if (s == src) {
        const double e = std::exp(-l * t);
        res(row) = counts(i, s) - x0(src) * e;
        if (jac) (*jac)(row, 0) = -t * x0(src) * e;
      } else {
        res(row) = counts(i, s) - (x0(s) + p(j) * x0(src) * f);
        if (jac) {
          (*jac)(row, 0) = p(j) * x0(src) * df;
          (*jac)(row, j) = x0(src) * f;
        }
        ++j;
      }
    }
  }
}

GnResult gauss_newton(Eigen::VectorXd p, const std::vector<double>& times,
                      const Eigen::MatrixXd& counts, const Eigen::VectorXd& x0, Eigen::Index src,
                      int max_iterations) {
  GnResult out;
  Eigen::VectorXd res;
  Eigen::MatrixXd jac;
  residuals_and_jacobian(p, times, counts, x0, src, res, &jac);
  double rss = res.squaredNorm();
  for (int it = 0; it < max_iterations; ++it) {
    // Jacobian maps parameter steps to model changes; residual = data - model.
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(res);
    if (!step.allFinite()) break;
    double scale = 1.0;
    bool improved = false;
    Eigen::VectorXd trial_res;
    Eigen::VectorXd trial;
    for (int h = 0; h < 40; ++h, scale *= 0.5) {
      trial = p + scale * step;
      trial(0) = std::max(trial(0), 0.0);
      residuals_and_jacobian(trial, times, counts, x0, src, trial_res, nullptr);
      const double trial_rss = trial_res.squaredNorm();
      if (std::isfinite(trial_rss) && trial_rss <= rss) {
        improved = true;
        const double change = (trial - p).norm();
        const double drop = rss - trial_rss;
        p = trial;
        rss = trial_rss;
        residuals_and_jacobian(p, times, counts, x0, src, res, &jac);
        if (change <= 1e-13 * (1.0 + p.norm()) || drop <= 1e-15 * (1.0 + rss)) {
          out.converged = true;
        }
        break;
      }
    }
    if (!improved) {
      // No descent along the Gauss-Newton direction: stationary to rounding.
      out.converged = true;
    }
    if (out.converged) break;
  }
  out.params = p;
  out.rss = rss;
  out.jacobian = jac;
  return out;
}

}  // namespace

EstimatedPoint fit_k(const std::vector<double>& times, const Eigen::MatrixXd& counts,
                     const Eigen::VectorXd& x0, std::size_t source, const FitOptions& options) {
  const Eigen::Index d = counts.cols();
  const auto src = static_cast<Eigen::Index>(source);
  const auto n = static_cast<Eigen::Index>(times.size());
  if (counts.rows() != n || x0.size() != d) throw DataError("trajectory shape mismatch");
  if (src >= d) throw DataError("source index out of range");
  if (!(x0(src) > 0)) throw DataError("source species must start with a positive count");
  if (n < d) throw DataError("need at least as many time points as species");

  // Log-linear regression of the source decay through the known intercept.
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = counts(i, src);
    if (a <= 0.0) continue;
    const double t = times[static_cast<std::size_t>(i)];
    num += t * std::log(a / x0(src));
    den += t * t;
  }
  const double lambda0 = den > 0 ? std::max(-num / den, 0.0) : 1.0;

  auto initial = [&](double l) {
    Eigen::VectorXd p(d);
    p(0) = l;
    Eigen::Index j = 1;
    for (Eigen::Index s = 0; s < d; ++s) {
      if (s == src) continue;
      double fy = 0.0, ff = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double f = x0(src) * phi(l, times[static_cast<std::size_t>(i)]);
        fy += f * (counts(i, s) - x0(s));
        ff += f * f;
      }
      p(j++) = ff > 0 ? fy / ff : 0.0;
    }
    return p;
  };

  auto engine = rng::make_engine(options.seed);
  std::normal_distribution<double> jitter(0.0, 0.5);
  GnResult best = gauss_newton(initial(lambda0), times, counts, x0, src, options.max_iterations);
  for (int r = 0; r < options.restarts; ++r) {
    const double l = std::max(lambda0, 1e-3) * std::exp(jitter(engine));
    GnResult trial = gauss_newton(initial(l), times, counts, x0, src, options.max_iterations);
    if (trial.rss < best.rss || (!best.converged && trial.converged && trial.rss <= best.rss))
      best = std::move(trial);
  }

  EstimatedPoint out;
  out.k = params_to_k(best.params, d, src);
  out.residual_norm = std::sqrt(best.rss);
  out.converged = best.converged && out.k.allFinite();
  const Eigen::Index dof = n * d - d;
  const double sigma2 = dof > 0 ? best.rss / static_cast<double>(dof) : 0.0;
  const Eigen::MatrixXd normal = best.jacobian.transpose() * best.jacobian;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  Eigen::VectorXd se_params = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::quiet_NaN());
  if (lu.isInvertible()) se_params = (sigma2 * lu.inverse()).diagonal().cwiseMax(0.0).cwiseSqrt();
  out.standard_errors = params_to_k(se_params, d, src).cwiseAbs();
  return out;
}

namespace {

GeneratedPoint generate_point(const ReactionNetwork& net, const DataGenConfig& cfg,
                              std::size_t src, const Eigen::VectorXd& x0, int i) {
  const std::uint64_t key = rng::combine(cfg.seed, static_cast<std::uint64_t>(i));
  auto engine = rng::make_engine(key);
  GeneratedPoint p;
  p.true_rates = draw_rates(net, cfg.alpha, cfg.lambda, engine);
  const Trajectory traj = simulate_ssa(net, p.true_rates, cfg.ssa, engine);
  FitOptions opts;
  opts.seed = rng::combine(key, 0x66697400ULL);
  p.estimate = fit_k(traj.times, traj.states.cast<double>(), x0, src, opts);
  return p;
}

void check_datagen(const ReactionNetwork& net, const DataGenConfig& cfg) {
  if (cfg.points < 0) throw ConfigError("number of data points must be nonnegative");
  cfg.ssa.validate(net.species_count());
}

Eigen::VectorXd x0_vector(const SsaConfig& cfg) {
  Eigen::VectorXd x0(static_cast<Eigen::Index>(cfg.x0.size()));
  for (std::size_t s = 0; s < cfg.x0.size(); ++s) x0(static_cast<Eigen::Index>(s)) = static_cast<double>(cfg.x0[s]);
  return x0;
}

}  // namespace

std::vector<GeneratedPoint> generate_dataset_serial(const ReactionNetwork& true_net,
                                                    const DataGenConfig& cfg) {
  check_datagen(true_net, cfg);
  const std::size_t src = source_species(true_net);
  const Eigen::VectorXd x0 = x0_vector(cfg.ssa);
  std::vector<GeneratedPoint> out(static_cast<std::size_t>(cfg.points));
  for (int i = 0; i < cfg.points; ++i)
    out[static_cast<std::size_t>(i)] = generate_point(true_net, cfg, src, x0, i);
  return out;
}

std::vector<GeneratedPoint> generate_dataset(const ReactionNetwork& true_net,
                                             const DataGenConfig& cfg) {
  check_datagen(true_net, cfg);
  const std::size_t src = source_species(true_net);
  const Eigen::VectorXd x0 = x0_vector(cfg.ssa);
  std::vector<GeneratedPoint> out(static_cast<std::size_t>(cfg.points));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < cfg.points; ++i)
    out[static_cast<std::size_t>(i)] = generate_point(true_net, cfg, src, x0, i);
  return out;
}

}  // namespace crn
