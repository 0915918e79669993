#include "crn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "crn/errors.hpp"
#include "crn/random.hpp"

namespace crn {

const char* to_string(LocalSearch method) {
  switch (method) {
    case LocalSearch::coordinate_ascent: return "coordinate_ascent";
    case LocalSearch::exponentiated_gradient: return "exponentiated_gradient";
  }
  return "unknown";
}

LocalSearch parse_local_search(const std::string& name) {
  if (name == "coordinate_ascent" || name == "coordinate") return LocalSearch::coordinate_ascent;
  if (name == "exponentiated_gradient" || name == "gradient")
    return LocalSearch::exponentiated_gradient;
  throw ConfigError("unknown local search method '" + name + "'");
}

int OptimizerConfig::effective_restarts(int reaction_count) const {
  if (restarts > 0) return restarts;
  return 1 << std::clamp(reaction_count - 1, 0, 20);
}

void OptimizerConfig::validate() const {
  if (restarts < 0) throw ConfigError("restarts must be >= 1 (or 0 for the default)");
  if (!(sweep_tolerance > 0) || !(merge_tol > 0) || !(support_tol > 0))
    throw ConfigError("optimizer tolerances must be positive");
  if (max_sweeps < 1) throw ConfigError("max_sweeps must be positive");
}

Theta normalize_to_constraint(const Theta& theta, const LikelihoodModel& model) {
  const double s = eval_s(model, theta);
  if (!(s > 0.0) || !std::isfinite(s))
    throw NumericalError("cannot normalize theta: s(theta) is zero or not finite");
  return theta * std::pow(s, -1.0 / model.dimension);
}

namespace {

// Product of theta over sigma without coordinate k; `has_k` reports membership.
double partial_monomial(const std::vector<int>& sigma, const Theta& theta, int k, bool& has_k) {
  double x = 1.0;
  has_k = false;
  for (int j : sigma) {
    if (j == k) {
      has_k = true;
    } else {
      x *= theta(j);
    }
  }
  return x;
}

void normalizer_coeffs(const LikelihoodModel& model, const Theta& theta, int k, double& c,
                       double& e) {
  c = 0.0;
  e = 0.0;
  for (const auto& sigma : model.normalizer) {
    bool has_k = false;
    const double x = partial_monomial(sigma, theta, k, has_k);
    (has_k ? c : e) += x;
  }
}

// Restricted 1-D objective over data-supported blocks only.
struct Restricted {
  std::vector<double> a, b, u;
  double c = 0.0, e = 0.0, total = 0.0;

  double value(double t) const {
    double f = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) f += u[i] * std::log(a[i] * t + b[i]);
    return f - total * std::log(c * t + e);
  }
  double slope(double t) const {
    double f = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) f += u[i] * a[i] / (a[i] * t + b[i]);
    return f - total * c / (c * t + e);
  }
};

Restricted restrict_objective(const LikelihoodModel& model, const CountVector& counts,
                              const Theta& theta, int k) {
  Restricted r;
  for (std::size_t i = 0; i < model.blocks.size(); ++i) {
    if (counts.u[i] == 0) continue;
    double a = 0.0, b = 0.0;
    for (const auto& t : model.blocks[i]) {
      bool has_k = false;
      const double x = t.coefficient * partial_monomial(t.reactions, theta, k, has_k);
      (has_k ? a : b) += x;
    }
    r.a.push_back(a);
    r.b.push_back(b);
    r.u.push_back(static_cast<double>(counts.u[i]));
    r.total += static_cast<double>(counts.u[i]);
  }
  normalizer_coeffs(model, theta, k, r.c, r.e);
  return r;
}

constexpr int kGridPerDecade = 8;
constexpr double kGridLogLo = -12.0;
constexpr double kGridLogHi = 12.0;

}  // namespace

AffineCoeffs restricted_affine_coeffs(const LikelihoodModel& model, const Theta& theta, int k) {
  AffineCoeffs out;
  const auto n = static_cast<Eigen::Index>(model.blocks.size());
  out.a = Eigen::VectorXd::Zero(n);
  out.b = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& t : model.blocks[static_cast<std::size_t>(i)]) {
      bool has_k = false;
      const double x = t.coefficient * partial_monomial(t.reactions, theta, k, has_k);
      (has_k ? out.a(i) : out.b(i)) += x;
    }
  }
  normalizer_coeffs(model, theta, k, out.c, out.e);
  return out;
}

StepResult coordinate_step(const LikelihoodModel& model, const CountVector& counts,
                           const Theta& theta, int k) {
  StepResult res;
  const double current = theta(k);
  res.value = current;
  const Restricted r = restrict_objective(model, counts, theta, k);

  // Feasible interval: t >= 0 with every data-supported a_i t + b_i > 0. All
  // coefficients are nonnegative, so each ratio -b_i/a_i is <= 0 and the
  // interval is (0, inf), closed at 0 when every b_i > 0 and e > 0.
  bool closed_at_zero = r.e > 0.0;
  bool flat = r.c == 0.0;
  for (std::size_t i = 0; i < r.u.size(); ++i) {
    if (r.a[i] == 0.0 && r.b[i] == 0.0) {
      res.skipped = true;
      return res;
    }
    if (r.b[i] <= 0.0) closed_at_zero = false;
    if (r.a[i] != 0.0) flat = false;
  }
  if (r.c == 0.0 && r.e == 0.0) {
    res.skipped = true;
    return res;
  }
  if (flat) return res;

  const double f_current = r.value(current);
  std::vector<double> candidates;
  if (closed_at_zero) candidates.push_back(0.0);

  std::vector<double> grid;
  const int points = static_cast<int>((kGridLogHi - kGridLogLo) * kGridPerDecade);
  grid.reserve(static_cast<std::size_t>(points) + 2);
  for (int j = 0; j <= points; ++j)
    grid.push_back(std::pow(10.0, kGridLogLo + static_cast<double>(j) / kGridPerDecade));
  if (current > 0.0) grid.push_back(current);
  std::sort(grid.begin(), grid.end());

  double prev_t = grid.front();
  double prev_slope = r.slope(prev_t);
  if (!closed_at_zero && prev_slope < 0.0) candidates.push_back(prev_t);
  for (std::size_t j = 1; j < grid.size(); ++j) {
    const double t = grid[j];
    const double slope = r.slope(t);
    if (prev_slope > 0.0 && slope <= 0.0) {
      // Local maximum of the restricted objective inside [prev_t, t].
      double lo = prev_t, hi = t;
      for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (r.slope(mid) > 0.0 ? lo : hi) = mid;
      }
      candidates.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev_slope = slope;
  }
  if (prev_slope > 0.0) candidates.push_back(grid.back());

  double best_t = current;
  double best_f = f_current;
  for (double t : candidates) {
    const double f = r.value(t);
    if (std::isfinite(f) && f > best_f) {
      best_f = f;
      best_t = t;
    }
  }
  if (best_t != current && (best_f > f_current || !std::isfinite(f_current))) {
    res.value = best_t;
    res.gain = best_f - f_current;
    res.accepted = true;
  }
  return res;
}

Theta canonicalize(const LikelihoodModel& model, const Theta& theta, double negligible) {
  const int m = static_cast<int>(theta.size());
  Theta out = theta;
  for (int k = 0; k < m; ++k)
    if (!(out(k) > 0.0)) out(k) = 0.0;

  double top = 0.0;
  for (const auto& sigma : model.normalizer) top = std::max(top, monomial(sigma, out));
  auto active = [&](const std::vector<int>& sigma) {
    return std::all_of(sigma.begin(), sigma.end(), [&](int j) { return out(j) > 0.0; }) &&
           monomial(sigma, out) > negligible * top;
  };
  std::vector<const std::vector<int>*> rows;
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  for (const auto& sigma : model.normalizer)
    if (active(sigma)) {
      rows.push_back(&sigma);
      for (int j : sigma) used[static_cast<std::size_t>(j)] = true;
    }
  std::vector<int> cols;
  for (int k = 0; k < m; ++k) {
    if (out(k) > 0.0 && !used[static_cast<std::size_t>(k)]) out(k) = 0.0;
    if (out(k) > 0.0) cols.push_back(k);
  }
  if (rows.empty()) return out;

  Eigen::MatrixXd incidence = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                    static_cast<Eigen::Index>(cols.size()));
  Eigen::VectorXd logs(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) logs(static_cast<Eigen::Index>(c)) = std::log(out(cols[c]));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int j : *rows[r]) {
      auto pos = std::lower_bound(cols.begin(), cols.end(), j) - cols.begin();
      incidence(static_cast<Eigen::Index>(r), pos) = 1.0;
    }
  const Eigen::VectorXd monomial_logs = incidence * logs;
  const Eigen::VectorXd projected =
      incidence.completeOrthogonalDecomposition().solve(monomial_logs);
  for (std::size_t c = 0; c < cols.size(); ++c) out(cols[c]) = std::exp(projected(static_cast<Eigen::Index>(c)));
  return normalize_to_constraint(out, model);
}

namespace {

bool start_local(const LikelihoodModel& model, const CountVector& counts, const Theta& theta0,
                 Theta& theta, double& nll, LocalResult& res) {
  if ((theta0.array() < 0.0).any() || !theta0.allFinite()) {
    res.rejected = true;
    res.diagnostics.emplace_back("initial theta has negative or non-finite entries");
    return false;
  }
  const double s = eval_s(model, theta0);
  if (!(s > 0.0)) {
    res.rejected = true;
    res.diagnostics.emplace_back("initial theta has s(theta) = 0");
    return false;
  }
  theta = normalize_to_constraint(theta0, model);
  nll = neg_log_likelihood(model, counts, theta);
  if (!std::isfinite(nll)) {
    res.rejected = true;
    res.diagnostics.emplace_back("initial log-likelihood is not finite");
    return false;
  }
  return true;
}

void finish_local(const LikelihoodModel& model, const CountVector& counts, Theta theta,
                  LocalResult& res) {
  const double nll = neg_log_likelihood(model, counts, theta);
  const double slack = 1e-9 * (1.0 + std::abs(nll));
  for (double negligible : {kNegligibleMonomial, 0.0}) {
    res.theta = canonicalize(model, theta, negligible);
    res.neg_ll = neg_log_likelihood(model, counts, res.theta);
    if (res.neg_ll <= nll + slack) return;
  }
  // Keep the uncanonicalized point if rounding broke support.
  res.theta = theta;
  res.neg_ll = nll;
}

}  // namespace

LocalResult coordinate_ascent(const LikelihoodModel& model, const CountVector& counts,
                              const Theta& theta0, const OptimizerConfig& config) {
  LocalResult res;
  Theta theta;
  double nll = 0.0;
  if (!start_local(model, counts, theta0, theta, nll, res)) return res;

  const int m = static_cast<int>(theta.size());
  std::vector<bool> reported(static_cast<std::size_t>(m), false);
  for (res.sweeps = 1; res.sweeps <= config.max_sweeps; ++res.sweeps) {
    const double nll_old = nll;
    for (int k = 0; k < m; ++k) {
      const StepResult step = coordinate_step(model, counts, theta, k);
      if (step.skipped && !reported[static_cast<std::size_t>(k)]) {
        reported[static_cast<std::size_t>(k)] = true;
        res.diagnostics.push_back("coordinate " + std::to_string(k + 1) +
                                  " skipped: empty feasible interval");
      }
      if (!step.accepted) continue;
      Theta next = theta;
      next(k) = step.value;
      const double s = eval_s(model, next);
      if (!(s > 0.0) || !std::isfinite(s)) continue;
      next = normalize_to_constraint(next, model);
      const double next_nll = neg_log_likelihood(model, counts, next);
      ++res.updates;
      if (!(next_nll <= nll + 1e-9 * (1.0 + std::abs(nll)))) ++res.monotonicity_violations;
      theta = std::move(next);
      nll = next_nll;
    }
    if (std::abs(nll_old - nll) <= config.sweep_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.sweeps = std::min(res.sweeps, config.max_sweeps);
  finish_local(model, counts, std::move(theta), res);
  return res;
}

LocalResult exponentiated_gradient(const LikelihoodModel& model, const CountVector& counts,
                                   const Theta& theta0, const OptimizerConfig& config) {
  LocalResult res;
  Theta theta;
  double nll = 0.0;
  if (!start_local(model, counts, theta0, theta, nll, res)) return res;

  double eta = 1e-2;
  int quiet = 0;
  for (res.sweeps = 1; res.sweeps <= config.max_sweeps; ++res.sweeps) {
    const Eigen::VectorXd grad = gradient_neg_ll(model, counts, theta);
    const double decrease_rate = (theta.array() * grad.array().square()).sum();
    if (!(decrease_rate > 0.0)) {
      res.converged = true;
      break;
    }
    eta *= 2.0;
    bool moved = false;
    for (int halvings = 0; halvings < 80; ++halvings, eta *= 0.5) {
      Theta next = theta.array() * (-eta * grad.array()).exp();
      const double s = eval_s(model, next);
      if (!(s > 0.0) || !std::isfinite(s)) continue;
      next = normalize_to_constraint(next, model);
      const double next_nll = neg_log_likelihood(model, counts, next);
      if (next_nll <= nll - 1e-4 * eta * decrease_rate) {
        quiet = (nll - next_nll <= config.sweep_tolerance) ? quiet + 1 : 0;
        ++res.updates;
        theta = std::move(next);
        nll = next_nll;
        moved = true;
        break;
      }
    }
    if (!moved || quiet >= 3) {
      res.converged = true;
      break;
    }
  }
  res.sweeps = std::min(res.sweeps, config.max_sweeps);

  // Multiplicative steps only reach the boundary asymptotically; snap
  // vanishing coordinates to zero when that does not lower l.
  const double top = theta.maxCoeff();
  for (int k = 0; k < theta.size(); ++k) {
    if (theta(k) == 0.0 || theta(k) > 1e-6 * top) continue;
    Theta next = theta;
    next(k) = 0.0;
    const double s = eval_s(model, next);
    if (!(s > 0.0)) continue;
    next = normalize_to_constraint(next, model);
    const double next_nll = neg_log_likelihood(model, counts, next);
    if (next_nll <= nll + 1e-12 * (1.0 + std::abs(nll))) {
      theta = std::move(next);
      nll = next_nll;
    }
  }
  finish_local(model, counts, std::move(theta), res);
  return res;
}

Theta random_start(const LikelihoodModel& model, std::uint64_t seed, int restart) {
  auto engine = rng::make_engine(rng::combine(seed, static_cast<std::uint64_t>(restart)));
  std::gamma_distribution<double> gamma(1.5, 1.0);
  Theta theta(model.reaction_count);
  for (int k = 0; k < model.reaction_count; ++k) theta(k) = gamma(engine);
  return normalize_to_constraint(theta, model);
}

namespace {

LocalResult run_restart(const LikelihoodModel& model, const CountVector& counts,
                        const OptimizerConfig& config, int r) {
  const Theta start = random_start(model, config.seed, r);
  return config.method == LocalSearch::coordinate_ascent
             ? coordinate_ascent(model, counts, start, config)
             : exponentiated_gradient(model, counts, start, config);
}

void check_multistart(const LikelihoodModel& model, const CountVector& counts,
                      const OptimizerConfig& config) {
  config.validate();
  if (counts.u.size() != model.blocks.size())
    throw NumericalError("count vector length does not match the number of blocks");
  if (counts.total() == 0) throw NumericalError("no data points to fit");
}

}  // namespace

FitResult multistart_serial(const LikelihoodModel& model, const CountVector& counts,
                            const OptimizerConfig& config) {
  check_multistart(model, counts, config);
  const int restarts = config.effective_restarts(model.reaction_count);
  std::vector<LocalResult> results(static_cast<std::size_t>(restarts));
  for (int r = 0; r < restarts; ++r)
    results[static_cast<std::size_t>(r)] = run_restart(model, counts, config, r);
  return merge_minima(model, std::move(results), config);
}

FitResult multistart(const LikelihoodModel& model, const CountVector& counts,
                     const OptimizerConfig& config) {
  check_multistart(model, counts, config);
  const int restarts = config.effective_restarts(model.reaction_count);
  std::vector<LocalResult> results(static_cast<std::size_t>(restarts));
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < restarts; ++r)
    results[static_cast<std::size_t>(r)] = run_restart(model, counts, config, r);
  return merge_minima(model, std::move(results), config);
}

FitResult merge_minima(const LikelihoodModel& model, std::vector<LocalResult> results,
                       const OptimizerConfig& config) {
  FitResult fit;
  fit.restarts = static_cast<int>(results.size());
  std::vector<LocalResult> ok;
  int unconverged = 0;
  for (auto& r : results) {
    fit.monotonicity_violations += r.monotonicity_violations;
    fit.total_updates += r.updates;
    for (const auto& d : r.diagnostics)
      if (std::find(fit.diagnostics.begin(), fit.diagnostics.end(), d) == fit.diagnostics.end())
        fit.diagnostics.push_back(d);
    if (r.rejected || !std::isfinite(r.neg_ll)) {
      ++fit.rejected;
    } else {
      if (!r.converged) ++unconverged;
      ok.push_back(std::move(r));
    }
  }
  if (ok.empty()) throw NumericalError("all optimizer restarts were rejected");
  if (unconverged > 0)
    fit.diagnostics.push_back(std::to_string(unconverged) +
                              " restart(s) hit max_sweeps before converging");

  std::sort(ok.begin(), ok.end(), [](const LocalResult& x, const LocalResult& y) {
    if (x.neg_ll != y.neg_ll) return x.neg_ll < y.neg_ll;
    return std::lexicographical_compare(x.theta.begin(), x.theta.end(), y.theta.begin(),
                                        y.theta.end());
  });

  // Union-find over pairs within merge_tol (single linkage).
  std::vector<std::size_t> parent(ok.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < ok.size(); ++i)
    for (std::size_t j = i + 1; j < ok.size(); ++j)
      if ((ok[i].theta - ok[j].theta).lpNorm<Eigen::Infinity>() <= config.merge_tol) {
        const std::size_t a = root(i), b = root(j);
        parent[std::max(a, b)] = std::min(a, b);
      }
  // Roots are the best member of their cluster because ok is sorted.
  std::vector<int> cluster_of(ok.size(), -1);
  for (std::size_t i = 0; i < ok.size(); ++i) {
    const std::size_t r = root(i);
    if (cluster_of[r] < 0) {
      cluster_of[r] = static_cast<int>(fit.minima.size());
      fit.minima.push_back({ok[r].theta, ok[r].neg_ll, 0});
    }
    ++fit.minima[static_cast<std::size_t>(cluster_of[r])].hits;
  }

  // Ties with the best value: more hits first, then the most balanced theta.
  const double tie = 1e-9 * (1.0 + std::abs(fit.minima.front().neg_ll));
  auto tied_end = std::find_if(fit.minima.begin(), fit.minima.end(), [&](const Minimum& x) {
    return x.neg_ll > fit.minima.front().neg_ll + tie;
  });
  std::stable_sort(fit.minima.begin(), tied_end, [](const Minimum& x, const Minimum& y) {
    if (x.hits != y.hits) return x.hits > y.hits;
    return x.theta.lpNorm<Eigen::Infinity>() < y.theta.lpNorm<Eigen::Infinity>();
  });

  const Minimum& best = fit.minima.front();
  fit.best_theta = best.theta;
  fit.best_neg_ll = best.neg_ll;
  fit.best_hits = best.hits;
  fit.success_rate = static_cast<double>(best.hits) / static_cast<double>(fit.restarts);
  const double total = best.theta.sum();
  fit.best_theta_simplex = total > 0 ? Theta(best.theta / total) : best.theta;
  for (int k = 0; k < best.theta.size(); ++k)
    if (best.theta(k) > config.support_tol) fit.support.push_back(k);
  (void)model;
  return fit;
}

}  // namespace crn
