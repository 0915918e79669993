#pragma once

// Likelihood maximization on the constraint surface s(theta) = 1.
//
// Local search is cyclic coordinate ascent: with all other coordinates fixed,
// every g_i and s is affine in theta_k, so each update is a one-dimensional
// problem on the interval where the data-supported g_i stay positive. A
// multiplicative-gradient local search is available as an alternative.
// Multistart runs independent searches from random positive starts and merges
// the resulting minima.

#include <cstdint>
#include <string>
#include <vector>

#include "crn/likelihood.hpp"

namespace crn {

enum class LocalSearch { coordinate_ascent, exponentiated_gradient };

const char* to_string(LocalSearch method);
/// Throws ConfigError for unknown names.
LocalSearch parse_local_search(const std::string& name);

struct OptimizerConfig {
  int restarts = 0;  // 0 selects 2^(m-1)
  double sweep_tolerance = 1e-9;
  int max_sweeps = 20000;
  double merge_tol = 1e-3;
  double support_tol = 1e-3;
  std::uint64_t seed = 0;
  LocalSearch method = LocalSearch::coordinate_ascent;

  int effective_restarts(int reaction_count) const;
  /// Throws ConfigError on non-positive tolerances or negative restarts.
  void validate() const;
};

/// theta * s(theta)^(-1/d). Throws NumericalError when s(theta) = 0.
Theta normalize_to_constraint(const Theta& theta, const LikelihoodModel& model);

/// g_i(theta with theta_k = t) = a_i t + b_i and s = c t + e.
struct AffineCoeffs {
  Eigen::VectorXd a, b;
  double c = 0.0, e = 0.0;
};

AffineCoeffs restricted_affine_coeffs(const LikelihoodModel& model, const Theta& theta, int k);

struct StepResult {
  double value = 0.0;    // proposed theta_k (current value when not accepted)
  double gain = 0.0;     // increase of the log-likelihood
  bool accepted = false;
  bool skipped = false;  // empty feasible interval
};

/// Maximizes t -> sum u_i log(a_i t + b_i) - U log(c t + e) over the feasible
/// interval of coordinate k. Does not modify theta.
StepResult coordinate_step(const LikelihoodModel& model, const CountVector& counts,
                           const Theta& theta, int k);

struct LocalResult {
  Theta theta;  // constraint-normalized, canonical
  double neg_ll = 0.0;
  int sweeps = 0;
  bool converged = false;
  bool rejected = false;          // non-finite starting value
  int monotonicity_violations = 0;  // accepted updates that lowered l
  int updates = 0;
  std::vector<std::string> diagnostics;
};

LocalResult coordinate_ascent(const LikelihoodModel& model, const CountVector& counts,
                              const Theta& theta0, const OptimizerConfig& config);

LocalResult exponentiated_gradient(const LikelihoodModel& model, const CountVector& counts,
                                   const Theta& theta0, const OptimizerConfig& config);

inline constexpr double kNegligibleMonomial = 1e-13;

/// Picks the canonical representative of theta's fiber: coordinates that
/// appear in no active monomial are zeroed, and log(theta) on the positive
/// support is projected onto the row space of the active-monomial incidence
/// matrix. A monomial of s is active when it exceeds `negligible` times the
/// largest one. The result lies on the constraint surface. With negligible = 0,
/// g is that of theta normalized; otherwise each dropped term changes it by at
/// most that relative amount.
Theta canonicalize(const LikelihoodModel& model, const Theta& theta,
                   double negligible = 0.0);

struct Minimum {
  Theta theta;
  double neg_ll = 0.0;
  int hits = 0;
};

struct FitResult {
  Theta best_theta;          // s(best_theta) = 1
  Theta best_theta_simplex;  // best_theta / sum(best_theta)
  double best_neg_ll = 0.0;
  /// Ascending neg_ll. Minima tied with the best (1e-9 relative) are ordered
  /// by hits, then by smaller max-norm, so the reported optimum is bounded
  /// when the optimal set is not a point.
  std::vector<Minimum> minima;
  int restarts = 0;
  int rejected = 0;
  int best_hits = 0;
  double success_rate = 0.0;
  std::vector<int> support;  // 0-based reactions with theta > support_tol
  int monotonicity_violations = 0;
  int total_updates = 0;
  std::vector<std::string> diagnostics;
};

/// Random start for restart r: Gamma(1.5, 1) per coordinate, normalized.
Theta random_start(const LikelihoodModel& model, std::uint64_t seed, int restart);

/// Throws NumericalError when every restart is rejected, or when U = 0.
FitResult multistart(const LikelihoodModel& model, const CountVector& counts,
                     const OptimizerConfig& config);
FitResult multistart_serial(const LikelihoodModel& model, const CountVector& counts,
                            const OptimizerConfig& config);

/// Single-linkage clustering of local results under the L-infinity threshold.
FitResult merge_minima(const LikelihoodModel& model, std::vector<LocalResult> results,
                       const OptimizerConfig& config);

}  // namespace crn
