#pragma once

// Synthetic data: random rate constants, exact stochastic simulation of a
// conic network, and least-squares estimation of the rate-equation
// coefficients dA/dt = K * A_src from the sampled trajectory.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "crn/model.hpp"
#include "crn/random.hpp"

namespace crn {

struct SsaConfig {
  std::vector<std::int64_t> x0;  // molecules per species
  std::vector<double> t_grid;    // strictly increasing, positive

  /// Throws ConfigError on a malformed grid or negative counts.
  void validate(std::size_t species_count) const;
};

/// Source species at 1000 molecules, all others 0; 20 equally spaced times
/// in (0, 1].
SsaConfig default_ssa_config(const ReactionNetwork& net);

std::vector<double> uniform_grid(int count, double t_end);

struct Jump {
  double time;
  int reaction;
};

struct Trajectory {
  std::vector<double> times;
  /// times.size() x species; counts at each grid time.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> states;
  std::vector<double> true_rates;
  std::vector<Jump> jumps;  // filled only when requested
};

/// Index of the single source species (coefficient 1). Throws ConfigError for
/// other source complexes, which have no linear closed form.
std::size_t source_species(const ReactionNetwork& net);

/// One Gamma(alpha, lambda) draw per reaction (lambda is the rate).
std::vector<double> draw_rates(const ReactionNetwork& net, double alpha, double lambda,
                               rng::Engine& engine);

/// Exact jump chain (Gillespie direct method) with mass-action propensities.
Trajectory simulate_ssa(const ReactionNetwork& net, const std::vector<double>& rates,
                        const SsaConfig& cfg, rng::Engine& engine, bool record_jumps = false);

/// Expected counts under dA_i/dt = K_i A_src: rows are times, columns species.
/// Throws NumericalError when K_src > 0.
Eigen::MatrixXd closed_form(const RateVector& k, const Eigen::VectorXd& x0,
                            std::size_t source, const std::vector<double>& times);

/// sum_r k_r R_r: the coefficient vector implied by per-reaction constants.
RateVector rate_vector(const ReactionNetwork& net, const std::vector<double>& rates);

struct EstimatedPoint {
  RateVector k;
  Eigen::VectorXd standard_errors;
  double residual_norm = 0.0;
  bool converged = false;
};

struct FitOptions {
  int restarts = 5;
  int max_iterations = 200;
  std::uint64_t seed = 0;
};

/// Nonlinear least squares of closed_form against sampled counts. Standard
/// errors come from the residual variance times the inverse Gauss-Newton
/// normal matrix.
EstimatedPoint fit_k(const std::vector<double>& times, const Eigen::MatrixXd& counts,
                     const Eigen::VectorXd& x0, std::size_t source, const FitOptions& options = {});

struct DataGenConfig {
  int points = 50;
  double alpha = 1.5;
  double lambda = 1.0;
  SsaConfig ssa;
  std::uint64_t seed = 0;
};

struct GeneratedPoint {
  std::vector<double> true_rates;
  EstimatedPoint estimate;
};

/// One (rates -> trajectory -> fit) pipeline per point; point i uses streams
/// derived from (seed, i) only.
std::vector<GeneratedPoint> generate_dataset(const ReactionNetwork& true_net,
                                             const DataGenConfig& cfg);
std::vector<GeneratedPoint> generate_dataset_serial(const ReactionNetwork& true_net,
                                                    const DataGenConfig& cfg);

}  // namespace crn
