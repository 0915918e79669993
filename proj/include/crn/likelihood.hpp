#pragma once

// Multinomial block model.
//
//   g_i(theta) = sum over (sigma, v) in block i of  v * prod_{j in sigma} theta_j
//   s(theta)   = sum over non-degenerate sigma of prod_{j in sigma} theta_j
//   p_i        = g_i / s
//
// Every monomial is squarefree, so g and s are affine in each coordinate.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crn/geometry.hpp"
#include "crn/volume.hpp"

namespace crn {

using Theta = Eigen::VectorXd;

struct LikelihoodTerm {
  int cone = 0;                // catalog position
  std::vector<int> reactions;  // sigma, 0-based
  double coefficient = 0.0;    // v_sigma^(i) in (0, 1]
};

struct LikelihoodModel {
  int reaction_count = 0;
  int dimension = 0;
  std::vector<std::vector<LikelihoodTerm>> blocks;
  std::vector<std::vector<int>> normalizer;  // sigma of every non-degenerate cone
  std::vector<int> normalizer_cones;
  std::uint64_t table_fingerprint = 0;

  std::size_t block_count() const { return blocks.size(); }
};

/// Terms are exactly the (sigma, block) pairs with a positive tally. Throws
/// NumericalError for an empty table or one built from a different catalog.
LikelihoodModel build_model(const BlockTable& table, const ConeCatalog& catalog);

/// Product of theta over the indices.
double monomial(const std::vector<int>& reactions, const Theta& theta);

Eigen::VectorXd eval_g(const LikelihoodModel& model, const Theta& theta);
double eval_s(const LikelihoodModel& model, const Theta& theta);
/// Throws NumericalError when s(theta) = 0.
Eigen::VectorXd eval_p(const LikelihoodModel& model, const Theta& theta);

struct CountVector {
  std::vector<std::uint64_t> u;  // per block id
  std::uint64_t total() const;
};

enum class PointStatus {
  assigned,  // signature is a known block
  boundary,  // known block, but the point sits on a cone facet within tolerance
  nearest,   // unseen signature, sent to the nearest block (counted, flagged)
  off_span,  // projection residual too large (excluded)
  outside,   // empty signature: outside cone(R) (excluded)
  unsupported,  // block has no model terms (zero tally in every cone; excluded)
};

const char* to_string(PointStatus s);

struct PointAssignment {
  std::size_t index = 0;
  PointStatus status = PointStatus::assigned;
  int block = -1;  // -1 when excluded
  double residual = 0.0;
  Signature signature;
};

struct Assignment {
  CountVector counts;
  std::vector<PointAssignment> points;
  std::uint64_t table_fingerprint = 0;

  /// Points counted in u.
  std::size_t usable() const;
  /// Points that are excluded or whose signature was not a discovered block.
  std::size_t flagged() const;
};

Assignment assign_counts(std::span<const RateVector> data, const BlockTable& table,
                         const ConeCatalog& catalog);

/// Excludes points whose block has no terms in the model, since such counts
/// would make the likelihood identically -infinity. Returns how many were dropped.
std::size_t drop_unsupported(Assignment& assignment, const LikelihoodModel& model);

/// -sum_{u_i > 0} u_i log g_i + U log s. +infinity when a data-supported g_i
/// vanishes (support mismatch); never throws for theta >= 0.
double neg_log_likelihood(const LikelihoodModel& model, const CountVector& counts,
                          const Theta& theta);

/// Analytic gradient of neg_log_likelihood; meaningful where it is finite.
Eigen::VectorXd gradient_neg_ll(const LikelihoodModel& model, const CountVector& counts,
                                const Theta& theta);

}  // namespace crn
