#pragma once

// Cone enumeration, degeneracy detection, conical coordinates and signatures.
//
// All cone computations happen in an orthonormal basis of span(R) ("reduced
// coordinates", length d_eff). Species-space points are projected first; the
// projection residual decides whether a point counts as lying in the span.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "crn/model.hpp"

namespace crn {

/// Sorted 0-based reaction indices of a d_eff-subset.
using ConeIndex = std::vector<int>;

/// Sorted positions (into ConeCatalog::cones()) of the non-degenerate cones
/// that contain a point. A building block is the interior locus of one
/// full-dimensional signature.
using Signature = std::vector<int>;

struct Cone {
  ConeIndex reactions;
  bool degenerate = false;
  /// Smallest over largest singular value of the cone's basis matrix.
  double singular_ratio = 0.0;
};

struct Projection {
  Eigen::VectorXd coords;  // reduced coordinates
  double residual = 0.0;   // ||K - lift(coords)||
  double norm = 0.0;       // ||K||
  bool in_span = true;
};

struct ConicalCoordinates {
  Eigen::VectorXd weights;  // one per reaction of the cone, in cone order
  double residual = 0.0;
  bool off_span = false;
};

class ConeCatalog {
 public:
  static constexpr double kDegeneracyTol = 1e-9;
  static constexpr double kMembershipTol = 1e-9;
  static constexpr double kSpanTol = 1e-6;

  ConeCatalog() = default;
  /// Enumerates all C(m, d_eff) subsets. Throws ConfigError when m < d_eff or
  /// d_eff does not equal the rank of the reaction vectors.
  ConeCatalog(const ReactionNetwork& net, int d_eff);

  int dimension() const { return d_eff_; }
  int species_count() const { return static_cast<int>(basis_.rows()); }
  int reaction_count() const { return static_cast<int>(reduced_.cols()); }

  const std::vector<Cone>& cones() const { return cones_; }
  const std::vector<int>& nondegenerate() const { return nondegenerate_; }
  std::optional<int> find(const ConeIndex& reactions) const;

  /// d_eff x m, reaction vectors in reduced coordinates.
  const Eigen::MatrixXd& reduced_vectors() const { return reduced_; }

  Projection project(const RateVector& k) const;
  Eigen::VectorXd lift(const Eigen::VectorXd& reduced) const { return basis_ * reduced; }

  /// Reduced point of the cone combination sum_j w_j R_sigma(j).
  Eigen::VectorXd combine(int cone, const Eigen::VectorXd& weights) const;

  // Inner-loop kernels on reduced coordinates. `cone` must be non-degenerate.
  void coordinates_reduced(int cone, const Eigen::VectorXd& y, Eigen::VectorXd& w) const;
  bool member_reduced(int cone, const Eigen::VectorXd& y,
                      double tol = kMembershipTol) const;
  void signature_reduced(const Eigen::VectorXd& y, Signature& out,
                         double tol = kMembershipTol) const;
  /// True when y lies within tolerance of a facet of some cone containing it.
  bool on_boundary_reduced(const Eigen::VectorXd& y, double tol = kMembershipTol) const;

  /// Hash of dimension, reduced vectors and degeneracy flags.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  void require_nondegenerate(int cone) const;

  int d_eff_ = 0;
  Eigen::MatrixXd basis_;    // species_count x d_eff, orthonormal columns
  Eigen::MatrixXd reduced_;  // d_eff x m
  std::vector<Cone> cones_;
  std::vector<int> nondegenerate_;
  /// Inverse basis matrices of non-degenerate cones, stacked vertically
  /// (d_eff rows per cone; rows of degenerate cones are zero).
  Eigen::MatrixXd inverses_;
  std::uint64_t fingerprint_ = 0;
};

/// Rank of the reaction vectors.
int effective_dimension(const ReactionNetwork& net);

inline ConeCatalog enumerate_cones(const ReactionNetwork& net, int d_eff) {
  return ConeCatalog(net, d_eff);
}

/// Coordinates of the projection of k in the basis of the cone's reaction
/// vectors. Throws NumericalError for degenerate cones.
ConicalCoordinates conical_coordinates(const RateVector& k, int cone,
                                       const ConeCatalog& catalog);

/// All conical coordinates >= -tol * ||w||_inf. Off-span points are never members.
bool membership(const RateVector& k, int cone, const ConeCatalog& catalog);

/// Non-degenerate cones containing k. Empty for points outside cone(R) or off the span.
Signature signature(const RateVector& k, const ConeCatalog& catalog);

/// Binomial coefficient, exact for the sizes used here.
std::uint64_t binomial(int n, int k);

/// Lexicographic enumeration of all k-subsets of {0..n-1}.
std::vector<std::vector<int>> combinations(int n, int k);

}  // namespace crn
