#include "crn/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "crn/errors.hpp"
#include "crn/random.hpp"

namespace crn {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

namespace {

int rank_from_singular_values(const Eigen::VectorXd& sv) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > ConeCatalog::kDegeneracyTol * sv(0)) ++r;
  return r;
}

}  // namespace

int effective_dimension(const ReactionNetwork& net) {
  if (net.reactions.empty()) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(net.vector_matrix());
  return rank_from_singular_values(svd.singularValues());
}

ConeCatalog::ConeCatalog(const ReactionNetwork& net, int d_eff) : d_eff_(d_eff) {
  const int m = static_cast<int>(net.reaction_count());
  if (d_eff < 1) throw ConfigError("effective dimension must be positive");
  if (m < d_eff) throw ConfigError("fewer reactions than the effective dimension");

  const Eigen::MatrixXd r = net.vector_matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinU);
  if (rank_from_singular_values(svd.singularValues()) != d_eff)
    throw ConfigError("d_eff does not match the rank of the reaction vectors");
  basis_ = svd.matrixU().leftCols(d_eff);
  // Sign convention so the basis does not depend on the SVD backend's choice.
  for (int c = 0; c < d_eff; ++c) {
    Eigen::Index arg = 0;
    basis_.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis_(arg, c) < 0) basis_.col(c) *= -1.0;
  }
  reduced_ = basis_.transpose() * r;

  std::uint64_t h = rng::combine(static_cast<std::uint64_t>(d_eff), static_cast<std::uint64_t>(m));
  for (const auto& reaction : net.reactions)
    for (int x : reaction.vector) h = rng::combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(x)));

  const auto subsets = combinations(m, d_eff);
  inverses_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(subsets.size()) * d_eff, d_eff);
  cones_.reserve(subsets.size());
  for (std::size_t c = 0; c < subsets.size(); ++c) {
    Cone cone{subsets[c], false, 0.0};
    Eigen::MatrixXd b(d_eff, d_eff);
    for (int j = 0; j < d_eff; ++j) b.col(j) = reduced_.col(subsets[c][static_cast<std::size_t>(j)]);
    Eigen::JacobiSVD<Eigen::MatrixXd> bsvd(b);
    const auto& sv = bsvd.singularValues();
    cone.singular_ratio = sv(0) > 0 ? sv(d_eff - 1) / sv(0) : 0.0;
    cone.degenerate = cone.singular_ratio < kDegeneracyTol;
    if (!cone.degenerate) {
      inverses_.middleRows(static_cast<Eigen::Index>(c) * d_eff, d_eff) = b.fullPivLu().inverse();
      nondegenerate_.push_back(static_cast<int>(c));
    }
    h = rng::combine(h, cone.degenerate ? 1u : 2u);
    cones_.push_back(std::move(cone));
  }
  fingerprint_ = h;
}

std::optional<int> ConeCatalog::find(const ConeIndex& reactions) const {
  ConeIndex key = reactions;
  std::sort(key.begin(), key.end());
  auto it = std::lower_bound(cones_.begin(), cones_.end(), key,
                             [](const Cone& c, const ConeIndex& k) { return c.reactions < k; });
  if (it == cones_.end() || it->reactions != key) return std::nullopt;
  return static_cast<int>(it - cones_.begin());
}

Projection ConeCatalog::project(const RateVector& k) const {
  if (k.size() != basis_.rows()) throw DataError("point has wrong dimension");
  Projection p;
  p.coords = basis_.transpose() * k;
  p.norm = k.norm();
  p.residual = (k - basis_ * p.coords).norm();
  p.in_span = std::isfinite(p.residual) && p.residual <= kSpanTol * p.norm;
  return p;
}

void ConeCatalog::require_nondegenerate(int cone) const {
  if (cone < 0 || static_cast<std::size_t>(cone) >= cones_.size())
    throw NumericalError("cone index out of range");
  if (cones_[static_cast<std::size_t>(cone)].degenerate)
    throw NumericalError("cone is degenerate");
}

Eigen::VectorXd ConeCatalog::combine(int cone, const Eigen::VectorXd& weights) const {
  require_nondegenerate(cone);
  const auto& idx = cones_[static_cast<std::size_t>(cone)].reactions;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d_eff_);
  for (int j = 0; j < d_eff_; ++j) y += weights(j) * reduced_.col(idx[static_cast<std::size_t>(j)]);
  return y;
}

void ConeCatalog::coordinates_reduced(int cone, const Eigen::VectorXd& y,
                                      Eigen::VectorXd& w) const {
  w.noalias() = inverses_.middleRows(static_cast<Eigen::Index>(cone) * d_eff_, d_eff_) * y;
}

bool ConeCatalog::member_reduced(int cone, const Eigen::VectorXd& y, double tol) const {
  Eigen::VectorXd w(d_eff_);
  coordinates_reduced(cone, y, w);
  const double scale = w.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;  // the apex belongs to every cone
  return w.minCoeff() >= -tol * scale;
}

void ConeCatalog::signature_reduced(const Eigen::VectorXd& y, Signature& out,
                                    double tol) const {
  out.clear();
  Eigen::VectorXd w(d_eff_);
  for (int c : nondegenerate_) {
    coordinates_reduced(c, y, w);
    const double scale = w.cwiseAbs().maxCoeff();
    if (scale > 0.0 && w.minCoeff() >= -tol * scale) out.push_back(c);
  }
}

bool ConeCatalog::on_boundary_reduced(const Eigen::VectorXd& y, double tol) const {
  Eigen::VectorXd w(d_eff_);
  for (int c : nondegenerate_) {
    coordinates_reduced(c, y, w);
    const double scale = w.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    const double lo = w.minCoeff();
    if (lo >= -tol * scale && lo <= tol * scale) return true;
  }
  return false;
}

ConicalCoordinates conical_coordinates(const RateVector& k, int cone,
                                       const ConeCatalog& catalog) {
  if (cone < 0 || static_cast<std::size_t>(cone) >= catalog.cones().size())
    throw NumericalError("cone index out of range");
  if (catalog.cones()[static_cast<std::size_t>(cone)].degenerate)
    throw NumericalError("conical coordinates requested for a degenerate cone");
  const Projection p = catalog.project(k);
  ConicalCoordinates out;
  out.weights.resize(catalog.dimension());
  catalog.coordinates_reduced(cone, p.coords, out.weights);
  out.residual = p.residual;
  out.off_span = !p.in_span;
  return out;
}

bool membership(const RateVector& k, int cone, const ConeCatalog& catalog) {
  const auto cc = conical_coordinates(k, cone, catalog);
  if (cc.off_span) return false;
  const double scale = cc.weights.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return cc.weights.minCoeff() >= -ConeCatalog::kMembershipTol * scale;
}

Signature signature(const RateVector& k, const ConeCatalog& catalog) {
  const Projection p = catalog.project(k);
  Signature s;
  if (!p.in_span) return s;
  catalog.signature_reduced(p.coords, s);
  return s;
}

}  // namespace crn
