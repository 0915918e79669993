#include "crn/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crn/errors.hpp"

namespace crn {

LikelihoodModel build_model(const BlockTable& table, const ConeCatalog& catalog) {
  if (table.blocks.empty() || table.samples_per_cone == 0)
    throw NumericalError("empty block table");
  if (table.catalog_fingerprint != catalog.fingerprint())
    throw NumericalError("block table was built from a different cone catalog");

  LikelihoodModel model;
  model.reaction_count = catalog.reaction_count();
  model.dimension = catalog.dimension();
  model.table_fingerprint = table.fingerprint();
  model.blocks.resize(table.blocks.size());
  for (int c : catalog.nondegenerate()) {
    const auto& sigma = catalog.cones()[static_cast<std::size_t>(c)].reactions;
    model.normalizer.push_back(sigma);
    model.normalizer_cones.push_back(c);
    for (std::size_t b = 0; b < table.blocks.size(); ++b) {
      if (table.tallies[static_cast<std::size_t>(c)][b] == 0) continue;
      model.blocks[b].push_back({c, sigma, table.volume(c, static_cast<int>(b))});
    }
  }
  return model;
}

double monomial(const std::vector<int>& reactions, const Theta& theta) {
  double x = 1.0;
  for (int j : reactions) x *= theta(j);
  return x;
}

Eigen::VectorXd eval_g(const LikelihoodModel& model, const Theta& theta) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.blocks.size()));
  for (std::size_t i = 0; i < model.blocks.size(); ++i)
    for (const auto& t : model.blocks[i]) g(static_cast<Eigen::Index>(i)) += t.coefficient * monomial(t.reactions, theta);
  return g;
}

double eval_s(const LikelihoodModel& model, const Theta& theta) {
  double s = 0.0;
  for (const auto& sigma : model.normalizer) s += monomial(sigma, theta);
  return s;
}

Eigen::VectorXd eval_p(const LikelihoodModel& model, const Theta& theta) {
  const double s = eval_s(model, theta);
  if (!(s > 0.0)) throw NumericalError("s(theta) = 0: theta supports no non-degenerate cone");
  return eval_g(model, theta) / s;
}

std::uint64_t CountVector::total() const {
  std::uint64_t t = 0;
  for (auto x : u) t += x;
  return t;
}

const char* to_string(PointStatus s) {
  switch (s) {
    case PointStatus::assigned: return "assigned";
    case PointStatus::boundary: return "boundary";
    case PointStatus::nearest: return "nearest";
    case PointStatus::off_span: return "off_span";
    case PointStatus::outside: return "outside";
    case PointStatus::unsupported: return "unsupported";
  }
  return "unknown";
}

std::size_t Assignment::usable() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.block >= 0 ? 1 : 0;
  return n;
}

std::size_t Assignment::flagged() const {
  std::size_t n = 0;
  for (const auto& p : points)
    n += (p.status == PointStatus::nearest || p.status == PointStatus::off_span ||
          p.status == PointStatus::outside || p.status == PointStatus::unsupported)
             ? 1
             : 0;
  return n;
}

Assignment assign_counts(std::span<const RateVector> data, const BlockTable& table,
                         const ConeCatalog& catalog) {
  if (table.catalog_fingerprint != catalog.fingerprint())
    throw NumericalError("block table was built from a different cone catalog");
  Assignment out;
  out.table_fingerprint = table.fingerprint();
  out.counts.u.assign(table.blocks.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    PointAssignment pa;
    pa.index = i;
    const Projection proj = catalog.project(data[i]);
    pa.residual = proj.residual;
    if (!proj.in_span) {
      pa.status = PointStatus::off_span;
      out.points.push_back(std::move(pa));
      continue;
    }
    catalog.signature_reduced(proj.coords, pa.signature);
    if (pa.signature.empty()) {
      pa.status = PointStatus::outside;
      out.points.push_back(std::move(pa));
      continue;
    }
    auto it = std::lower_bound(table.blocks.begin(), table.blocks.end(), pa.signature);
    if (it != table.blocks.end() && *it == pa.signature) {
      pa.block = static_cast<int>(it - table.blocks.begin());
      pa.status = catalog.on_boundary_reduced(proj.coords) ? PointStatus::boundary
                                                           : PointStatus::assigned;
    } else {
      pa.block = nearest_block(pa.signature, table.blocks);
      pa.status = PointStatus::nearest;
    }
    ++out.counts.u[static_cast<std::size_t>(pa.block)];
    out.points.push_back(std::move(pa));
  }
  return out;
}

std::size_t drop_unsupported(Assignment& assignment, const LikelihoodModel& model) {
  std::size_t dropped = 0;
  for (auto& p : assignment.points) {
    if (p.block < 0 || !model.blocks[static_cast<std::size_t>(p.block)].empty()) continue;
    --assignment.counts.u[static_cast<std::size_t>(p.block)];
    p.block = -1;
    p.status = PointStatus::unsupported;
    ++dropped;
  }
  return dropped;
}

namespace {

void check_counts(const LikelihoodModel& model, const CountVector& counts) {
  if (counts.u.size() != model.blocks.size())
    throw NumericalError("count vector length does not match the number of blocks");
}

}  // namespace

double neg_log_likelihood(const LikelihoodModel& model, const CountVector& counts,
                          const Theta& theta) {
  check_counts(model, counts);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double s = eval_s(model, theta);
  if (!(s > 0.0)) return inf;
  double value = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < model.blocks.size(); ++i) {
    if (counts.u[i] == 0) continue;
    double g = 0.0;
    for (const auto& t : model.blocks[i]) g += t.coefficient * monomial(t.reactions, theta);
    if (!(g > 0.0)) return inf;
    const double u = static_cast<double>(counts.u[i]);
    value -= u * std::log(g);
    total += u;
  }
  return value + total * std::log(s);
}

namespace {

// Adds scale * d(prod_{j in sigma} theta_j)/d theta_k to grad for every k in sigma.
void add_monomial_gradient(const std::vector<int>& sigma, const Theta& theta, double scale,
                           Eigen::VectorXd& grad) {
  for (std::size_t a = 0; a < sigma.size(); ++a) {
    double partial = scale;
    for (std::size_t b = 0; b < sigma.size(); ++b)
      if (b != a) partial *= theta(sigma[b]);
    grad(sigma[a]) += partial;
  }
}

}  // namespace

Eigen::VectorXd gradient_neg_ll(const LikelihoodModel& model, const CountVector& counts,
                                const Theta& theta) {
  check_counts(model, counts);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  const double s = eval_s(model, theta);
  double total = 0.0;
  for (std::size_t i = 0; i < model.blocks.size(); ++i) {
    if (counts.u[i] == 0) continue;
    double g = 0.0;
    for (const auto& t : model.blocks[i]) g += t.coefficient * monomial(t.reactions, theta);
    const double u = static_cast<double>(counts.u[i]);
    total += u;
    for (const auto& t : model.blocks[i])
      add_monomial_gradient(t.reactions, theta, -u * t.coefficient / g, grad);
  }
  for (const auto& sigma : model.normalizer) add_monomial_gradient(sigma, theta, total / s, grad);
  return grad;
}

}  // namespace crn
