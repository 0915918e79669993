#pragma once

// Domain vocabulary: species, complexes, reactions and conic candidate networks.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace crn {

/// Stoichiometry of a complex: species name -> nonnegative coefficient.
/// An empty complex is the zero complex.
using Complex = std::map<std::string, int>;

/// Coefficients of the reaction rate equations in species coordinates.
using RateVector = Eigen::VectorXd;

inline constexpr int kMaxStoichiometry = 1000;

class SpeciesSet {
 public:
  SpeciesSet() = default;
  /// Throws ConfigError on an empty list or duplicate names.
  explicit SpeciesSet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& operator[](std::size_t i) const { return names_[i]; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  friend bool operator==(const SpeciesSet&, const SpeciesSet&) = default;

 private:
  std::vector<std::string> names_;
};

struct Reaction {
  std::string name;
  Complex source;
  Complex target;
  std::vector<int> vector;  // target - source, in species order

  friend bool operator==(const Reaction&, const Reaction&) = default;
};

/// Target stoichiometry minus source stoichiometry in species order.
/// Throws ConfigError for unknown species, coefficients outside
/// [0, kMaxStoichiometry], or a null reaction (zero vector).
std::vector<int> reaction_vector(const Complex& source, const Complex& target,
                                 const SpeciesSet& species);

Reaction make_reaction(std::string name, Complex source, Complex target,
                       const SpeciesSet& species);

struct ReactionNetwork {
  SpeciesSet species;
  Complex source_complex;
  std::vector<Reaction> reactions;

  std::size_t species_count() const { return species.size(); }
  std::size_t reaction_count() const { return reactions.size(); }

  /// d x m matrix whose columns are the reaction vectors.
  Eigen::MatrixXd vector_matrix() const;

  /// Subnetwork keeping the given 0-based reaction indices, in that order.
  ReactionNetwork subnetwork(const std::vector<int>& indices) const;
};

/// Empty iff the network is conic (one shared source complex), has at least
/// one reaction, and all reaction vectors are nonzero and pairwise distinct.
std::vector<std::string> validate_network(const ReactionNetwork& net);

/// Builds a conic network from a source complex and target complexes, naming
/// reactions R1..Rm. Throws ConfigError when validation fails.
ReactionNetwork make_conic_network(const SpeciesSet& species, const Complex& source,
                                   const std::vector<Complex>& targets);

/// "A0 -> A1 + 2A3" style rendering of a complex.
std::string format_complex(const Complex& c);

/// Parses "A1 + 2A3", "2 A2", or "0" into a complex. Throws ConfigError.
Complex parse_complex(const std::string& text);

}  // namespace crn
