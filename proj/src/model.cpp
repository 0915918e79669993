#include "crn/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "crn/errors.hpp"

namespace crn {

SpeciesSet::SpeciesSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ConfigError("species list is empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ConfigError("empty species name");
    if (!seen.insert(n).second) throw ConfigError("duplicate species name '" + n + "'");
  }
}

std::optional<std::size_t> SpeciesSet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

namespace {

void accumulate(const Complex& c, const SpeciesSet& species, int sign,
                std::vector<int>& out) {
  for (const auto& [name, coeff] : c) {
    auto idx = species.index_of(name);
    if (!idx) throw ConfigError("unknown species '" + name + "'");
    if (coeff < 0 || coeff > kMaxStoichiometry) {
      throw ConfigError("stoichiometric coefficient of '" + name + "' out of range");
    }
    out[*idx] += sign * coeff;
  }
}

}  // namespace

std::vector<int> reaction_vector(const Complex& source, const Complex& target,
                                 const SpeciesSet& species) {
  std::vector<int> v(species.size(), 0);
  accumulate(target, species, +1, v);
  accumulate(source, species, -1, v);
  if (std::all_of(v.begin(), v.end(), [](int x) { return x == 0; })) {
    throw ConfigError("null reaction " + format_complex(source) + " -> " +
                      format_complex(target));
  }
  return v;
}

Reaction make_reaction(std::string name, Complex source, Complex target,
                       const SpeciesSet& species) {
  auto v = reaction_vector(source, target, species);
  return Reaction{std::move(name), std::move(source), std::move(target), std::move(v)};
}

Eigen::MatrixXd ReactionNetwork::vector_matrix() const {
  Eigen::MatrixXd r(species_count(), reaction_count());
  for (std::size_t j = 0; j < reactions.size(); ++j)
    for (std::size_t i = 0; i < species_count(); ++i)
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = reactions[j].vector[i];
  return r;
}

ReactionNetwork ReactionNetwork::subnetwork(const std::vector<int>& indices) const {
  ReactionNetwork sub{species, source_complex, {}};
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= reactions.size())
      throw ConfigError("subnetwork index out of range");
    sub.reactions.push_back(reactions[static_cast<std::size_t>(i)]);
  }
  return sub;
}

std::vector<std::string> validate_network(const ReactionNetwork& net) {
  std::vector<std::string> out;
  if (net.reactions.empty()) {
    out.emplace_back("network has no reactions");
    return out;
  }
  for (const auto& r : net.reactions) {
    if (r.source != net.source_complex) {
      out.push_back("non-conic network: reaction " + r.name + " has source " +
                    format_complex(r.source) + ", expected " +
                    format_complex(net.source_complex));
    }
    if (r.vector.size() != net.species_count()) {
      out.push_back("reaction " + r.name + " has a vector of wrong length");
    } else if (std::all_of(r.vector.begin(), r.vector.end(), [](int x) { return x == 0; })) {
      out.push_back("null reaction vector: " + r.name);
    }
  }
  for (std::size_t i = 0; i < net.reactions.size(); ++i)
    for (std::size_t j = i + 1; j < net.reactions.size(); ++j)
      if (net.reactions[i].vector == net.reactions[j].vector)
        out.push_back("duplicate reaction vector: " + net.reactions[i].name + " and " +
                      net.reactions[j].name);
  return out;
}

ReactionNetwork make_conic_network(const SpeciesSet& species, const Complex& source,
                                   const std::vector<Complex>& targets) {
  ReactionNetwork net{species, source, {}};
  for (std::size_t j = 0; j < targets.size(); ++j)
    net.reactions.push_back(
        make_reaction("R" + std::to_string(j + 1), source, targets[j], species));
  auto diag = validate_network(net);
  if (!diag.empty()) throw ConfigError(diag.front());
  return net;
}

std::string format_complex(const Complex& c) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, coeff] : c) {
    if (coeff == 0) continue;
    if (!first) os << " + ";
    if (coeff != 1) os << coeff;
    os << name;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

Complex parse_complex(const std::string& text) {
  Complex c;
  const auto last = text.find_last_not_of(" \t");
  if (last == std::string::npos || text[last] == '+')
    throw ConfigError("malformed complex '" + text + "'");
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    auto b = part.find_first_not_of(" \t");
    auto e = part.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("malformed complex '" + text + "'");
    part = part.substr(b, e - b + 1);
    if (part == "0" || part == "{}") continue;
    std::size_t pos = 0;
    while (pos < part.size() && std::isdigit(static_cast<unsigned char>(part[pos]))) ++pos;
    if (pos > 4) throw ConfigError("stoichiometric coefficient too large in '" + text + "'");
    int coeff = pos == 0 ? 1 : std::stoi(part.substr(0, pos));
    while (pos < part.size() && std::isspace(static_cast<unsigned char>(part[pos]))) ++pos;
    std::string name = part.substr(pos);
    if (name.empty()) throw ConfigError("malformed complex '" + text + "'");
    c[name] += coeff;
  }
  return c;
}

}  // namespace crn
