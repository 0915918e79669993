#include "crn/presets.hpp"

#include "crn/errors.hpp"

namespace crn::presets {

namespace {

const SpeciesSet& four_species() {
  static const SpeciesSet s({"A0", "A1", "A2", "A3"});
  return s;
}

}  // namespace

ReactionNetwork identifiability_example() {
  return make_conic_network(four_species(), {{"A0", 1}},
                            {{{"A1", 2}},
                             {{"A1", 1}, {"A2", 1}},
                             {{"A3", 2}},
                             {{"A2", 2}},
                             {{"A1", 1}, {"A3", 1}}});
}

ReactionNetwork mass_transfer_true() { return mass_transfer_candidates(4); }

ReactionNetwork mass_transfer_candidates(int m) {
  if (m < 4 || m > 9) throw ConfigError("mass_transfer_candidates: m must be in [4, 9]");
  const std::vector<Complex> all = {
      {{"A2", 1}, {"A3", 1}},  // true
      {{"A1", 1}},             // true
      {{"A1", 1}, {"A2", 1}},  // true
      {{"A3", 2}},             // true
      {{"A2", 1}},
      {{"A3", 1}},
      {{"A1", 1}, {"A3", 1}},
      {{"A2", 2}},
      {{"A1", 2}},
  };
  return make_conic_network(four_species(), {{"A0", 1}},
                            std::vector<Complex>(all.begin(), all.begin() + m));
}

ReactionNetwork planar_oracle() {
  return make_conic_network(SpeciesSet({"X", "Y"}), {},
                            {{{"X", 1}}, {{"X", 1}, {"Y", 1}}, {{"Y", 1}}});
}

}  // namespace crn::presets
