#pragma once

#include <map>
#include <string>
#include <vector>

#include "crn/geometry.hpp"
#include "crn/likelihood.hpp"
#include "crn/presets.hpp"
#include "crn/volume.hpp"

namespace fixture {

inline crn::ConeIndex parse_label(const std::string& label) {
  crn::ConeIndex idx;
  for (char c : label) idx.push_back(c - '1');
  return idx;
}

inline crn::Signature signature_of(const crn::ConeCatalog& cat, std::vector<std::string> labels) {
  crn::Signature sig;
  for (const auto& l : labels) sig.push_back(*cat.find(parse_label(l)));
  std::sort(sig.begin(), sig.end());
  return sig;
}

// Block table with hand-set tallies: entries[(cone label, block index)] = tally.
inline crn::BlockTable exact_table(const crn::ConeCatalog& cat, std::vector<crn::Signature> blocks,
                                   std::uint64_t n,
                                   const std::map<std::pair<std::string, int>, std::uint64_t>& entries) {
  crn::BlockTable t;
  t.catalog_fingerprint = cat.fingerprint();
  t.samples_per_cone = n;
  t.blocks = std::move(blocks);
  t.tallies.assign(cat.cones().size(), std::vector<std::uint64_t>(t.blocks.size(), 0));
  for (const auto& [key, tally] : entries)
    t.tallies[static_cast<std::size_t>(*cat.find(parse_label(key.first)))][static_cast<std::size_t>(key.second)] = tally;
  return t;
}

struct Planar {
  crn::ReactionNetwork net = crn::presets::planar_oracle();
  crn::ConeCatalog cat{net, 2};
  crn::BlockTable table;
  crn::LikelihoodModel model;

  // S1 = between R1 and R2, S2 = between R2 and R3; cone 13 splits evenly.
  Planar() {
    table = exact_table(cat, {signature_of(cat, {"12", "13"}), signature_of(cat, {"13", "23"})}, 2,
                        {{{"12", 0}, 2}, {{"13", 0}, 1}, {{"13", 1}, 1}, {{"23", 1}, 2}});
    model = crn::build_model(table, cat);
  }
};

// Five-candidate network with fixed coefficients:
// cone 1234 splits .706/.294 between C234 and C134,
// cone 2345 puts .35 into C234 and cone 1345 puts .339 into C134.
struct FiveCandidate {
  crn::ReactionNetwork net = crn::presets::mass_transfer_candidates(5);
  crn::ConeCatalog cat{net, 4};
  crn::BlockTable table;
  crn::LikelihoodModel model;
  int c134 = 0, c234 = 1;  // block indices (lexicographic order below)

  FiveCandidate() {
    std::vector<crn::Signature> blocks = {
        signature_of(cat, {"1234", "1345"}), signature_of(cat, {"1234", "2345"}),
        signature_of(cat, {"1235", "1345"}), signature_of(cat, {"1235", "2345"}),
        signature_of(cat, {"1245", "1345"}), signature_of(cat, {"1245", "2345"})};
    table = exact_table(cat, blocks, 1000,
                        {{{"1234", 0}, 294}, {{"1234", 1}, 706},
                         {{"1235", 2}, 300}, {{"1235", 3}, 700},
                         {{"1245", 4}, 300}, {{"1245", 5}, 700},
                         {{"1345", 0}, 339}, {{"1345", 2}, 331}, {{"1345", 4}, 330},
                         {{"2345", 1}, 350}, {{"2345", 3}, 325}, {{"2345", 5}, 325}});
    model = crn::build_model(table, cat);
  }

  crn::CountVector counts(std::uint64_t u234 = 32, std::uint64_t u134 = 18) const {
    crn::CountVector u;
    u.u.assign(6, 0);
    u.u[static_cast<std::size_t>(c234)] = u234;
    u.u[static_cast<std::size_t>(c134)] = u134;
    return u;
  }
};

}  // namespace fixture
