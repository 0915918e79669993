#include <doctest.h>

#include "crn/errors.hpp"
#include "crn/model.hpp"
#include "crn/presets.hpp"

using namespace crn;

namespace {

const SpeciesSet kFour({"A0", "A1", "A2", "A3"});

}  // namespace

TEST_CASE("reaction vectors are target minus source") {
  CHECK(reaction_vector({{"A0", 1}}, {{"A2", 1}, {"A3", 1}}, kFour) == std::vector<int>{-1, 0, 1, 1});
  CHECK(reaction_vector({{"A0", 1}}, {{"A3", 2}}, kFour) == std::vector<int>{-1, 0, 0, 2});
  CHECK(reaction_vector({}, {{"A1", 1}}, kFour) == std::vector<int>{0, 1, 0, 0});
}

TEST_CASE("reaction vector errors") {
  CHECK_THROWS_AS(reaction_vector({{"A0", 1}}, {{"B", 1}}, kFour), ConfigError);
  CHECK_THROWS_AS(reaction_vector({{"A0", 1}}, {{"A0", 1}}, kFour), ConfigError);
  CHECK_THROWS_AS(reaction_vector({{"A0", 1}}, {{"A1", -1}}, kFour), ConfigError);
  CHECK_THROWS_AS(reaction_vector({{"A0", 1}}, {{"A1", kMaxStoichiometry + 1}}, kFour), ConfigError);
}

TEST_CASE("species sets reject empty and duplicate names") {
  CHECK_THROWS_AS(SpeciesSet(std::vector<std::string>{}), ConfigError);
  CHECK_THROWS_AS(SpeciesSet({"A", "A"}), ConfigError);
  CHECK(kFour.index_of("A2") == 2u);
  CHECK_FALSE(kFour.index_of("Z").has_value());
}

TEST_CASE("complex parsing") {
  CHECK(parse_complex("A1 + 2A3") == Complex{{"A1", 1}, {"A3", 2}});
  CHECK(parse_complex("2 A2") == Complex{{"A2", 2}});
  CHECK(parse_complex("0").empty());
  CHECK(parse_complex("A1+A1") == Complex{{"A1", 2}});
  CHECK_THROWS_AS(parse_complex("A1 +"), ConfigError);
  CHECK_THROWS_AS(parse_complex("A1 + + A2"), ConfigError);
  CHECK_THROWS_AS(parse_complex(""), ConfigError);
  CHECK_THROWS_AS(parse_complex("3"), ConfigError);
  CHECK_THROWS_AS(parse_complex("99999999999A1"), ConfigError);

  for (const char* text : {"A1 + 2A3", "0", "2A2", "A0"})
    CHECK(format_complex(parse_complex(text)) == text);
}

TEST_CASE("conic networks") {
  const auto net = presets::mass_transfer_candidates(5);
  REQUIRE(net.reaction_count() == 5);
  CHECK(net.reactions[0].vector == std::vector<int>{-1, 0, 1, 1});
  CHECK(net.reactions[1].vector == std::vector<int>{-1, 1, 0, 0});
  CHECK(net.reactions[2].vector == std::vector<int>{-1, 1, 1, 0});
  CHECK(net.reactions[3].vector == std::vector<int>{-1, 0, 0, 2});
  CHECK(net.reactions[4].vector == std::vector<int>{-1, 0, 1, 0});
  CHECK(net.reactions[4].name == "R5");
  CHECK(validate_network(net).empty());

  const auto m = net.vector_matrix();
  CHECK(m.rows() == 4);
  CHECK(m.cols() == 5);
  CHECK(m(3, 3) == 2.0);

  const auto sub = net.subnetwork({0, 1, 2, 3});
  CHECK(sub.reactions == presets::mass_transfer_true().reactions);
  CHECK_THROWS_AS(net.subnetwork({7}), ConfigError);

  CHECK_THROWS_AS(presets::mass_transfer_candidates(3), ConfigError);
  CHECK_THROWS_AS(presets::mass_transfer_candidates(10), ConfigError);
  CHECK(presets::mass_transfer_candidates(9).reaction_count() == 9);
}

TEST_CASE("network validation diagnostics") {
  CHECK_THROWS_AS(make_conic_network(kFour, {{"A0", 1}}, {{{"A1", 1}}, {{"A1", 1}}}), ConfigError);
  CHECK_THROWS_AS(make_conic_network(kFour, {{"A0", 1}}, {}), ConfigError);

  ReactionNetwork mixed = presets::mass_transfer_true();
  mixed.reactions.push_back(make_reaction("X", {{"A1", 1}}, {{"A2", 1}}, kFour));
  const auto diag = validate_network(mixed);
  REQUIRE(diag.size() == 1);
  CHECK(diag[0].find("non-conic") != std::string::npos);

  ReactionNetwork dup = presets::mass_transfer_true();
  dup.reactions.push_back(dup.reactions[0]);
  CHECK(validate_network(dup).front().find("duplicate") != std::string::npos);
}
