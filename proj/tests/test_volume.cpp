#include <doctest.h>

#include <cmath>
#include <random>

#include "crn/errors.hpp"
#include "crn/parallel.hpp"
#include "crn/presets.hpp"
#include "crn/volume.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace crn;
using fixture::parse_label;

namespace {

const MeasureSpec kGamma{1.5, 1.0};

int block_of(const BlockTable& t, const Signature& sig) {
  auto it = std::find(t.blocks.begin(), t.blocks.end(), sig);
  return it == t.blocks.end() ? -1 : static_cast<int>(it - t.blocks.begin());
}

}  // namespace

TEST_CASE("measure validation") {
  CHECK_NOTHROW(kGamma.validate());
  CHECK_THROWS_AS((MeasureSpec{0.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((MeasureSpec{1.0, -1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((MeasureSpec{NAN, 1.0}.validate()), ConfigError);
}

TEST_CASE("planar volumes: pure cones and an even split") {
  fixture::Planar p;
  const BlockTable t = estimate_volumes(p.cat, kGamma, 4000, 11);
  REQUIRE(t.block_count() == 2);
  const int c12 = *p.cat.find({0, 1}), c13 = *p.cat.find({0, 2}), c23 = *p.cat.find({1, 2});
  CHECK(t.volume(c12, 0) == 1.0);
  CHECK(t.volume(c23, 1) == 1.0);
  const double se = std::sqrt(0.25 / 4000);
  CHECK(std::abs(t.volume(c13, 0) - 0.5) < 4 * se);
}

TEST_CASE("planar volumes against dense-grid quadrature") {
  // R1=(1,0), R2=(2,1), R3=(0,1): cone 13 is cut by the ray (2,1), so its
  // share below the ray is P(W1 > 2 W2).
  const auto net = make_conic_network(SpeciesSet({"X", "Y"}), {},
                                      {{{"X", 1}}, {{"X", 2}, {"Y", 1}}, {{"Y", 1}}});
  const ConeCatalog cat(net, 2);
  const std::uint64_t n = 20000;
  const BlockTable t = estimate_volumes(cat, kGamma, n, 5);
  const int c13 = *cat.find({0, 2});
  const int below = block_of(t, fixture::signature_of(cat, {"12", "13"}));
  REQUIRE(below >= 0);
  const double exact = oracle::gamma_ratio_tail(1.5, 2.0, 3000, 30.0);
  CHECK(exact == doctest::Approx(0.2).epsilon(0.5));  // sanity: well inside (0, 0.5)
  const double se = std::sqrt(exact * (1 - exact) / static_cast<double>(n));
  CHECK(std::abs(t.volume(c13, below) - exact) < 4 * se);
}

TEST_CASE("block discovery on the five-candidate set") {
  const ConeCatalog cat(presets::mass_transfer_candidates(5), 4);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = discover_blocks(cat, kGamma, 20000, seed);
    CHECK(d.blocks.size() == 6);
    CHECK(d.quarantined.empty());
    CHECK(std::is_sorted(d.blocks.begin(), d.blocks.end()));
  }
}

TEST_CASE("discovery quarantines rare signatures") {
  const ConeCatalog cat(presets::mass_transfer_candidates(5), 4);
  CHECK_THROWS_AS(discover_blocks(cat, kGamma, 2, 1, 1000), NumericalError);
  const auto d = discover_blocks(cat, kGamma, 40, 1, 25);
  CHECK(d.blocks.size() + d.quarantined.size() == 6);
  for (auto h : d.quarantined_hits) CHECK(h < 25);
}

TEST_CASE("tallies are row-stochastic and standard errors are bounded") {
  const ConeCatalog cat(presets::identifiability_example(), 3);
  const std::uint64_t n = 2000;
  const BlockTable t = estimate_volumes(cat, kGamma, n, 3);
  CHECK(t.block_count() == 5);
  for (std::size_t c = 0; c < cat.cones().size(); ++c) {
    std::uint64_t total = 0;
    double vsum = 0.0;
    for (std::size_t b = 0; b < t.block_count(); ++b) {
      total += t.tallies[c][b];
      vsum += t.volume(static_cast<int>(c), static_cast<int>(b));
      CHECK(t.standard_error(static_cast<int>(c), static_cast<int>(b)) <= std::sqrt(0.25 / n) + 1e-15);
    }
    if (cat.cones()[c].degenerate) {
      CHECK(total == 0);
    } else {
      CHECK(total == n);
      CHECK(std::abs(vsum - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("parallel tally equals the serial reference bit for bit") {
  const ConeCatalog cat(presets::mass_transfer_candidates(6), 4);
  const auto serial = tally_signatures_serial(cat, kGamma, 42, 0, 3000);
  for (int threads : {1, 2, 4}) {
    par::set_threads(threads);
    CHECK(tally_signatures(cat, kGamma, 42, 0, 3000) == serial);
  }
  par::set_threads(0);
  const auto a = estimate_volumes(cat, kGamma, 1500, 9);
  const auto b = estimate_volumes_serial(cat, kGamma, 1500, 9);
  CHECK(a.tallies == b.tallies);
  CHECK(a.fingerprint() == b.fingerprint());
}

TEST_CASE("shards merge into the full run") {
  const ConeCatalog cat(presets::mass_transfer_candidates(5), 4);
  const auto d = discover_blocks(cat, kGamma, 5000, 17);
  const auto full = estimate_volumes(cat, kGamma, 2000, 23, &d.blocks);
  const std::vector<BlockTable> shards = {estimate_volume_shard(cat, kGamma, 23, 0, 700, &d.blocks),
                                          estimate_volume_shard(cat, kGamma, 23, 700, 1313, &d.blocks),
                                          estimate_volume_shard(cat, kGamma, 23, 1313, 2000, &d.blocks)};
  const auto merged = merge_block_tables(shards);
  CHECK(merged.samples_per_cone == 2000);
  CHECK(merged.blocks == full.blocks);
  CHECK(merged.tallies == full.tallies);
  CHECK(merged.fingerprint() == full.fingerprint());

  // Shards without known blocks still merge by signature union.
  const std::vector<BlockTable> open = {estimate_volume_shard(cat, kGamma, 23, 0, 1000),
                                        estimate_volume_shard(cat, kGamma, 23, 1000, 2000)};
  CHECK(merge_block_tables(open).tallies == estimate_volumes(cat, kGamma, 2000, 23).tallies);
}

TEST_CASE("self-merge doubles tallies and keeps volumes") {
  const ConeCatalog cat(presets::mass_transfer_candidates(5), 4);
  const auto t = estimate_volumes(cat, kGamma, 500, 4);
  const std::vector<BlockTable> twice = {t, t};
  const auto m = merge_block_tables(twice);
  CHECK(m.samples_per_cone == 1000);
  for (int c : cat.nondegenerate())
    for (int b = 0; b < static_cast<int>(m.block_count()); ++b)
      CHECK(m.volume(c, b) == t.volume(c, b));
}

TEST_CASE("merge errors") {
  const ConeCatalog five(presets::mass_transfer_candidates(5), 4);
  const ConeCatalog six(presets::mass_transfer_candidates(6), 4);
  const auto a = estimate_volumes(five, kGamma, 100, 1);
  const auto b = estimate_volumes(five, MeasureSpec{2.0, 1.0}, 100, 1);
  const auto c = estimate_volumes(six, kGamma, 100, 1);
  CHECK_THROWS_AS(merge_block_tables(std::vector<BlockTable>{a, b}), ConfigError);
  CHECK_THROWS_AS(merge_block_tables(std::vector<BlockTable>{a, c}), ConfigError);
  CHECK_THROWS_AS(merge_block_tables(std::vector<BlockTable>{}), ConfigError);
  CHECK_THROWS_AS(estimate_volume_shard(five, kGamma, 1, 10, 10), ConfigError);
}

TEST_CASE("seeding") {
  const ConeCatalog cat(presets::mass_transfer_candidates(5), 4);
  CHECK(estimate_volumes(cat, kGamma, 300, 1).fingerprint() ==
        estimate_volumes(cat, kGamma, 300, 1).fingerprint());
  CHECK(estimate_volumes(cat, kGamma, 300, 1).fingerprint() !=
        estimate_volumes(cat, kGamma, 300, 2).fingerprint());
}

TEST_CASE("unknown signatures go to the nearest known block") {
  const ConeCatalog cat(presets::mass_transfer_candidates(5), 4);
  const auto d = discover_blocks(cat, kGamma, 5000, 1);
  std::vector<Signature> partial(d.blocks.begin() + 1, d.blocks.end());
  const auto t = estimate_volumes(cat, kGamma, 1000, 2, &partial);
  CHECK(t.block_count() == 5);
  CHECK(t.reassigned > 0);
  for (int c : cat.nondegenerate()) {
    std::uint64_t total = 0;
    for (auto x : t.tallies[static_cast<std::size_t>(c)]) total += x;
    CHECK(total == 1000);
  }
}

TEST_CASE("nearest block rule") {
  const std::vector<Signature> blocks = {{0, 1}, {0, 2}, {1, 2, 3}};
  CHECK(nearest_block({0, 1, 2}, blocks) == 0);      // distance 1 to {0,1} and {0,2}; lexicographic
  CHECK(nearest_block({1, 2}, blocks) == 2);         // distance 1 to {1,2,3}
  CHECK(nearest_block({0, 1, 2}, blocks, 2) == 1);   // must contain cone 2: {0,2} beats {1,2,3}
  CHECK(nearest_block({0}, blocks, 7) == 0);         // no block has cone 7: fall back
  CHECK(nearest_block({0}, {}) == -1);
}

TEST_CASE("coefficients agree with an independent sampler") {
  // Cone 1234 of the five-candidate set splits between C134 and C234.
  const auto net = presets::mass_transfer_candidates(5);
  const ConeCatalog cat(net, 4);
  const std::uint64_t n = 20000;
  const auto t = estimate_volumes(cat, kGamma, n, 77);
  const int c1234 = *cat.find(parse_label("1234"));
  const int b234 = block_of(t, fixture::signature_of(cat, {"1234", "2345"}));
  REQUIRE(b234 >= 0);

  std::mt19937_64 gen(2024);
  std::gamma_distribution<double> g(1.5, 1.0);
  int hits = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    RateVector k = RateVector::Zero(4);
    for (int r = 0; r < 4; ++r) {
      const double w = g(gen);
      for (int s = 0; s < 4; ++s) k(s) += w * net.reactions[static_cast<std::size_t>(r)].vector[static_cast<std::size_t>(s)];
    }
    if (oracle::in_cone_square(net, {1, 2, 3, 4}, k)) ++hits;
  }
  const double ref = double(hits) / trials;
  const double v = t.volume(c1234, b234);
  const double se = std::sqrt(v * (1 - v) / n + ref * (1 - ref) / trials);
  CHECK(std::abs(v - ref) < 4 * se);
}

TEST_CASE("sampled cone points lie in their cone") {
  const auto net = presets::identifiability_example();
  const ConeCatalog cat(net, 3);
  rng::SplitMix64 gen(5);
  for (int c : cat.nondegenerate())
    for (int i = 0; i < 50; ++i) CHECK(membership(sample_cone_point(cat, c, kGamma, gen), c, cat));
  CHECK_THROWS_AS(sample_cone_point(cat, *cat.find(parse_label("124")), kGamma, gen), NumericalError);
}
