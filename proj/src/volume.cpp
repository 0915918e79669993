#include "crn/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "crn/errors.hpp"

namespace crn {

void MeasureSpec::validate() const {
  if (!(std::isfinite(alpha) && alpha > 0.0) || !(std::isfinite(lambda) && lambda > 0.0))
    throw ConfigError("measure parameters must be finite and positive");
}

namespace {

constexpr std::uint64_t kChunk = 256;

void tally_range(const ConeCatalog& catalog, const MeasureSpec& measure, std::uint64_t seed,
                 int cone, std::uint64_t begin, std::uint64_t end, SignatureTally& out) {
  const std::size_t ncones = catalog.cones().size();
  Signature sig;
  for (std::uint64_t j = begin; j < end; ++j) {
    auto stream = sample_stream(seed, cone, j);
    const Eigen::VectorXd w = sample_cone_weights(catalog.dimension(), measure, stream);
    catalog.signature_reduced(catalog.combine(cone, w), sig);
    auto it = out.find(sig);
    if (it == out.end()) it = out.emplace(sig, std::vector<std::uint64_t>(ncones, 0)).first;
    ++it->second[static_cast<std::size_t>(cone)];
  }
}

void accumulate(SignatureTally& into, const SignatureTally& from) {
  for (const auto& [sig, counts] : from) {
    auto it = into.find(sig);
    if (it == into.end()) {
      into.emplace(sig, counts);
    } else {
      for (std::size_t c = 0; c < counts.size(); ++c) it->second[c] += counts[c];
    }
  }
}

void check_range(const MeasureSpec& measure, std::uint64_t begin, std::uint64_t end) {
  measure.validate();
  if (end <= begin) throw ConfigError("Monte Carlo sample range is empty");
}

BlockTable table_from_tally(const ConeCatalog& catalog, const MeasureSpec& measure,
                            std::uint64_t seed, std::uint64_t n, const SignatureTally& tally,
                            const std::vector<Signature>* blocks) {
  BlockTable t;
  t.catalog_fingerprint = catalog.fingerprint();
  t.measure = measure;
  t.seed = seed;
  t.samples_per_cone = n;
  if (blocks) {
    t.blocks = *blocks;
    if (!std::is_sorted(t.blocks.begin(), t.blocks.end()))
      std::sort(t.blocks.begin(), t.blocks.end());
  } else {
    for (const auto& kv : tally) t.blocks.push_back(kv.first);
  }
  if (t.blocks.empty()) throw NumericalError("no building blocks");
  const std::size_t ncones = catalog.cones().size();
  t.tallies.assign(ncones, std::vector<std::uint64_t>(t.blocks.size(), 0));
  for (const auto& [sig, counts] : tally) {
    auto exact = std::lower_bound(t.blocks.begin(), t.blocks.end(), sig);
    const bool known = exact != t.blocks.end() && *exact == sig;
    for (std::size_t c = 0; c < ncones; ++c) {
      if (counts[c] == 0) continue;
      int b = known ? static_cast<int>(exact - t.blocks.begin())
                    : nearest_block(sig, t.blocks, static_cast<int>(c));
      t.tallies[c][static_cast<std::size_t>(b)] += counts[c];
      if (!known) t.reassigned += counts[c];
    }
  }
  return t;
}

}  // namespace

SignatureTally tally_signatures_serial(const ConeCatalog& catalog, const MeasureSpec& measure,
                                       std::uint64_t seed, std::uint64_t begin,
                                       std::uint64_t end) {
  check_range(measure, begin, end);
  SignatureTally out;
  for (int c : catalog.nondegenerate()) tally_range(catalog, measure, seed, c, begin, end, out);
  return out;
}

SignatureTally tally_signatures(const ConeCatalog& catalog, const MeasureSpec& measure,
                                std::uint64_t seed, std::uint64_t begin, std::uint64_t end) {
  check_range(measure, begin, end);
  struct Item {
    int cone;
    std::uint64_t lo, hi;
  };
  std::vector<Item> items;
  for (int c : catalog.nondegenerate())
    for (std::uint64_t lo = begin; lo < end; lo += kChunk)
      items.push_back({c, lo, std::min(end, lo + kChunk)});

  SignatureTally out;
  const auto count = static_cast<std::int64_t>(items.size());
#pragma omp parallel
  {
    SignatureTally local;
#pragma omp for schedule(dynamic, 4) nowait
    for (std::int64_t i = 0; i < count; ++i) {
      const Item& it = items[static_cast<std::size_t>(i)];
      tally_range(catalog, measure, seed, it.cone, it.lo, it.hi, local);
    }
#pragma omp critical(crn_tally_merge)
    accumulate(out, local);
  }
  return out;
}

BlockDiscovery discover_blocks(const ConeCatalog& catalog, const MeasureSpec& measure,
                               std::uint64_t samples_per_cone, std::uint64_t seed,
                               std::uint64_t min_hits) {
  if (catalog.nondegenerate().empty()) throw NumericalError("all cones are degenerate");
  const auto tally = tally_signatures(catalog, measure, seed, 0, samples_per_cone);
  BlockDiscovery d;
  d.samples_per_cone = samples_per_cone;
  d.seed = seed;
  for (const auto& [sig, counts] : tally) {
    std::uint64_t hits = 0;
    for (auto x : counts) hits += x;
    if (hits >= min_hits) {
      d.blocks.push_back(sig);
      d.hits.push_back(hits);
    } else {
      d.quarantined.push_back(sig);
      d.quarantined_hits.push_back(hits);
    }
  }
  if (d.blocks.empty()) throw NumericalError("block discovery found no building blocks");
  return d;
}

BlockTable estimate_volumes(const ConeCatalog& catalog, const MeasureSpec& measure,
                            std::uint64_t samples_per_cone, std::uint64_t seed,
                            const std::vector<Signature>* blocks) {
  if (catalog.nondegenerate().empty()) throw NumericalError("all cones are degenerate");
  const auto tally = tally_signatures(catalog, measure, seed, 0, samples_per_cone);
  return table_from_tally(catalog, measure, seed, samples_per_cone, tally, blocks);
}

BlockTable estimate_volumes_serial(const ConeCatalog& catalog, const MeasureSpec& measure,
                                   std::uint64_t samples_per_cone, std::uint64_t seed,
                                   const std::vector<Signature>* blocks) {
  if (catalog.nondegenerate().empty()) throw NumericalError("all cones are degenerate");
  const auto tally = tally_signatures_serial(catalog, measure, seed, 0, samples_per_cone);
  return table_from_tally(catalog, measure, seed, samples_per_cone, tally, blocks);
}

BlockTable estimate_volume_shard(const ConeCatalog& catalog, const MeasureSpec& measure,
                                 std::uint64_t seed, std::uint64_t begin, std::uint64_t end,
                                 const std::vector<Signature>* blocks) {
  if (catalog.nondegenerate().empty()) throw NumericalError("all cones are degenerate");
  const auto tally = tally_signatures(catalog, measure, seed, begin, end);
  return table_from_tally(catalog, measure, seed, end - begin, tally, blocks);
}

BlockTable merge_block_tables(std::span<const BlockTable> tables) {
  if (tables.empty()) throw ConfigError("no block tables to merge");
  const BlockTable& first = tables.front();
  std::vector<Signature> blocks;
  for (const auto& t : tables) {
    if (t.catalog_fingerprint != first.catalog_fingerprint)
      throw ConfigError("block tables were built from different cone catalogs");
    if (!(t.measure == first.measure))
      throw ConfigError("block tables use different sampling measures");
    if (t.tallies.size() != first.tallies.size())
      throw ConfigError("block tables have different cone counts");
    blocks.insert(blocks.end(), t.blocks.begin(), t.blocks.end());
  }
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());

  BlockTable out;
  out.catalog_fingerprint = first.catalog_fingerprint;
  out.measure = first.measure;
  out.seed = first.seed;
  out.blocks = blocks;
  out.tallies.assign(first.tallies.size(), std::vector<std::uint64_t>(blocks.size(), 0));
  for (const auto& t : tables) {
    out.samples_per_cone += t.samples_per_cone;
    out.reassigned += t.reassigned;
    for (std::size_t b = 0; b < t.blocks.size(); ++b) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(blocks.begin(), blocks.end(), t.blocks[b]) - blocks.begin());
      for (std::size_t c = 0; c < t.tallies.size(); ++c) out.tallies[c][pos] += t.tallies[c][b];
    }
  }
  return out;
}

double BlockTable::volume(int cone, int block) const {
  if (samples_per_cone == 0) return 0.0;
  return static_cast<double>(tallies[static_cast<std::size_t>(cone)][static_cast<std::size_t>(block)]) /
         static_cast<double>(samples_per_cone);
}

double BlockTable::standard_error(int cone, int block) const {
  if (samples_per_cone == 0) return 0.0;
  const double v = volume(cone, block);
  return std::sqrt(v * (1.0 - v) / static_cast<double>(samples_per_cone));
}

std::uint64_t BlockTable::fingerprint() const {
  std::uint64_t h = rng::combine(catalog_fingerprint, seed);
  h = rng::combine(h, samples_per_cone);
  h = rng::combine(h, std::bit_cast<std::uint64_t>(measure.alpha));
  h = rng::combine(h, std::bit_cast<std::uint64_t>(measure.lambda));
  for (const auto& b : blocks) {
    h = rng::combine(h, b.size());
    for (int c : b) h = rng::combine(h, static_cast<std::uint64_t>(c));
  }
  for (const auto& row : tallies)
    for (auto x : row) h = rng::combine(h, x);
  return h;
}

int nearest_block(const Signature& sig, const std::vector<Signature>& blocks,
                  int required_cone) {
  auto distance = [&](const Signature& b) {
    std::size_t common = 0;
    auto i = sig.begin();
    auto j = b.begin();
    while (i != sig.end() && j != b.end()) {
      if (*i < *j) {
        ++i;
      } else if (*j < *i) {
        ++j;
      } else {
        ++common;
        ++i;
        ++j;
      }
    }
    return sig.size() + b.size() - 2 * common;
  };
  auto search = [&](bool restrict) {
    int best = -1;
    std::size_t best_d = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (restrict && !std::binary_search(blocks[b].begin(), blocks[b].end(), required_cone))
        continue;
      const std::size_t d = distance(blocks[b]);
      if (best < 0 || d < best_d || (d == best_d && blocks[b] < blocks[static_cast<std::size_t>(best)])) {
        best = static_cast<int>(b);
        best_d = d;
      }
    }
    return best;
  };
  int b = required_cone >= 0 ? search(true) : -1;
  return b >= 0 ? b : search(false);
}

}  // namespace crn
