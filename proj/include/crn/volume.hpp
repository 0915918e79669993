#pragma once

// Building-block discovery and Monte Carlo relative volumes.
//
// Every non-degenerate cone is sampled through its conical coordinates, which
// are i.i.d. Gamma(alpha, lambda). Sample j of cone c owns the stream keyed by
// (seed, c, j), so any partition of the index range into shards reproduces the
// single-run tallies exactly.

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crn/geometry.hpp"
#include "crn/random.hpp"

namespace crn {

struct MeasureSpec {
  double alpha = 1.5;   // shape
  double lambda = 1.0;  // rate

  /// Throws ConfigError unless both parameters are finite and positive.
  void validate() const;
  friend bool operator==(const MeasureSpec&, const MeasureSpec&) = default;
};

template <class Rng>
Eigen::VectorXd sample_cone_weights(int d, const MeasureSpec& measure, Rng& rng) {
  std::gamma_distribution<double> gamma(measure.alpha, 1.0 / measure.lambda);
  Eigen::VectorXd w(d);
  for (int j = 0; j < d; ++j) w(j) = gamma(rng);
  return w;
}

/// Random point of the cone in species coordinates: sum_j w_j R_sigma(j) with
/// w_j ~ Gamma(alpha, lambda). Throws NumericalError for degenerate cones.
template <class Rng>
RateVector sample_cone_point(const ConeCatalog& catalog, int cone,
                             const MeasureSpec& measure, Rng& rng) {
  const Eigen::VectorXd w = sample_cone_weights(catalog.dimension(), measure, rng);
  return catalog.lift(catalog.combine(cone, w));
}

/// Stream of the j-th Monte Carlo sample of a cone.
inline rng::SplitMix64 sample_stream(std::uint64_t seed, int cone, std::uint64_t index) {
  return rng::SplitMix64(
      rng::combine(rng::combine(seed, static_cast<std::uint64_t>(cone)), index));
}

/// Signature -> per-cone sample counts (indexed by catalog cone position).
using SignatureTally = std::map<Signature, std::vector<std::uint64_t>>;

/// Samples indices [begin, end) of every non-degenerate cone and tallies signatures.
SignatureTally tally_signatures(const ConeCatalog& catalog, const MeasureSpec& measure,
                                std::uint64_t seed, std::uint64_t begin, std::uint64_t end);
/// Reference single-threaded kernel; bit-identical output.
SignatureTally tally_signatures_serial(const ConeCatalog& catalog, const MeasureSpec& measure,
                                       std::uint64_t seed, std::uint64_t begin,
                                       std::uint64_t end);

struct BlockDiscovery {
  std::vector<Signature> blocks;  // lexicographic order; S_{i+1} is blocks[i]
  std::vector<std::uint64_t> hits;
  std::vector<Signature> quarantined;  // seen fewer than min_hits times
  std::vector<std::uint64_t> quarantined_hits;
  std::uint64_t samples_per_cone = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kMinBlockHits = 3;

BlockDiscovery discover_blocks(const ConeCatalog& catalog, const MeasureSpec& measure,
                               std::uint64_t samples_per_cone, std::uint64_t seed,
                               std::uint64_t min_hits = kMinBlockHits);

struct BlockTable {
  std::uint64_t catalog_fingerprint = 0;
  MeasureSpec measure;
  std::uint64_t seed = 0;
  std::uint64_t samples_per_cone = 0;  // N
  std::vector<Signature> blocks;
  /// tallies[cone][block]; rows of degenerate cones are all zero.
  std::vector<std::vector<std::uint64_t>> tallies;
  /// Samples whose signature was not a known block and went to the nearest one.
  std::uint64_t reassigned = 0;

  std::size_t block_count() const { return blocks.size(); }
  double volume(int cone, int block) const;
  /// Binomial standard error sqrt(v(1-v)/N).
  double standard_error(int cone, int block) const;
  std::uint64_t fingerprint() const;
};

/// Relative volumes from N samples per non-degenerate cone. With `blocks`
/// null, the blocks are the distinct signatures observed; otherwise samples
/// with an unknown signature go to the nearest known block (see
/// nearest_block) and are counted in `reassigned`.
BlockTable estimate_volumes(const ConeCatalog& catalog, const MeasureSpec& measure,
                            std::uint64_t samples_per_cone, std::uint64_t seed,
                            const std::vector<Signature>* blocks = nullptr);
BlockTable estimate_volumes_serial(const ConeCatalog& catalog, const MeasureSpec& measure,
                                   std::uint64_t samples_per_cone, std::uint64_t seed,
                                   const std::vector<Signature>* blocks = nullptr);

/// Sample range [begin, end) only; shards merge into the full run.
BlockTable estimate_volume_shard(const ConeCatalog& catalog, const MeasureSpec& measure,
                                 std::uint64_t seed, std::uint64_t begin, std::uint64_t end,
                                 const std::vector<Signature>* blocks = nullptr);

/// Sums tallies (blocks are unioned). Throws ConfigError on mismatched catalog
/// or measure, or an empty list.
BlockTable merge_block_tables(std::span<const BlockTable> tables);

/// Index of the block whose signature has the smallest symmetric difference
/// with `sig`; ties go to the lexicographically smallest signature. When
/// `required_cone` >= 0, only blocks containing that cone are considered
/// (falling back to all blocks if none does). Returns -1 for an empty list.
int nearest_block(const Signature& sig, const std::vector<Signature>& blocks,
                  int required_cone = -1);

}  // namespace crn
