#pragma once

// Reference networks used by tests, the benchmark and the bundled configs.

#include "crn/model.hpp"

namespace crn::presets {

/// Five reactions A0 -> {2A1, A1+A2, 2A3, 2A2, A1+A3}; reaction vectors span
/// a 3-dimensional subspace and two of the ten triples are degenerate.
ReactionNetwork identifiability_example();

/// The four-reaction "mass transfer" network A0 -> {A2+A3, A1, A1+A2, 2A3}.
ReactionNetwork mass_transfer_true();

/// mass_transfer_true() plus m-4 incorrect reactions appended in the fixed
/// order A0 -> A2, A3, A1+A3, 2A2, 2A1. Valid for 4 <= m <= 9.
ReactionNetwork mass_transfer_candidates(int m);

/// Planar instance R1=(1,0), R2=(1,1), R3=(0,1) from the zero complex.
ReactionNetwork planar_oracle();

}  // namespace crn::presets
