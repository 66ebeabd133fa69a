#pragma once

#include <cstdint>

#include "qrsim/network.h"

namespace qrsim::testing {

// Small closed collections with quantum registers and random programs: up to
// three machines (one master scheduler), messages of length at most one,
// classical states {1, 11, 0, 00}.
Collection random_network(std::uint64_t seed);

// Alphabet of the random networks.
Alphabet random_alphabet();

}  // namespace qrsim::testing
