#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qrsim/network.h"
#include "qrsim/runner.h"

namespace qrsim::testing {

// Purely classical machines given by transition tables, and a brute-force
// simulator for them that shares no code with the density-matrix runner.

struct ClassicalOutcome {
    double p = 1.0;
    std::string next;
    // Out-port contents after the transition; unlisted ports stay empty.
    std::map<Port, std::string> out;
};

struct ClassicalMachine {
    std::string name;
    std::vector<Port> ports;
    std::vector<std::string> states;
    std::set<std::string> fin;
    std::set<std::pair<std::string, Port>> zero_length;
    // Keyed by the state and the contents of in(ports), in port order.
    std::map<std::pair<std::string, std::vector<std::string>>, std::vector<ClassicalOutcome>> table;
    // Used for keys missing from the table.
    std::vector<ClassicalOutcome> fallback;

    std::vector<Port> in_ports() const;
    const std::vector<ClassicalOutcome>& outcomes(const std::string& s, const std::vector<std::string>& in) const;
};

struct ClassicalNetwork {
    Alphabet alphabet{"01", 2};
    std::vector<ClassicalMachine> machines;
};

struct ClassicalRun {
    Distribution<Trace> traces;
    double truncated_mass = 0.0;
    double diverged_mass = 0.0;
    // Set when the run hit a queue overflow.
    bool overflow = false;
};

ClassicalRun classical_run(const ClassicalNetwork& net, int k, int budget, std::size_t queue_cap);

// The same network as program machines with only classical ports.
Collection to_collection(const ClassicalNetwork& net);

ClassicalNetwork random_classical_network(std::uint64_t seed);

}  // namespace qrsim::testing
