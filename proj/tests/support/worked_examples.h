#pragma once

#include <string>
#include <utility>
#include <vector>

#include "support/networks.h"

namespace qrsim::testing {

RunConfig document_config(const NetworkDocument& doc, int budget = 64);

// The wrapper protocol composed with the OTP real and ideal structures, with
// the wrapper's user and the unchanged simulator.
SecurityClaim composed_otp_claim(const NetworkDocument& otp);

// The six states the teleportation users send, by user name.
std::vector<std::pair<std::string, Eigen::VectorXcd>> teleport_inputs(const SpacePtr& msgs);

// Smallest fidelity, over all leaves, of the qubit the user ends up holding.
// Returns -1 when the leaves do not carry the full probability.
double delivered_fidelity(const Configuration& cfg, const Eigen::VectorXcd& psi, const RunConfig& rc);

}  // namespace qrsim::testing
