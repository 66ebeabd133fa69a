#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "qrsim/network.h"
#include "qrsim/runner.h"

namespace qrsim {

inline constexpr double kPerfectTolerance = 1e-9;
inline constexpr double kDefaultDefectCeiling = 1e-9;

struct KComparison {
    double sd = 0.0;
    double real_defect = 0.0;
    double ideal_defect = 0.0;

    friend bool operator==(const KComparison&, const KComparison&) = default;
};

// Outcome of witness verification: per-k distances between the honest
// user's views, with the unexplored mass of each side.
struct Verdict {
    std::map<int, KComparison> per_k;
    // Upper bound the distances were held against, per k.
    std::map<int, double> bound;
    // False when some defect exceeds the ceiling; such verdicts never pass.
    bool reliable = true;
    bool pass = false;
    std::vector<std::string> notes;
};

struct CompareOptions {
    double defect_ceiling = kDefaultDefectCeiling;
    double tolerance = kPerfectTolerance;
};

Verdict compare_views(const Configuration& cfg1, const Configuration& cfg2, const std::string& user_name,
                      const std::set<int>& ks, const RunConfig& rc, const CompareOptions& options = {});

enum class SecurityMode { perfect, statistical };
enum class SecurityFlavor { standard, universal };

struct Witness {
    MachinePtr user;
    MachinePtr real_adversary;
    MachinePtr simulator;
};

struct SecurityClaim {
    std::string name;
    Structure real;
    Structure ideal;
    SecurityMode mode = SecurityMode::perfect;
    SecurityFlavor flavor = SecurityFlavor::standard;
    std::vector<Witness> witnesses;
    // Statistical mode only: allowed distance per k.
    std::map<int, double> bounds;
};

struct ClaimResult {
    // Violations of the claim's own preconditions; nothing was run if any.
    Report malformed;
    std::vector<Verdict> verdicts;  // one per witness
    bool pass = false;
};

// Checks the claim's shape: equal service ports, witnesses present, bounds for
// every k in statistical mode, one simulator per adversary when universal.
Report validate_claim(const SecurityClaim& claim, const std::set<int>& ks);
ClaimResult check_claim(const SecurityClaim& claim, const std::set<int>& ks, const RunConfig& rc,
                        const CompareOptions& options = {});

// Bound for the outer pair of a chain real >= middle >= ideal.
Verdict chain_verdicts(const Verdict& v12, const Verdict& v23);

std::string to_string(SecurityMode mode);
std::string to_string(SecurityFlavor flavor);

}  // namespace qrsim
