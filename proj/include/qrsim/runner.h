#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qrsim/machine.h"
#include "qrsim/network.h"
#include "qrsim/qcore.h"

namespace qrsim {

// One activation: (name, s, I, s', O, P).
struct TraceRecord {
    std::string machine;
    StateTuple s;
    std::map<Port, std::string> inputs;
    StateTuple s_prime;
    std::map<Port, std::string> outputs;
    std::set<Port> nonempty;

    friend auto operator<=>(const TraceRecord&, const TraceRecord&) = default;
    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
    std::vector<TraceRecord> records;
    // The activation budget ran out before the run ended.
    bool truncated = false;

    friend auto operator<=>(const Trace&, const Trace&) = default;
    friend bool operator==(const Trace&, const Trace&) = default;
};

struct View {
    std::vector<TraceRecord> records;
    bool truncated = false;

    friend auto operator<=>(const View&, const View&) = default;
    friend bool operator==(const View&, const View&) = default;
};

struct RunConfig {
    int k = 1;
    // Number of transition applications after which a branch is cut off.
    int max_activations = 64;
    // Branches whose probability falls below this are dropped into pruned mass.
    double prune_eps = 0.0;
    std::size_t queue_cap = kDefaultQueueCap;
    bool keep_final_states = false;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Subsystem ids of every machine of the completed collection.
struct RunLayout {
    std::map<std::string, MachineRegisters> machines;

    const MachineRegisters& at(const std::string& name) const;
    // Id of the port subsystem, whichever machine owns it.
    SubsystemId port(const Port& p) const;
};

struct Leaf {
    Trace trace;
    DensityState state;
};

struct RunResult {
    Distribution<Trace> traces;
    double truncated_mass = 0.0;
    // Mass of runs whose master scheduler keeps getting reactivated without
    // input; those traces are complete and also counted here.
    double diverged_mass = 0.0;
    RunConfig config;
    RunLayout layout;
    std::vector<Leaf> leaves;  // only with keep_final_states

    double defect() const { return traces.pruned_mass + truncated_mass; }
};

RunLayout make_layout(const Collection& completed);
// Product of the machines' initial states; throws ValidationError when some
// machine has no classical state 1^k.
DensityState initial_state(const Collection& completed, const RunLayout& layout, int k);

// Runs a closed collection. Buffers are added as needed.
RunResult run(const Collection& c, const RunConfig& cfg);

Distribution<View> view(const Distribution<Trace>& runs, const std::string& machine);
View view_of(const Trace& t, const std::string& machine);

// Extracts the view of one component (1 or 2) from a view of a combination.
View project_combined_view(const View& v, const MachineDef& combined, int component);
Distribution<View> project_combined_view(const Distribution<View>& v, const MachineDef& combined, int component);

std::string to_string(const TraceRecord& r);

}  // namespace qrsim
