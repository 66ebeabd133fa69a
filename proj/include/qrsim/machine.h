#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qrsim/port.h"
#include "qrsim/program.h"
#include "qrsim/qcore.h"
#include "qrsim/report.h"

namespace qrsim {

using StateTuple = std::vector<std::string>;

enum class MachineKind { simple, master, buffer };
enum class Origin { authored, buffer, canonised, combined };

std::string to_string(MachineKind kind);

// A register of a machine as seen by its transition: quantum state register
// `index`, classical state register `index`, or a port.
struct Role {
    enum class Kind { q, c, port };
    Kind kind = Kind::q;
    std::size_t index = 0;
    Port port;

    // "q", "c", "q1", "c2" or a port such as "in?".
    static Role parse(std::string_view text);
    std::string str() const;
    friend auto operator<=>(const Role&, const Role&) = default;
};

// Positions of a machine's registers inside the factor its transition acts on.
struct RegisterSlots {
    std::vector<std::size_t> q;
    std::vector<std::size_t> c;
    std::map<Port, std::size_t> ports;

    std::size_t at(const Role& role) const;
};

class Transition {
public:
    virtual ~Transition() = default;
    // Applies the (trace preserving) map to an unnormalised operator.
    virtual Factor apply(const Factor& m, const RegisterSlots& slots) const = 0;
};

struct KrausSpec {
    std::vector<std::string> domain;
    std::vector<Eigen::MatrixXcd> operators;
};

using TransitionSpec = std::variant<KrausSpec, Program>;

// Authoring input for a machine with one quantum and one classical register.
struct MachineSpec {
    std::string name;
    std::vector<Port> ports;
    std::set<Port> cports;
    std::vector<std::string> qstates;
    std::vector<std::string> cstates;
    std::vector<std::string> fin;
    // (classical state, in-port) pairs whose length is 0; all others are unbounded.
    std::vector<std::pair<std::string, Port>> zero_length;
    TransitionSpec delta;
    SpacePtr message_space;
    // Initial quantum state label: "" by default, "0" when declared as alias.
    std::string initial_qstate;
};

struct MachineDef;
using MachinePtr = std::shared_ptr<const MachineDef>;

struct MachineDef {
    std::string name;
    std::vector<Port> ports;
    std::set<Port> cports;
    std::vector<SpacePtr> qregs;
    std::vector<SpacePtr> cregs;
    std::vector<std::string> initial_q;
    std::set<StateTuple> fin;
    SpacePtr message_space;
    std::shared_ptr<const Transition> delta;

    Origin origin = Origin::authored;
    std::optional<MachineSpec> spec;                     // authored
    std::set<std::pair<std::string, Port>> zero_length;  // authored
    MachinePtr base;                                     // canonised
    MachinePtr first, second;                            // combined, canonised components
    MachinePtr first_input, second_input;                // combined, as given
    std::string connection;                              // buffer
    std::size_t queue_cap = 0;                           // buffer

    bool is_final(const StateTuple& s) const { return fin.count(s) > 0; }
    // True when the length function is 0 for (s, p): input on p is erased.
    bool erases(const StateTuple& s, const Port& p) const;
    bool is_classical(const Port& p) const { return cports.count(p) > 0; }
    bool has_port(const Port& p) const;
    std::vector<Port> in_ports() const;
    std::vector<Port> out_ports() const;
};

MachinePtr make_machine(MachineSpec spec);
std::optional<MachineKind> machine_kind(const MachineDef& m);
// Checks the machine clauses; `ks` are the security parameters whose initial
// classical states must exist.
Report validate_machine(const MachineDef& m, const std::set<int>& ks = {1});

inline constexpr std::size_t kDefaultQueueCap = 4;
inline constexpr int kDefaultBufferMaxK = 8;

std::string buffer_name(const std::string& connection);
MachinePtr make_buffer(const std::string& connection, std::size_t queue_cap, SpacePtr msg_space,
                       int max_k = kDefaultBufferMaxK);
// Queue contents encoded by a queue-register label.
std::vector<std::string> decode_queue(std::string_view label);
std::string encode_queue(const std::vector<std::string>& messages);

// Register ids of one machine inside a DensityState.
struct MachineRegisters {
    std::vector<SubsystemId> q;
    std::vector<SubsystemId> c;
    std::map<Port, SubsystemId> ports;
};

// Applies the machine's transition to its registers.
DensityState apply_transition(const DensityState& state, const MachineDef& m, const MachineRegisters& regs);
DensityState buffer_transition(const DensityState& state, const MachineDef& buffer, const MachineRegisters& regs);

MachinePtr canonise(const MachinePtr& m);
MachinePtr combine(const MachinePtr& m1, const MachinePtr& m2);
std::string combined_name(const std::string& a, const std::string& b);

std::shared_ptr<const Transition> compile_program(const TransitionSpec& spec, const MachineDef& m);

}  // namespace qrsim
