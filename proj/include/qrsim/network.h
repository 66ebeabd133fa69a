#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "qrsim/machine.h"

namespace qrsim {

class Collection {
public:
    Collection() = default;
    explicit Collection(std::vector<MachinePtr> machines) : machines_(std::move(machines)) {}

    const std::vector<MachinePtr>& machines() const { return machines_; }
    MachinePtr find(const std::string& name) const;
    bool empty() const { return machines_.empty(); }
    Collection with(MachinePtr m) const;
    // Replaces the machines named in `names` by `m`, placed at the first one's position.
    Collection replacing(const std::vector<std::string>& names, MachinePtr m) const;

private:
    std::vector<MachinePtr> machines_;
};

struct BufferParams {
    std::size_t queue_cap = kDefaultQueueCap;
    int max_k = kDefaultBufferMaxK;
};

// Distinct names, disjoint port sets, every member classified.
Report validate_collection(const Collection& c);
std::set<Port> ports_of(const Collection& c);
std::set<Port> free_ports(const Collection& c);
// Ports of the completion, computed without building the buffers.
std::set<Port> completed_ports(const Collection& c);
// free([c]).
std::set<Port> completed_free_ports(const Collection& c);
Collection completion(const Collection& c, const BufferParams& params = {});
bool is_closed(const Collection& c);
MachinePtr scheduler_of(const std::string& buffer_name, const Collection& c);
// The unique machine with the master-clock port, or null.
MachinePtr master_of(const Collection& c);

struct Structure {
    Collection machines;
    std::set<Port> service;
};

Structure make_structure(Collection machines, std::set<Port> service);
Report validate_structure(const Structure& s);
std::set<Port> forbidden(const Structure& s);

struct Configuration {
    Structure structure;
    MachinePtr user;
    MachinePtr adversary;

    Collection collection() const;
};

Configuration make_config(Structure s, MachinePtr user, MachinePtr adversary);
bool is_suitable(const Configuration& cfg, const Structure& other);

// Empty report iff the structures are composable.
Report composability(std::span<const Structure> structures);
bool composable(std::span<const Structure> structures);
Structure compose(std::span<const Structure> structures);

}  // namespace qrsim
