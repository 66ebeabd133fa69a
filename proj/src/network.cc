#include "qrsim/network.h"

#include <algorithm>
#include <map>

namespace qrsim {

MachinePtr Collection::find(const std::string& name) const {
    for (const auto& m : machines_)
        if (m->name == name) return m;
    return nullptr;
}

Collection Collection::with(MachinePtr m) const {
    auto ms = machines_;
    ms.push_back(std::move(m));
    return Collection(std::move(ms));
}

Collection Collection::replacing(const std::vector<std::string>& names, MachinePtr m) const {
    std::vector<MachinePtr> out;
    bool placed = false;
    for (const auto& x : machines_) {
        if (std::find(names.begin(), names.end(), x->name) == names.end()) {
            out.push_back(x);
        } else if (!placed) {
            out.push_back(m);
            placed = true;
        }
    }
    if (!placed) throw std::invalid_argument("none of the replaced machines is in the collection");
    return Collection(std::move(out));
}

Report validate_collection(const Collection& c) {
    Report report;
    std::set<std::string> names;
    std::map<Port, std::string> owner;
    SpacePtr msgs;
    for (const auto& m : c.machines()) {
        if (!names.insert(m->name).second) report.add("pairwise different machine names", "name " + m->name + " repeats");
        for (const auto& p : m->ports) {
            auto [it, fresh] = owner.emplace(p, m->name);
            if (!fresh)
                report.add("pairwise disjoint port sets", p.str() + " belongs to both " + it->second + " and " + m->name);
        }
        if (!machine_kind(*m)) report.add("machine kind", m->name + " is neither simple, master scheduler nor buffer");
        if (!msgs)
            msgs = m->message_space;
        else if (!same_basis(msgs, m->message_space))
            report.add("message space", m->name + " uses a different message space");
    }
    return report;
}

std::set<Port> ports_of(const Collection& c) {
    std::set<Port> out;
    for (const auto& m : c.machines()) out.insert(m->ports.begin(), m->ports.end());
    return out;
}

namespace {

std::set<Port> free_in(const std::set<Port>& ports) {
    std::set<Port> out;
    for (const auto& p : ports)
        if (!ports.count(complement(p))) out.insert(p);
    return out;
}

std::set<std::string> buffered_names(const Collection& c) {
    std::set<std::string> names;
    for (const auto& m : c.machines())
        for (const auto& p : m->ports)
            if (p != kMasterClock) names.insert(p.name);
    return names;
}

}  // namespace

std::set<Port> free_ports(const Collection& c) { return free_in(ports_of(c)); }

std::set<Port> completed_ports(const Collection& c) {
    auto ports = ports_of(c);
    for (const auto& n : buffered_names(c)) {
        ports.insert({n, PortLabel::buffer, Direction::in});
        ports.insert({n, PortLabel::buffer, Direction::out});
        ports.insert({n, PortLabel::clock, Direction::in});
    }
    return ports;
}

std::set<Port> completed_free_ports(const Collection& c) { return free_in(completed_ports(c)); }

Collection completion(const Collection& c, const BufferParams& params) {
    SpacePtr msgs;
    std::set<std::string> present;
    for (const auto& m : c.machines()) {
        if (m->origin == Origin::buffer)
            present.insert(m->connection);
        else if (!msgs)
            msgs = m->message_space;
    }
    if (!msgs) msgs = c.empty() ? Alphabet().message_space() : c.machines().front()->message_space;
    Collection out = c;
    for (const auto& n : buffered_names(c))
        if (!present.count(n)) out = out.with(make_buffer(n, params.queue_cap, msgs, params.max_k));
    return out;
}

bool is_closed(const Collection& c) { return completed_free_ports(c) == std::set<Port>{kMasterClock}; }

MachinePtr scheduler_of(const std::string& buffer_name, const Collection& c) {
    std::string n = buffer_name;
    if (!n.empty() && n.back() == '~') n.pop_back();
    const Port clock_out{n, PortLabel::clock, Direction::out};
    for (const auto& m : c.machines())
        if (m->has_port(clock_out)) return m;
    return nullptr;
}

MachinePtr master_of(const Collection& c) {
    MachinePtr found;
    for (const auto& m : c.machines()) {
        if (m->has_port(kMasterClock)) {
            if (found) return nullptr;
            found = m;
        }
    }
    return found;
}

Report validate_structure(const Structure& s) {
    Report report = validate_collection(s.machines);
    for (const auto& m : s.machines.machines()) {
        const auto kind = machine_kind(*m);
        if (kind && *kind != MachineKind::simple)
            report.add("structures hold simple machines", m->name + " is a " + to_string(*kind));
    }
    const auto free = completed_free_ports(s.machines);
    for (const auto& p : s.service)
        if (!free.count(p)) report.add("service ports are free", p.str() + " is not a free port of the completion");
    return report;
}

Structure make_structure(Collection machines, std::set<Port> service) {
    Structure s{std::move(machines), std::move(service)};
    Report report = validate_structure(s);
    if (!report.ok()) throw ValidationError(std::move(report));
    return s;
}

std::set<Port> forbidden(const Structure& s) {
    auto out = ports_of(s.machines);
    for (const auto& p : completed_free_ports(s.machines))
        if (!s.service.count(p)) out.insert(complement(p));
    return out;
}

Collection Configuration::collection() const { return structure.machines.with(user).with(adversary); }

Configuration make_config(Structure s, MachinePtr user, MachinePtr adversary) {
    Configuration cfg{std::move(s), std::move(user), std::move(adversary)};
    const Collection all = cfg.collection();
    Report report = validate_collection(all);
    const auto forb = forbidden(cfg.structure);
    std::set<Port> touched;
    for (const auto& p : cfg.user->ports)
        if (forb.count(p)) touched.insert(p);
    if (!touched.empty()) report.add("user without forbidden ports", cfg.user->name + " uses " + join_ports(touched));
    auto dangling = completed_free_ports(all);
    if (!dangling.erase(kMasterClock)) report.add("closed collection", "no machine owns the master clock port");
    if (!dangling.empty()) report.add("closed collection", "dangling ports " + join_ports(dangling));
    std::size_t masters = 0;
    for (const auto& m : all.machines()) masters += m->has_port(kMasterClock) ? 1 : 0;
    if (masters != 1)
        report.add("one master scheduler", std::to_string(masters) + " machines own the master clock port");
    if (!report.ok()) throw ValidationError(std::move(report));
    return cfg;
}

bool is_suitable(const Configuration& cfg, const Structure& other) {
    const auto forb = forbidden(other);
    return std::none_of(cfg.user->ports.begin(), cfg.user->ports.end(), [&](const Port& p) { return forb.count(p); });
}

namespace {

std::string label_of(const Structure& s, std::size_t i) {
    std::string names;
    for (const auto& m : s.machines.machines()) names += (names.empty() ? "" : ",") + m->name;
    return "structure " + std::to_string(i) + " {" + names + "}";
}

std::set<Port> intersect(const std::set<Port>& a, const std::set<Port>& b) {
    std::set<Port> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.begin()));
    return out;
}

}  // namespace

Report composability(std::span<const Structure> structures) {
    Report report;
    std::vector<std::set<Port>> ports, forbs, frees;
    for (const auto& s : structures) {
        ports.push_back(ports_of(s.machines));
        forbs.push_back(forbidden(s));
        frees.push_back(completed_free_ports(s.machines));
    }
    for (std::size_t i = 0; i < structures.size(); ++i) {
        for (std::size_t j = 0; j < structures.size(); ++j) {
            if (i == j) continue;
            const auto clash = intersect(ports[i], forbs[j]);
            if (!clash.empty())
                report.add("no port in another's forbidden ports",
                           join_ports(clash) + " of " + label_of(structures[i], i) + " forbidden by " +
                               label_of(structures[j], j));
            if (i < j && intersect(structures[i].service, frees[j]) != intersect(structures[j].service, frees[i]))
                report.add("matching service ports", label_of(structures[i], i) + " and " + label_of(structures[j], j) +
                                                         " disagree on shared service ports");
        }
    }
    return report;
}

bool composable(std::span<const Structure> structures) { return composability(structures).ok(); }

Structure compose(std::span<const Structure> structures) {
    Report report = composability(structures);
    if (!report.ok()) throw ValidationError(std::move(report));
    std::vector<MachinePtr> machines;
    std::set<Port> service;
    for (const auto& s : structures) {
        machines.insert(machines.end(), s.machines.machines().begin(), s.machines.machines().end());
        service.insert(s.service.begin(), s.service.end());
    }
    Collection all(std::move(machines));
    const auto free = completed_free_ports(all);
    std::set<Port> kept;
    for (const auto& p : service)
        if (free.count(p)) kept.insert(p);
    return make_structure(std::move(all), std::move(kept));
}

}  // namespace qrsim
