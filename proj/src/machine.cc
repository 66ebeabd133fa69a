#include "qrsim/machine.h"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace qrsim {

std::string to_string(MachineKind kind) {
    switch (kind) {
        case MachineKind::simple:
            return "simple";
        case MachineKind::master:
            return "master scheduler";
        case MachineKind::buffer:
            return "buffer";
    }
    return "?";
}

// ---------------------------------------------------------------- roles

Role Role::parse(std::string_view text) {
    Role r;
    if (!text.empty() && (text[0] == 'q' || text[0] == 'c') &&
        std::all_of(text.begin() + 1, text.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
        r.kind = text[0] == 'q' ? Kind::q : Kind::c;
        r.index = text.size() > 1 ? std::stoul(std::string(text.substr(1))) : 0;
        return r;
    }
    r.kind = Kind::port;
    r.port = Port::parse(text);
    return r;
}

std::string Role::str() const {
    switch (kind) {
        case Kind::q:
            return index == 0 ? "q" : "q" + std::to_string(index);
        case Kind::c:
            return index == 0 ? "c" : "c" + std::to_string(index);
        case Kind::port:
            return port.str();
    }
    return "?";
}

std::size_t RegisterSlots::at(const Role& role) const {
    switch (role.kind) {
        case Role::Kind::q:
            return q.at(role.index);
        case Role::Kind::c:
            return c.at(role.index);
        case Role::Kind::port: {
            auto it = ports.find(role.port);
            if (it == ports.end()) throw std::invalid_argument("no slot for port " + role.port.str());
            return it->second;
        }
    }
    throw std::invalid_argument("bad role");
}

// ---------------------------------------------------------------- MachineDef

bool MachineDef::erases(const StateTuple& s, const Port& p) const {
    switch (origin) {
        case Origin::authored:
            return s.size() == 1 && zero_length.count({s[0], p}) > 0;
        case Origin::buffer:
            return false;
        case Origin::canonised:
            return is_final(s) || base->erases(s, p);
        case Origin::combined: {
            const std::size_t n1 = first->cregs.size();
            if (first->has_port(p)) return first->erases(StateTuple(s.begin(), s.begin() + n1), p);
            return second->erases(StateTuple(s.begin() + n1, s.end()), p);
        }
    }
    return false;
}

bool MachineDef::has_port(const Port& p) const { return std::find(ports.begin(), ports.end(), p) != ports.end(); }

std::vector<Port> MachineDef::in_ports() const {
    std::vector<Port> out;
    std::copy_if(ports.begin(), ports.end(), std::back_inserter(out), [](const Port& p) { return p.is_in(); });
    return out;
}

std::vector<Port> MachineDef::out_ports() const {
    std::vector<Port> out;
    std::copy_if(ports.begin(), ports.end(), std::back_inserter(out), [](const Port& p) { return p.is_out(); });
    return out;
}

MachinePtr make_machine(MachineSpec spec) {
    auto m = std::make_shared<MachineDef>();
    m->name = spec.name;
    m->ports = spec.ports;
    m->cports = spec.cports;
    m->qregs = {make_space(spec.qstates)};
    m->cregs = {make_space(spec.cstates)};
    m->initial_q = {spec.initial_qstate};
    for (const auto& f : spec.fin) m->fin.insert({f});
    m->message_space = spec.message_space ? spec.message_space : Alphabet().message_space();
    spec.message_space = m->message_space;
    for (const auto& z : spec.zero_length) m->zero_length.insert(z);
    m->origin = Origin::authored;
    m->delta = compile_program(spec.delta, *m);
    m->spec = std::move(spec);
    return m;
}

std::optional<MachineKind> machine_kind(const MachineDef& m) {
    if (m.origin == Origin::buffer) return MachineKind::buffer;
    bool master = false;
    for (const auto& p : m.ports) {
        if (p == kMasterClock)
            master = true;
        else if (p.is_buffer_side() || (p.is_clock() && p.is_in()))
            return std::nullopt;
    }
    return master ? MachineKind::master : MachineKind::simple;
}

namespace {

bool reserved_name(const std::string& name) { return name.find_first_of("|()~") != std::string::npos; }

void validate_shape(const MachineDef& m, const std::set<int>& ks, Report& report) {
    const std::string who = "machine " + m.name + ": ";
    if (m.name.empty()) report.add("name", "machine name is empty");
    if (m.origin == Origin::authored && reserved_name(m.name))
        report.add("name", who + "names may not contain '|', '(', ')' or '~'");
    if (std::set<Port>(m.ports.begin(), m.ports.end()).size() != m.ports.size())
        report.add("ports duplicate-free", who + "port sequence repeats a port");
    for (const auto& p : m.cports)
        if (!m.has_port(p)) report.add("classical ports are ports", who + p.str() + " is classical but not a port");
    for (const auto& p : m.ports)
        if (p.is_clock() && !m.is_classical(p))
            report.add("all clock-ports are classical", who + p.str() + " is a quantum clock port");
    if (!m.message_space || !m.message_space->contains(""))
        report.add("message space", who + "message space lacks the empty word");
    for (std::size_t i = 0; i < m.qregs.size(); ++i) {
        const std::string& init = i < m.initial_q.size() ? m.initial_q[i] : std::string();
        if (!init.empty() && init != "0")
            report.add("initial quantum state", who + "only \"0\" may alias the initial quantum state");
        if (!m.qregs[i]->contains(init))
            report.add("initial quantum state", who + "quantum states lack the initial label " +
                                                    (init.empty() ? std::string("ε") : init));
    }
    for (const auto& space : m.cregs)
        for (int k : ks)
            if (!space->contains(ones(k)))
                report.add("initial classical states", who + "classical states lack 1^" + std::to_string(k));
    for (const auto& f : m.fin) {
        bool ok = f.size() == m.cregs.size();
        for (std::size_t i = 0; ok && i < f.size(); ++i) ok = m.cregs[i]->contains(f[i]);
        if (!ok) report.add("final states are classical states", who + "final state not among the classical states");
    }
    for (const auto& [state, port] : m.zero_length) {
        if (!m.cregs.front()->contains(state))
            report.add("length function domain", who + "length entry for unknown state '" + state + "'");
        if (!m.has_port(port) || !port.is_in())
            report.add("length function domain", who + "length entry for " + port.str() + ", not an in-port");
    }
    if (!machine_kind(m)) report.add("machine kind", who + "ports fit neither a simple machine nor a master scheduler");
}

}  // namespace

Report validate_machine(const MachineDef& m, const std::set<int>& ks) {
    Report report;
    validate_shape(m, ks, report);
    switch (m.origin) {
        case Origin::authored:
            if (m.spec) {
                if (const auto* kraus = std::get_if<KrausSpec>(&m.spec->delta)) {
                    auto r = validate_channel(KrausChannel{kraus->operators, kraus->domain});
                    if (!r.ok) report.add("transition is trace preserving", "machine " + m.name + ": " + r.message);
                }
            }
            break;
        case Origin::buffer: {
            const std::vector<Port> expected = {{m.connection, PortLabel::buffer, Direction::in},
                                                {m.connection, PortLabel::buffer, Direction::out},
                                                {m.connection, PortLabel::clock, Direction::in}};
            if (m.ports != expected) report.add("buffer ports", "buffer " + m.name + " has unexpected ports");
            if (!m.fin.empty()) report.add("buffer never terminates", "buffer " + m.name + " has final states");
            break;
        }
        case Origin::canonised:
            report.merge(validate_machine(*m.base, ks));
            break;
        case Origin::combined:
            report.merge(validate_machine(*m.first, ks));
            report.merge(validate_machine(*m.second, ks));
            break;
    }
    return report;
}

// ---------------------------------------------------------------- transitions

namespace {

std::vector<SubsystemId> all_ids(const MachineRegisters& regs) {
    std::vector<SubsystemId> ids = regs.q;
    ids.insert(ids.end(), regs.c.begin(), regs.c.end());
    for (const auto& [_, id] : regs.ports) ids.push_back(id);
    return ids;
}

RegisterSlots slots_in(const Factor& f, const MachineRegisters& regs) {
    RegisterSlots slots;
    for (auto id : regs.q) slots.q.push_back(f.position(id));
    for (auto id : regs.c) slots.c.push_back(f.position(id));
    for (const auto& [p, id] : regs.ports) slots.ports[p] = f.position(id);
    return slots;
}

class CanonisedTransition : public Transition {
public:
    explicit CanonisedTransition(MachinePtr base) : base_(std::move(base)), in_ports_(base_->in_ports()) {}

    Factor apply(const Factor& m, const RegisterSlots& slots) const override {
        std::vector<std::size_t> in_pos;
        std::vector<std::uint32_t> eps;
        for (const auto& p : in_ports_) {
            in_pos.push_back(slots.ports.at(p));
            eps.push_back(m.spaces[in_pos.back()]->index_of(""));
        }
        auto guard = [&](const BasisKey& k) {
            BasisKey g;
            for (auto pos : slots.c) g.push_back(k[pos]);
            for (std::size_t i = 0; i < in_pos.size(); ++i) g.push_back(k[in_pos[i]] == eps[i] ? 0 : 1);
            return g;
        };
        std::map<BasisKey, Factor> classes;
        for (const auto& [key, v] : m.entries) {
            BasisKey g = guard(key.first);
            if (g != guard(key.second)) continue;
            auto [it, fresh] = classes.try_emplace(std::move(g));
            if (fresh) {
                it->second.ids = m.ids;
                it->second.spaces = m.spaces;
            }
            it->second.entries.emplace(key, v);
        }
        Factor out;
        out.ids = m.ids;
        out.spaces = m.spaces;
        for (auto& [g, part] : classes) {
            StateTuple s;
            for (std::size_t i = 0; i < slots.c.size(); ++i) s.push_back(m.spaces[slots.c[i]]->label(g[i]));
            bool active = false;
            for (std::size_t i = 0; i < in_ports_.size(); ++i) {
                if (base_->is_final(s) || base_->erases(s, in_ports_[i])) {
                    part = factor_ops::reset(part, in_pos[i], eps[i]);
                } else if (g[slots.c.size() + i] == 1) {
                    active = true;
                }
            }
            if (active && !base_->is_final(s)) part = base_->delta->apply(part, slots);
            factor_ops::accumulate(out, part);
        }
        out.prune();
        return out;
    }

private:
    MachinePtr base_;
    std::vector<Port> in_ports_;
};

class CombinedTransition : public Transition {
public:
    CombinedTransition(MachinePtr first, MachinePtr second) : first_(std::move(first)), second_(std::move(second)) {}

    Factor apply(const Factor& m, const RegisterSlots& slots) const override {
        Factor out = first_->delta->apply(m, part(slots, *first_, 0, 0));
        return second_->delta->apply(out, part(slots, *second_, first_->qregs.size(), first_->cregs.size()));
    }

private:
    static RegisterSlots part(const RegisterSlots& slots, const MachineDef& comp, std::size_t q0, std::size_t c0) {
        RegisterSlots sub;
        sub.q.assign(slots.q.begin() + q0, slots.q.begin() + q0 + comp.qregs.size());
        sub.c.assign(slots.c.begin() + c0, slots.c.begin() + c0 + comp.cregs.size());
        for (const auto& p : comp.ports) sub.ports[p] = slots.ports.at(p);
        return sub;
    }

    MachinePtr first_, second_;
};

}  // namespace

DensityState apply_transition(const DensityState& state, const MachineDef& m, const MachineRegisters& regs) {
    const auto ids = all_ids(regs);
    auto [merged, index] = state.merged(ids);
    const Factor& f = *merged.factors()[index];
    Factor next = m.delta->apply(f, slots_in(f, regs));
    const double before = f.trace(), after = next.trace();
    if (std::abs(before - after) > tol::kTrace)
        throw RunError("transition of " + m.name + " is not trace preserving (trace " + std::to_string(before) +
                       " -> " + std::to_string(after) + ")");
    return merged.replaced(index, std::move(next));
}

DensityState buffer_transition(const DensityState& state, const MachineDef& buffer, const MachineRegisters& regs) {
    if (buffer.origin != Origin::buffer) throw std::invalid_argument(buffer.name + " is not a buffer");
    return apply_transition(state, buffer, regs);
}

MachinePtr canonise(const MachinePtr& m) {
    const auto kind = machine_kind(*m);
    if (!kind || *kind == MachineKind::buffer)
        throw ValidationError("canonise: " + m->name + " is not a simple machine or master scheduler");
    auto c = std::make_shared<MachineDef>(*m);
    c->origin = Origin::canonised;
    c->spec.reset();
    c->zero_length.clear();
    c->first = c->second = c->first_input = c->second_input = nullptr;
    c->base = m;
    c->delta = std::make_shared<CanonisedTransition>(m);
    return c;
}

std::string combined_name(const std::string& a, const std::string& b) {
    auto wrap = [](const std::string& n) { return n.find('|') == std::string::npos ? n : "(" + n + ")"; };
    return wrap(a) + "|" + wrap(b);
}

MachinePtr combine(const MachinePtr& m1, const MachinePtr& m2) {
    for (const auto& m : {m1, m2}) {
        const auto kind = machine_kind(*m);
        if (!kind || *kind == MachineKind::buffer)
            throw ValidationError("combine: " + m->name + " is not a simple machine, master scheduler or combination");
    }
    for (const auto& p : m1->ports)
        if (m2->has_port(p)) throw ValidationError("combine: both machines have port " + p.str());
    if (!same_basis(m1->message_space, m2->message_space))
        throw ValidationError("combine: machines use different message spaces");
    auto c1 = canonise(m1), c2 = canonise(m2);
    auto c = std::make_shared<MachineDef>();
    c->name = combined_name(m1->name, m2->name);
    c->ports = c1->ports;
    c->ports.insert(c->ports.end(), c2->ports.begin(), c2->ports.end());
    c->cports = c1->cports;
    c->cports.insert(c2->cports.begin(), c2->cports.end());
    c->qregs = c1->qregs;
    c->qregs.insert(c->qregs.end(), c2->qregs.begin(), c2->qregs.end());
    c->cregs = c1->cregs;
    c->cregs.insert(c->cregs.end(), c2->cregs.begin(), c2->cregs.end());
    c->initial_q = c1->initial_q;
    c->initial_q.insert(c->initial_q.end(), c2->initial_q.begin(), c2->initial_q.end());
    for (const auto& f1 : c1->fin) {
        for (const auto& f2 : c2->fin) {
            StateTuple f = f1;
            f.insert(f.end(), f2.begin(), f2.end());
            c->fin.insert(std::move(f));
        }
    }
    c->message_space = m1->message_space;
    c->origin = Origin::combined;
    c->first = c1;
    c->second = c2;
    c->first_input = m1;
    c->second_input = m2;
    c->delta = std::make_shared<CombinedTransition>(c1, c2);
    return c;
}

}  // namespace qrsim
