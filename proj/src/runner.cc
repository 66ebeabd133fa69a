#include "qrsim/runner.h"

#include <algorithm>
#include <stdexcept>

namespace qrsim {

const MachineRegisters& RunLayout::at(const std::string& name) const {
    auto it = machines.find(name);
    if (it == machines.end()) throw std::invalid_argument("no machine " + name + " in the run layout");
    return it->second;
}

SubsystemId RunLayout::port(const Port& p) const {
    for (const auto& [_, regs] : machines) {
        auto it = regs.ports.find(p);
        if (it != regs.ports.end()) return it->second;
    }
    throw std::invalid_argument("no port " + p.str() + " in the run layout");
}

RunLayout make_layout(const Collection& completed) {
    RunLayout layout;
    SubsystemId next = 0;
    for (const auto& m : completed.machines()) {
        MachineRegisters regs;
        for (std::size_t i = 0; i < m->qregs.size(); ++i) regs.q.push_back(next++);
        for (std::size_t i = 0; i < m->cregs.size(); ++i) regs.c.push_back(next++);
        for (const auto& p : m->ports) regs.ports[p] = next++;
        layout.machines[m->name] = std::move(regs);
    }
    return layout;
}

DensityState initial_state(const Collection& completed, const RunLayout& layout, int k) {
    if (k < 1) throw std::invalid_argument("security parameter must be positive");
    DensityState rho;
    const std::string init = ones(static_cast<std::size_t>(k));
    for (const auto& m : completed.machines()) {
        const auto& regs = layout.at(m->name);
        for (std::size_t i = 0; i < m->qregs.size(); ++i) {
            if (!m->qregs[i]->contains(m->initial_q[i]))
                throw ValidationError("machine " + m->name + " lacks its initial quantum state");
            rho = rho.with_added(factor_ops::basis(regs.q[i], m->qregs[i], m->qregs[i]->index_of(m->initial_q[i])));
        }
        for (std::size_t i = 0; i < m->cregs.size(); ++i) {
            if (!m->cregs[i]->contains(init))
                throw ValidationError("machine " + m->name + " has no classical state " + init + " for k=" +
                                      std::to_string(k));
            rho = rho.with_added(factor_ops::basis(regs.c[i], m->cregs[i], m->cregs[i]->index_of(init)));
        }
        for (const auto& p : m->ports)
            rho = rho.with_added(
                factor_ops::basis(regs.ports.at(p), m->message_space, m->message_space->index_of("")));
    }
    return rho;
}

namespace {

enum class Step { activate_master, measure_state, terminate, erase, classical_in, emptiness, transition,
                  measure_out, record, to_buffer, clear_ports, find_scheduled, schedule_buffer, from_buffer };

struct Branch {
    DensityState state;
    Trace trace;
    std::size_t current = 0;
    Step step = Step::activate_master;
    int activations = 0;
    bool via_master = false;
    StateTuple s, s_prime;
    std::map<Port, std::string> inputs, outputs;
    std::set<Port> nonempty;
    Port scheduled;
};

// One outcome of measuring several subsystems one after the other.
struct Joint {
    DensityState state;
    std::vector<std::string> labels;
};

class Engine {
public:
    Engine(const Collection& completed, const RunConfig& cfg)
        : machines_(completed.machines()), cfg_(cfg) {
        result_.config = cfg;
        result_.layout = make_layout(completed);
        for (std::size_t i = 0; i < machines_.size(); ++i) {
            const auto& m = machines_[i];
            if (m->has_port(kMasterClock)) master_ = i;
            for (const auto& p : m->ports) owner_[p] = i;
        }
        initial_ = initial_state(completed, result_.layout, cfg.k);
    }

    RunResult run() {
        Branch root;
        root.state = initial_;
        stack_.push_back(std::move(root));
        while (!stack_.empty()) {
            Branch b = std::move(stack_.back());
            stack_.pop_back();
            advance(std::move(b));
        }
        return std::move(result_);
    }

private:
    const MachineDef& machine(std::size_t i) const { return *machines_[i]; }
    const MachineRegisters& regs(std::size_t i) const { return result_.layout.at(machines_[i]->name); }
    SubsystemId port_id(const Port& p) const { return regs(owner_.at(p)).ports.at(p); }

    std::vector<Joint> measure_all(const DensityState& rho, const std::vector<SubsystemId>& ids, bool complete) {
        std::vector<Joint> layer{{rho, {}}};
        for (const auto id : ids) {
            std::vector<Joint> next;
            for (auto& j : layer) {
                Measurement m = complete ? measure_complete(j.state, id) : measure_emptiness(j.state, id);
                result_.traces.pruned_mass += m.pruned_mass;
                for (auto& o : m.outcomes) {
                    if (o.state.weight() < cfg_.prune_eps) {
                        result_.traces.pruned_mass += o.state.weight();
                        continue;
                    }
                    auto labels = j.labels;
                    labels.push_back(o.label);
                    next.push_back({std::move(o.state), std::move(labels)});
                }
            }
            layer = std::move(next);
        }
        return layer;
    }

    void leaf(Branch& b, bool truncated) {
        b.trace.truncated = truncated;
        const double w = b.state.weight();
        if (truncated) result_.truncated_mass += w;
        result_.traces.add(b.trace, w);
        if (cfg_.keep_final_states) result_.leaves.push_back({b.trace, b.state});
    }

    // Pushes one branch per outcome; `set` stores the labels and picks the next step.
    template <typename Set>
    void fork(Branch& b, std::vector<Joint> outcomes, Set set) {
        for (auto it = outcomes.rbegin(); it != outcomes.rend(); ++it) {
            Branch child = b;
            child.state = std::move(it->state);
            set(child, it->labels);
            stack_.push_back(std::move(child));
        }
    }

    void advance(Branch b) {
        while (true) {
            const MachineDef& m = machine(b.current);
            const MachineRegisters& r = regs(b.current);
            switch (b.step) {
                case Step::activate_master:
                    b.current = master_;
                    b.via_master = true;
                    b.state = prepare(b.state, port_id(kMasterClock), "1");
                    b.step = Step::measure_state;
                    break;

                case Step::measure_state:
                    fork(b, measure_all(b.state, r.c, true), [](Branch& c, const std::vector<std::string>& l) {
                        c.s = l;
                        c.step = Step::terminate;
                    });
                    return;

                case Step::terminate:
                    if (m.is_final(b.s)) {
                        if (b.current == master_) return leaf(b, false);
                        b.step = Step::activate_master;
                    } else {
                        b.step = Step::erase;
                    }
                    break;

                case Step::erase:
                    for (const auto& p : m.ports)
                        if (p.is_in() && m.erases(b.s, p)) b.state = prepare_epsilon(b.state, r.ports.at(p));
                    b.step = Step::classical_in;
                    break;

                case Step::classical_in: {
                    std::vector<Port> ports;
                    std::vector<SubsystemId> ids;
                    for (const auto& p : m.ports) {
                        if (p.is_in() && m.is_classical(p)) {
                            ports.push_back(p);
                            ids.push_back(r.ports.at(p));
                        }
                    }
                    fork(b, measure_all(b.state, ids, true), [&](Branch& c, const std::vector<std::string>& l) {
                        c.inputs.clear();
                        for (std::size_t i = 0; i < ports.size(); ++i) c.inputs[ports[i]] = l[i];
                        c.step = Step::emptiness;
                    });
                    return;
                }

                case Step::emptiness: {
                    const auto ports = m.in_ports();
                    std::vector<SubsystemId> ids;
                    for (const auto& p : ports) ids.push_back(r.ports.at(p));
                    fork(b, measure_all(b.state, ids, false), [&](Branch& c, const std::vector<std::string>& l) {
                        c.nonempty.clear();
                        for (std::size_t i = 0; i < ports.size(); ++i)
                            if (l[i] == kNonempty) c.nonempty.insert(ports[i]);
                        c.step = Step::transition;
                    });
                    return;
                }

                case Step::transition:
                    if (b.nonempty.empty()) {
                        // Reactivating the master changes nothing, so the
                        // loop would repeat forever without a record.
                        if (b.current == master_ && b.via_master) {
                            result_.diverged_mass += b.state.weight();
                            return leaf(b, false);
                        }
                        b.step = Step::activate_master;
                        break;
                    }
                    if (b.activations >= cfg_.max_activations) return leaf(b, true);
                    b.state = apply_transition(b.state, m, r);
                    ++b.activations;
                    b.step = Step::measure_out;
                    break;

                case Step::measure_out: {
                    std::vector<Port> ports;
                    std::vector<SubsystemId> ids = r.c;
                    for (const auto& p : m.ports) {
                        if (p.is_out() && m.is_classical(p)) {
                            ports.push_back(p);
                            ids.push_back(r.ports.at(p));
                        }
                    }
                    const std::size_t nc = r.c.size();
                    fork(b, measure_all(b.state, ids, true), [&](Branch& c, const std::vector<std::string>& l) {
                        c.s_prime.assign(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(nc));
                        c.outputs.clear();
                        for (std::size_t i = 0; i < ports.size(); ++i) c.outputs[ports[i]] = l[nc + i];
                        c.step = Step::record;
                    });
                    return;
                }

                case Step::record:
                    b.trace.records.push_back({m.name, b.s, b.inputs, b.s_prime, b.outputs, b.nonempty});
                    b.step = Step::to_buffer;
                    break;

                case Step::to_buffer: {
                    std::vector<Port> ports;
                    std::vector<SubsystemId> ids;
                    for (const auto& p : m.ports) {
                        if (p.is_out() && p.is_simple()) {
                            ports.push_back(p);
                            ids.push_back(r.ports.at(p));
                        }
                    }
                    auto outcomes = measure_all(b.state, ids, false);
                    for (auto& o : outcomes) {
                        for (std::size_t i = 0; i < ports.size(); ++i) {
                            if (o.labels[i] != kNonempty) continue;
                            const Port& p = ports[i];
                            const Port bin{p.name, PortLabel::buffer, Direction::in};
                            o.state = move(o.state, r.ports.at(p), port_id(bin));
                            const std::size_t buf = owner_.at(bin);
                            o.state = buffer_transition(o.state, machine(buf), regs(buf));
                        }
                    }
                    fork(b, std::move(outcomes),
                         [](Branch& c, const std::vector<std::string>&) { c.step = Step::clear_ports; });
                    return;
                }

                case Step::clear_ports:
                    for (const auto& p : m.ports) b.state = prepare_epsilon(b.state, r.ports.at(p));
                    b.step = Step::find_scheduled;
                    break;

                case Step::find_scheduled: {
                    b.step = Step::activate_master;
                    for (const auto& p : m.ports) {
                        if (p.is_clock() && p.is_out()) {
                            auto it = b.outputs.find(p);
                            if (it != b.outputs.end() && !it->second.empty()) {
                                b.scheduled = p;
                                b.step = Step::schedule_buffer;
                                break;
                            }
                        }
                    }
                    break;
                }

                case Step::schedule_buffer: {
                    const Port clock_in{b.scheduled.name, PortLabel::clock, Direction::in};
                    const Port bout{b.scheduled.name, PortLabel::buffer, Direction::out};
                    const std::size_t buf = owner_.at(clock_in);
                    b.state = prepare(b.state, port_id(clock_in), b.outputs.at(b.scheduled));
                    b.state = buffer_transition(b.state, machine(buf), regs(buf));
                    // The buffer has consumed its clock input.
                    b.state = prepare_epsilon(b.state, port_id(clock_in));
                    fork(b, measure_all(b.state, {port_id(bout)}, false),
                         [](Branch& c, const std::vector<std::string>& l) {
                             c.step = l[0] == kNonempty ? Step::from_buffer : Step::activate_master;
                         });
                    return;
                }

                case Step::from_buffer: {
                    const Port bout{b.scheduled.name, PortLabel::buffer, Direction::out};
                    const Port target{b.scheduled.name, PortLabel::simple, Direction::in};
                    auto it = owner_.find(target);
                    if (it == owner_.end()) throw RunError("no machine receives on " + target.str());
                    b.state = move(b.state, port_id(bout), port_id(target));
                    b.current = it->second;
                    b.via_master = false;
                    b.step = Step::measure_state;
                    break;
                }
            }
        }
    }

    std::vector<MachinePtr> machines_;
    RunConfig cfg_;
    std::size_t master_ = 0;
    std::map<Port, std::size_t> owner_;
    DensityState initial_;
    RunResult result_;
    std::vector<Branch> stack_;
};

}  // namespace

RunResult run(const Collection& c, const RunConfig& cfg) {
    if (cfg.prune_eps < 0 || cfg.prune_eps >= 1) throw std::invalid_argument("prune_eps must lie in [0, 1)");
    if (cfg.k < 1) throw std::invalid_argument("security parameter must be positive");
    const Collection completed =
        completion(c, BufferParams{cfg.queue_cap, std::max(kDefaultBufferMaxK, cfg.k)});
    Report report = validate_collection(completed);
    if (!is_closed(completed))
        report.add("closed collection", "free ports " + join_ports(completed_free_ports(completed)));
    if (!master_of(completed)) report.add("one master scheduler", "the collection needs exactly one master scheduler");
    for (const auto& m : completed.machines()) report.merge(validate_machine(*m, {cfg.k}));
    if (!report.ok()) throw ValidationError(std::move(report));
    return Engine(completed, cfg).run();
}

View view_of(const Trace& t, const std::string& machine) {
    View v;
    v.truncated = t.truncated;
    for (const auto& r : t.records)
        if (r.machine == machine) v.records.push_back(r);
    return v;
}

Distribution<View> view(const Distribution<Trace>& runs, const std::string& machine) {
    Distribution<View> out;
    out.pruned_mass = runs.pruned_mass;
    for (const auto& [t, p] : runs.probabilities) out.add(view_of(t, machine), p);
    return out;
}

View project_combined_view(const View& v, const MachineDef& combined, int component) {
    if (combined.origin != Origin::combined) throw std::invalid_argument(combined.name + " is not a combination");
    if (component != 1 && component != 2) throw std::invalid_argument("component must be 1 or 2");
    const MachineDef& part = component == 1 ? *combined.first : *combined.second;
    const std::string& name = (component == 1 ? combined.first_input : combined.second_input)->name;
    const std::size_t n1 = combined.first->cregs.size();
    const std::size_t lo = component == 1 ? 0 : n1;
    const std::size_t hi = component == 1 ? n1 : combined.cregs.size();
    auto restrict = [&](const std::map<Port, std::string>& m) {
        std::map<Port, std::string> out;
        for (const auto& [p, x] : m)
            if (part.has_port(p)) out.emplace(p, x);
        return out;
    };
    View out;
    out.truncated = v.truncated;
    for (const auto& r : v.records) {
        if (r.machine != combined.name || r.s.size() != combined.cregs.size() ||
            r.s_prime.size() != combined.cregs.size())
            throw std::invalid_argument("record of " + r.machine + " does not decompose along " + combined.name);
        if (std::none_of(r.nonempty.begin(), r.nonempty.end(), [&](const Port& p) { return part.has_port(p); }))
            continue;
        out.records.push_back({name, StateTuple(r.s.begin() + lo, r.s.begin() + hi), restrict(r.inputs),
                               StateTuple(r.s_prime.begin() + lo, r.s_prime.begin() + hi), restrict(r.outputs),
                               r.nonempty});
    }
    return out;
}

Distribution<View> project_combined_view(const Distribution<View>& v, const MachineDef& combined, int component) {
    Distribution<View> out;
    out.pruned_mass = v.pruned_mass;
    for (const auto& [view, p] : v.probabilities) out.add(project_combined_view(view, combined, component), p);
    return out;
}

namespace {

std::string tuple_str(const StateTuple& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + (s[i].empty() ? std::string("ε") : s[i]);
    return s.size() == 1 ? out : "(" + out + ")";
}

std::string ports_str(const std::map<Port, std::string>& m) {
    std::string out;
    for (const auto& [p, x] : m) out += (out.empty() ? "" : " ") + p.str() + "=" + (x.empty() ? "ε" : x);
    return "{" + out + "}";
}

}  // namespace

std::string to_string(const TraceRecord& r) {
    return "(" + r.machine + ", " + tuple_str(r.s) + ", " + ports_str(r.inputs) + ", " + tuple_str(r.s_prime) + ", " +
           ports_str(r.outputs) + ", {" + join_ports(r.nonempty) + "})";
}

}  // namespace qrsim
