#include "qrsim/document.h"

#include <fstream>
#include <sstream>

namespace qrsim {

namespace {

const char* const kNetworkFormat = "qrsim-network";
const char* const kRunFormat = "qrsim-run";
const char* const kViewFormat = "qrsim-view";
const char* const kVerdictFormat = "qrsim-verdict";

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

const Json& field(const Json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) fail(where, "missing field '" + key + "'");
    return j.at(key);
}

std::string text(const Json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

std::vector<std::string> texts(const Json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected a list of strings");
    std::vector<std::string> out;
    for (const auto& x : j) out.push_back(text(x, where));
    return out;
}

Port port(const Json& j, const std::string& where) {
    try {
        return Port::parse(text(j, where));
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
}

std::vector<Port> ports(const Json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected a list of ports");
    std::vector<Port> out;
    for (const auto& x : j) out.push_back(port(x, where));
    return out;
}

Json ports_json(const std::vector<Port>& ps) {
    Json out = Json::array();
    for (const auto& p : ps) out.push_back(p.str());
    return out;
}

Json ports_json(const std::set<Port>& ps) { return ports_json(std::vector<Port>(ps.begin(), ps.end())); }

void check_header(const Json& j, const std::string& format) {
    if (!j.is_object()) fail("document", "top level must be an object");
    if (!j.contains("format") || j["format"] != format) fail("document", "expected format '" + format + "'");
    if (!j.contains("version") || j["version"] != kFormatVersion)
        fail("document", "unsupported version, expected " + std::to_string(kFormatVersion));
}

Json header(const std::string& format) { return Json{{"format", format}, {"version", kFormatVersion}}; }

std::vector<std::string> state_labels(const Json& j, const std::map<std::string, std::vector<std::string>>& spaces,
                                      const std::string& where) {
    if (j.is_string()) {
        auto it = spaces.find(j.get<std::string>());
        if (it == spaces.end()) fail(where, "unknown space '" + j.get<std::string>() + "'");
        return it->second;
    }
    return texts(j, where);
}

template <typename T>
const T& lookup(const std::vector<std::pair<std::string, T>>& items, const std::string& name, const char* what) {
    for (const auto& [n, x] : items)
        if (n == name) return x;
    throw ValidationError(std::string("unknown ") + what + " '" + name + "'");
}

}  // namespace

MachinePtr machine_from_json(const Json& j, const SpacePtr& message_space,
                             const std::map<std::string, std::vector<std::string>>& spaces) {
    if (!j.is_object()) fail("machine", "expected an object");
    if (j.contains("canonise")) return canonise(machine_from_json(j["canonise"], message_space, spaces));
    if (j.contains("combine")) {
        const auto& parts = j["combine"];
        if (!parts.is_array() || parts.size() != 2) fail("machine", "'combine' takes two machines");
        return combine(machine_from_json(parts[0], message_space, spaces),
                       machine_from_json(parts[1], message_space, spaces));
    }
    MachineSpec spec;
    spec.name = text(field(j, "name", "machine"), "machine name");
    const std::string where = "machine " + spec.name;
    spec.ports = ports(field(j, "ports", where), where + " ports");
    if (j.contains("cports")) {
        for (const auto& p : ports(j["cports"], where + " cports")) spec.cports.insert(p);
    } else {
        for (const auto& p : spec.ports)
            if (p.is_clock()) spec.cports.insert(p);
    }
    spec.qstates = j.contains("qstates") ? state_labels(j["qstates"], spaces, where + " qstates")
                                         : std::vector<std::string>{""};
    spec.cstates = state_labels(field(j, "cstates", where), spaces, where + " cstates");
    if (j.contains("fin")) spec.fin = texts(j["fin"], where + " fin");
    if (j.contains("zero_length")) {
        for (const auto& z : j["zero_length"]) {
            if (!z.is_array() || z.size() != 2) fail(where, "zero_length entries are [state, port]");
            spec.zero_length.emplace_back(text(z[0], where), port(z[1], where));
        }
    }
    if (j.contains("initial_qstate")) spec.initial_qstate = text(j["initial_qstate"], where);
    spec.message_space = message_space;
    try {
        if (!j.contains("delta")) {
            spec.delta = Program{};
        } else if (j["delta"].contains("program")) {
            spec.delta = program_from_json(j["delta"]["program"]);
        } else if (j["delta"].contains("kraus")) {
            const auto& k = j["delta"]["kraus"];
            KrausSpec kraus;
            kraus.domain = texts(field(k, "domain", where), where + " kraus domain");
            for (const auto& op : field(k, "operators", where)) kraus.operators.push_back(square_matrix_from_json(op));
            const auto check = validate_channel(KrausChannel{kraus.operators, kraus.domain});
            if (!check.ok) fail(where, "kraus operators: " + check.message);
            spec.delta = std::move(kraus);
        } else {
            fail(where, "delta needs 'program' or 'kraus'");
        }
        return make_machine(std::move(spec));
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    } catch (const nlohmann::json::exception& e) {
        fail(where, e.what());
    }
}

Json machine_to_json(const MachineDef& m) {
    switch (m.origin) {
        case Origin::canonised:
            return Json{{"canonise", machine_to_json(*m.base)}};
        case Origin::combined:
            return Json{{"combine", {machine_to_json(*m.first_input), machine_to_json(*m.second_input)}}};
        case Origin::buffer:
            throw std::invalid_argument("buffers are not part of documents");
        case Origin::authored:
            break;
    }
    const MachineSpec& s = *m.spec;
    Json j;
    j["name"] = s.name;
    j["ports"] = ports_json(s.ports);
    j["cports"] = ports_json(s.cports);
    j["qstates"] = s.qstates;
    j["cstates"] = s.cstates;
    j["fin"] = s.fin;
    if (!s.zero_length.empty()) {
        Json z = Json::array();
        for (const auto& [state, p] : s.zero_length) z.push_back({state, p.str()});
        j["zero_length"] = z;
    }
    if (!s.initial_qstate.empty()) j["initial_qstate"] = s.initial_qstate;
    if (const auto* prog = std::get_if<Program>(&s.delta)) {
        j["delta"] = {{"program", program_to_json(*prog)}};
    } else {
        const auto& k = std::get<KrausSpec>(s.delta);
        Json ops = Json::array();
        for (const auto& op : k.operators) ops.push_back(matrix_to_json(op));
        j["delta"] = {{"kraus", {{"domain", k.domain}, {"operators", ops}}}};
    }
    return j;
}

MachinePtr NetworkDocument::machine(const std::string& name) const {
    for (const auto& m : machines)
        if (m->name == name) return m;
    throw ValidationError("unknown machine '" + name + "'");
}

Collection NetworkDocument::collection(const std::string& name) const {
    std::vector<MachinePtr> ms;
    for (const auto& n : lookup(collections, name, "collection")) ms.push_back(machine(n));
    return Collection(std::move(ms));
}

Structure NetworkDocument::structure(const std::string& name) const {
    const auto& e = lookup(structures, name, "structure");
    std::vector<MachinePtr> ms;
    for (const auto& n : e.machines) ms.push_back(machine(n));
    return make_structure(Collection(std::move(ms)), e.service);
}

Configuration NetworkDocument::configuration(const std::string& name) const {
    const auto& e = lookup(configurations, name, "configuration");
    return make_config(structure(e.structure), machine(e.user), machine(e.adversary));
}

SecurityClaim NetworkDocument::claim(const std::string& name) const {
    const auto& e = lookup(claims, name, "claim");
    SecurityClaim c;
    c.name = name;
    c.real = structure(e.real);
    c.ideal = structure(e.ideal);
    c.mode = e.mode;
    c.flavor = e.flavor;
    c.bounds = e.bounds;
    for (const auto& w : e.witnesses) c.witnesses.push_back({machine(w.user), machine(w.adversary), machine(w.simulator)});
    return c;
}

NetworkDocument parse_document(const Json& j) {
    check_header(j, kNetworkFormat);
    NetworkDocument doc;
    try {
        if (j.contains("alphabet")) {
            const auto& a = j["alphabet"];
            doc.alphabet = Alphabet(a.value("symbols", std::string("01")), a.value("max_len", std::size_t{2}));
        }
        if (j.contains("queue_cap")) doc.queue_cap = j["queue_cap"].get<std::size_t>();
    } catch (const std::exception& e) {
        fail("alphabet", e.what());
    }
    if (doc.queue_cap < 1) fail("queue_cap", "must be at least 1");
    const SpacePtr msgs = doc.alphabet.message_space();

    std::map<std::string, std::vector<std::string>> spaces;
    if (j.contains("spaces")) {
        if (!j["spaces"].is_object()) fail("spaces", "expected an object");
        for (const auto& [name, labels] : j["spaces"].items()) spaces[name] = texts(labels, "space " + name);
    }

    std::set<std::string> names;
    if (j.contains("machines")) {
        for (const auto& mj : j["machines"]) {
            auto m = machine_from_json(mj, msgs, spaces);
            if (!names.insert(m->name).second) fail("machines", "machine '" + m->name + "' defined twice");
            doc.machines.push_back(std::move(m));
        }
    }
    auto resolve = [&](const std::string& n, const std::string& where) {
        if (!names.count(n)) fail(where, "unknown machine '" + n + "'");
        return n;
    };
    auto object_items = [&](const char* section) {
        std::vector<std::pair<std::string, Json>> out;
        if (!j.contains(section)) return out;
        if (!j[section].is_object()) fail(section, "expected an object");
        for (const auto& [name, v] : j[section].items()) out.emplace_back(name, v);
        return out;
    };

    for (const auto& [name, v] : object_items("collections")) {
        std::vector<std::string> ms;
        for (const auto& n : texts(v, "collection " + name)) ms.push_back(resolve(n, "collection " + name));
        doc.collections.emplace_back(name, std::move(ms));
    }
    for (const auto& [name, v] : object_items("structures")) {
        const std::string where = "structure " + name;
        StructureEntry e;
        for (const auto& n : texts(field(v, "machines", where), where)) e.machines.push_back(resolve(n, where));
        if (v.contains("service"))
            for (const auto& p : ports(v["service"], where)) e.service.insert(p);
        doc.structures.emplace_back(name, std::move(e));
    }
    auto structure_ref = [&](const std::string& n, const std::string& where) {
        for (const auto& [s, _] : doc.structures)
            if (s == n) return n;
        fail(where, "unknown structure '" + n + "'");
    };
    for (const auto& [name, v] : object_items("configurations")) {
        const std::string where = "configuration " + name;
        doc.configurations.emplace_back(
            name, ConfigurationEntry{structure_ref(text(field(v, "structure", where), where), where),
                                     resolve(text(field(v, "user", where), where), where),
                                     resolve(text(field(v, "adversary", where), where), where)});
    }
    for (const auto& [name, v] : object_items("claims")) {
        const std::string where = "claim " + name;
        ClaimEntry e;
        e.real = structure_ref(text(field(v, "real", where), where), where);
        e.ideal = structure_ref(text(field(v, "ideal", where), where), where);
        const std::string mode = v.value("mode", std::string("perfect"));
        if (mode != "perfect" && mode != "statistical") fail(where, "mode is 'perfect' or 'statistical'");
        e.mode = mode == "perfect" ? SecurityMode::perfect : SecurityMode::statistical;
        const std::string flavor = v.value("flavor", std::string("standard"));
        if (flavor != "standard" && flavor != "universal") fail(where, "flavor is 'standard' or 'universal'");
        e.flavor = flavor == "standard" ? SecurityFlavor::standard : SecurityFlavor::universal;
        for (const auto& w : field(v, "witnesses", where))
            e.witnesses.push_back({resolve(text(field(w, "user", where), where), where),
                                   resolve(text(field(w, "adversary", where), where), where),
                                   resolve(text(field(w, "simulator", where), where), where)});
        if (v.contains("bounds")) {
            if (!v["bounds"].is_object()) fail(where, "bounds map k to a number");
            for (const auto& [k, b] : v["bounds"].items()) {
                if (!b.is_number()) fail(where, "bound for k=" + k + " is not a number");
                try {
                    e.bounds[std::stoi(k)] = b.get<double>();
                } catch (const std::logic_error&) {
                    fail(where, "bad security parameter '" + k + "'");
                }
            }
        }
        doc.claims.emplace_back(name, std::move(e));
    }
    return doc;
}

Json document_to_json(const NetworkDocument& doc) {
    Json j = header(kNetworkFormat);
    j["alphabet"] = {{"symbols", doc.alphabet.symbols()}, {"max_len", doc.alphabet.max_len()}};
    j["queue_cap"] = doc.queue_cap;
    j["machines"] = Json::array();
    for (const auto& m : doc.machines) j["machines"].push_back(machine_to_json(*m));
    j["collections"] = Json::object();
    for (const auto& [name, ms] : doc.collections) j["collections"][name] = ms;
    j["structures"] = Json::object();
    for (const auto& [name, e] : doc.structures)
        j["structures"][name] = {{"machines", e.machines}, {"service", ports_json(e.service)}};
    j["configurations"] = Json::object();
    for (const auto& [name, e] : doc.configurations)
        j["configurations"][name] = {{"structure", e.structure}, {"user", e.user}, {"adversary", e.adversary}};
    j["claims"] = Json::object();
    for (const auto& [name, e] : doc.claims) {
        Json c{{"real", e.real}, {"ideal", e.ideal}, {"mode", to_string(e.mode)}, {"flavor", to_string(e.flavor)}};
        c["witnesses"] = Json::array();
        for (const auto& w : e.witnesses)
            c["witnesses"].push_back({{"user", w.user}, {"adversary", w.adversary}, {"simulator", w.simulator}});
        if (!e.bounds.empty()) {
            c["bounds"] = Json::object();
            for (const auto& [k, b] : e.bounds) c["bounds"][std::to_string(k)] = b;
        }
        j["claims"][name] = c;
    }
    return j;
}

Report validate_document(const NetworkDocument& doc, const std::set<int>& ks) {
    Report report;
    for (const auto& m : doc.machines) report.merge(validate_machine(*m, ks));
    auto guarded = [&](const std::string& where, auto check) {
        try {
            check();
        } catch (const ValidationError& e) {
            if (e.report().ok())
                report.add(where, e.what());
            else
                report.merge(e.report(), where + ": ");
        }
    };
    for (const auto& [name, _] : doc.collections) {
        guarded("collection " + name, [&] {
            const Collection c = doc.collection(name);
            report.merge(validate_collection(c), "collection " + name + ": ");
            if (!is_closed(c))
                report.add("closed collection", "collection " + name + " has free ports " +
                                                    join_ports(completed_free_ports(c)));
            std::size_t masters = 0;
            for (const auto& m : c.machines()) masters += m->has_port(kMasterClock) ? 1 : 0;
            if (masters != 1) report.add("one master scheduler", "collection " + name + " has " +
                                                                     std::to_string(masters) + " master schedulers");
        });
    }
    for (const auto& [name, _] : doc.structures) guarded("structure " + name, [&] { doc.structure(name); });
    for (const auto& [name, _] : doc.configurations) guarded("configuration " + name, [&] { doc.configuration(name); });
    for (const auto& [name, _] : doc.claims) {
        guarded("claim " + name, [&] {
            const SecurityClaim c = doc.claim(name);
            report.merge(validate_claim(c, ks), "claim " + name + ": ");
            for (const auto& w : c.witnesses) {
                const Configuration real = make_config(c.real, w.user, w.real_adversary);
                make_config(c.ideal, w.user, w.simulator);
                if (!is_suitable(real, c.ideal))
                    report.add("suitable configuration", "claim " + name + ": " + w.user->name +
                                                             " uses forbidden ports of the ideal structure");
            }
        });
    }
    return report;
}

namespace {

Json tuple_json(const StateTuple& s) { return Json(s); }

Json port_map_json(const std::map<Port, std::string>& m) {
    Json out = Json::object();
    for (const auto& [p, x] : m) out[p.str()] = x;
    return out;
}

std::map<Port, std::string> port_map_from_json(const Json& j) {
    std::map<Port, std::string> out;
    if (!j.is_object()) fail("trace record", "port maps are objects");
    for (const auto& [p, x] : j.items()) out[Port::parse(p)] = text(x, "trace record");
    return out;
}

Json records_json(const std::vector<TraceRecord>& rs) {
    Json out = Json::array();
    for (const auto& r : rs) out.push_back(trace_record_to_json(r));
    return out;
}

}  // namespace

Json trace_record_to_json(const TraceRecord& r) {
    return Json{{"machine", r.machine},       {"s", tuple_json(r.s)},          {"I", port_map_json(r.inputs)},
                {"s_prime", tuple_json(r.s_prime)}, {"O", port_map_json(r.outputs)}, {"P", ports_json(r.nonempty)}};
}

TraceRecord trace_record_from_json(const Json& j) {
    TraceRecord r;
    r.machine = text(field(j, "machine", "trace record"), "trace record");
    r.s = texts(field(j, "s", "trace record"), "trace record");
    r.inputs = port_map_from_json(field(j, "I", "trace record"));
    r.s_prime = texts(field(j, "s_prime", "trace record"), "trace record");
    r.outputs = port_map_from_json(field(j, "O", "trace record"));
    for (const auto& p : ports(field(j, "P", "trace record"), "trace record")) r.nonempty.insert(p);
    return r;
}

Json run_to_json(const RunResult& r, const std::string& collection) {
    Json j = header(kRunFormat);
    j["collection"] = collection;
    j["config"] = {{"k", r.config.k},
                   {"budget", r.config.max_activations},
                   {"prune", r.config.prune_eps},
                   {"queue_cap", r.config.queue_cap}};
    j["pruned_mass"] = r.traces.pruned_mass;
    j["truncated_mass"] = r.truncated_mass;
    j["diverged_mass"] = r.diverged_mass;
    j["traces"] = Json::array();
    for (const auto& [t, p] : r.traces.probabilities)
        j["traces"].push_back({{"probability", p}, {"truncated", t.truncated}, {"records", records_json(t.records)}});
    return j;
}

Distribution<Trace> traces_from_json(const Json& j) {
    check_header(j, kRunFormat);
    Distribution<Trace> d;
    try {
        d.pruned_mass = j.at("pruned_mass").get<double>();
        for (const auto& t : j.at("traces")) {
            Trace trace;
            trace.truncated = t.at("truncated").get<bool>();
            for (const auto& r : t.at("records")) trace.records.push_back(trace_record_from_json(r));
            d.add(trace, t.at("probability").get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        fail("run document", e.what());
    } catch (const std::invalid_argument& e) {
        fail("run document", e.what());
    }
    return d;
}

Json view_to_json(const Distribution<View>& v, const std::string& machine) {
    Json j = header(kViewFormat);
    j["machine"] = machine;
    j["pruned_mass"] = v.pruned_mass;
    j["views"] = Json::array();
    for (const auto& [view, p] : v.probabilities)
        j["views"].push_back({{"probability", p}, {"truncated", view.truncated}, {"records", records_json(view.records)}});
    return j;
}

Json verdict_to_json(const ClaimResult& r, const SecurityClaim& claim, const std::set<int>& ks) {
    Json j = header(kVerdictFormat);
    j["kind"] = "witness verification";
    j["claim"] = claim.name;
    j["mode"] = to_string(claim.mode);
    j["flavor"] = to_string(claim.flavor);
    j["ks"] = ks;
    j["pass"] = r.pass;
    if (!r.malformed.ok()) {
        j["malformed"] = Json::array();
        for (const auto& v : r.malformed.violations())
            j["malformed"].push_back({{"clause", v.clause}, {"detail", v.detail}});
    }
    j["witnesses"] = Json::array();
    for (std::size_t i = 0; i < r.verdicts.size(); ++i) {
        const auto& v = r.verdicts[i];
        const auto& w = claim.witnesses[i];
        Json wj{{"user", w.user->name}, {"adversary", w.real_adversary->name}, {"simulator", w.simulator->name},
                {"reliable", v.reliable}, {"pass", v.pass}};
        wj["per_k"] = Json::array();
        for (const auto& [k, c] : v.per_k)
            wj["per_k"].push_back({{"k", k}, {"sd", c.sd}, {"bound", v.bound.at(k)}, {"real_defect", c.real_defect},
                                   {"ideal_defect", c.ideal_defect}});
        wj["notes"] = v.notes;
        j["witnesses"].push_back(wj);
    }
    return j;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << dump(j);
    if (!out) throw IoError("error writing " + path.string());
}

}  // namespace qrsim
