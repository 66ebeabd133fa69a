#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qrsim/document.h"

using namespace qrsim;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kIo = 3 };

void emit(const Json& j, const std::string& out) {
    if (out.empty())
        std::cout << dump(j);
    else
        write_json_file(out, j);
}

NetworkDocument load(const std::string& file) { return parse_document(read_json_file(file)); }

std::set<int> parse_ks(const std::string& text) {
    std::set<int> ks;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        int k = 0;
        try {
            k = std::stoi(item, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used != item.size() || k < 1) throw ValidationError("bad security parameter '" + item + "'");
        ks.insert(k);
    }
    if (ks.empty()) throw ValidationError("no security parameters given");
    return ks;
}

// Replaces machine references in collections and structures after a combination.
void rename_members(std::vector<std::string>& members, const std::string& a, const std::string& b,
                    const std::string& combined) {
    std::vector<std::string> out;
    bool placed = false;
    for (const auto& n : members) {
        if (n != a && n != b) {
            out.push_back(n);
        } else if (!placed) {
            out.push_back(combined);
            placed = true;
        }
    }
    members = std::move(out);
}

int report_result(const Report& report) {
    if (report.ok()) {
        std::cout << "ok\n";
        return kOk;
    }
    std::cout << report.str();
    return kValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for quantum reactive networks: runs, views and witnessed security claims"};
    app.require_subcommand(1);

    std::string file, name, out, ks_text = "1";
    std::vector<std::string> names;
    int k = 1, budget = 64;
    double prune = 0.0, ceiling = kDefaultDefectCeiling;
    int queue_cap = 0;

    auto* validate = app.add_subcommand("validate", "check a network document");
    validate->add_option("file", file, "network document")->required();
    validate->add_option("--ks", ks_text, "security parameters, comma separated");

    auto* run_cmd = app.add_subcommand("run", "run a closed collection and print its trace distribution");
    run_cmd->add_option("file", file, "network document")->required();
    run_cmd->add_option("collection", name, "collection name")->required();
    run_cmd->add_option("--k", k, "security parameter")->check(CLI::PositiveNumber);
    run_cmd->add_option("--budget", budget, "maximum number of activations")->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--prune", prune, "drop branches below this probability");
    run_cmd->add_option("--queue-cap", queue_cap, "buffer queue capacity (default from document)");
    run_cmd->add_option("--out", out, "output file");

    auto* view_cmd = app.add_subcommand("view", "extract a machine's view from a run document");
    view_cmd->add_option("run", file, "run document")->required();
    view_cmd->add_option("machine", name, "machine name")->required();
    view_cmd->add_option("--out", out, "output file");

    auto* compare = app.add_subcommand("compare", "verify a security claim against its witnesses");
    compare->add_option("file", file, "network document")->required();
    compare->add_option("claim", name, "claim name")->required();
    compare->add_option("--ks", ks_text, "security parameters, comma separated");
    compare->add_option("--budget", budget, "maximum number of activations per run")->check(CLI::NonNegativeNumber);
    compare->add_option("--prune", prune, "drop branches below this probability");
    compare->add_option("--ceiling", ceiling, "largest unexplored mass a reliable verdict tolerates");
    compare->add_option("--out", out, "output file");

    auto* compose_cmd = app.add_subcommand("compose", "compose structures into a new structure");
    compose_cmd->add_option("file", file, "network document")->required();
    compose_cmd->add_option("structures", names, "structure names")->required();
    compose_cmd->add_option("--name", name, "name of the composed structure");
    compose_cmd->add_option("--out", out, "output file");

    auto* combine_cmd = app.add_subcommand("combine", "replace two machines by their combination");
    combine_cmd->add_option("file", file, "network document")->required();
    combine_cmd->add_option("machines", names, "two machine names")->required()->expected(2);
    combine_cmd->add_option("--out", out, "output file");

    auto* canonise_cmd = app.add_subcommand("canonise", "replace a machine by its canonisation");
    canonise_cmd->add_option("file", file, "network document")->required();
    canonise_cmd->add_option("machine", name, "machine name")->required();
    canonise_cmd->add_option("--out", out, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            const NetworkDocument doc = load(file);
            return report_result(validate_document(doc, parse_ks(ks_text)));
        }
        if (*run_cmd) {
            const NetworkDocument doc = load(file);
            RunConfig rc;
            rc.k = k;
            rc.max_activations = budget;
            rc.prune_eps = prune;
            rc.queue_cap = queue_cap > 0 ? static_cast<std::size_t>(queue_cap) : doc.queue_cap;
            emit(run_to_json(run(doc.collection(name), rc), name), out);
            return kOk;
        }
        if (*view_cmd) {
            emit(view_to_json(view(traces_from_json(read_json_file(file)), name), name), out);
            return kOk;
        }
        if (*compare) {
            const NetworkDocument doc = load(file);
            const auto ks = parse_ks(ks_text);
            const SecurityClaim claim = doc.claim(name);
            RunConfig rc;
            rc.max_activations = budget;
            rc.prune_eps = prune;
            rc.queue_cap = doc.queue_cap;
            const ClaimResult result = check_claim(claim, ks, rc, CompareOptions{ceiling, kPerfectTolerance});
            emit(verdict_to_json(result, claim, ks), out);
            return result.pass ? kOk : kValidation;
        }
        if (*compose_cmd) {
            NetworkDocument doc = load(file);
            std::vector<Structure> parts;
            std::string joined;
            for (const auto& n : names) {
                parts.push_back(doc.structure(n));
                joined += (joined.empty() ? "" : "+") + n;
            }
            const Structure composed = compose(parts);
            StructureEntry entry;
            for (const auto& m : composed.machines.machines()) entry.machines.push_back(m->name);
            entry.service = composed.service;
            doc.structures.emplace_back(name.empty() ? joined : name, std::move(entry));
            emit(document_to_json(doc), out);
            return kOk;
        }
        if (*combine_cmd) {
            NetworkDocument doc = load(file);
            const MachinePtr m1 = doc.machine(names[0]), m2 = doc.machine(names[1]);
            const MachinePtr c = combine(m1, m2);
            for (const auto& [cname, e] : doc.configurations)
                for (const auto& n : {e.user, e.adversary})
                    if (n == m1->name || n == m2->name)
                        throw ValidationError("configuration " + cname + " refers to " + n + " directly");
            for (const auto& [cname, e] : doc.claims)
                for (const auto& w : e.witnesses)
                    for (const auto& n : {w.user, w.adversary, w.simulator})
                        if (n == m1->name || n == m2->name)
                            throw ValidationError("claim " + cname + " refers to " + n + " directly");
            std::vector<MachinePtr> machines;
            bool placed = false;
            for (const auto& m : doc.machines) {
                if (m != m1 && m != m2)
                    machines.push_back(m);
                else if (!placed) {
                    machines.push_back(c);
                    placed = true;
                }
            }
            doc.machines = std::move(machines);
            for (auto& [_, members] : doc.collections) rename_members(members, m1->name, m2->name, c->name);
            for (auto& [_, e] : doc.structures) rename_members(e.machines, m1->name, m2->name, c->name);
            emit(document_to_json(doc), out);
            return kOk;
        }
        if (*canonise_cmd) {
            NetworkDocument doc = load(file);
            const MachinePtr m = doc.machine(name);
            for (auto& x : doc.machines)
                if (x == m) x = canonise(m);
            emit(document_to_json(doc), out);
            return kOk;
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        if (!e.report().ok()) std::cerr << e.report().str();
        return kValidation;
    } catch (const RunError& e) {
        std::cerr << "run error: " << e.what() << "\n";
        return kRuntime;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
    return kOk;
}
