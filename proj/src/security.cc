#include "qrsim/security.h"

#include <stdexcept>

namespace qrsim {

std::string to_string(SecurityMode mode) { return mode == SecurityMode::perfect ? "perfect" : "statistical"; }
std::string to_string(SecurityFlavor flavor) { return flavor == SecurityFlavor::standard ? "standard" : "universal"; }

Verdict compare_views(const Configuration& cfg1, const Configuration& cfg2, const std::string& user_name,
                      const std::set<int>& ks, const RunConfig& rc, const CompareOptions& options) {
    if (cfg1.user->name != user_name || cfg2.user->name != user_name)
        throw std::invalid_argument("both configurations must have the user " + user_name);
    if (ks.empty()) throw std::invalid_argument("no security parameters to compare");
    Verdict v;
    for (const int k : ks) {
        RunConfig c = rc;
        c.k = k;
        const RunResult r1 = run(cfg1.collection(), c);
        const RunResult r2 = run(cfg2.collection(), c);
        const KComparison cmp{statistical_distance(view(r1.traces, user_name), view(r2.traces, user_name)),
                              r1.defect(), r2.defect()};
        v.per_k[k] = cmp;
        v.bound[k] = options.tolerance;
        if (cmp.real_defect > options.defect_ceiling || cmp.ideal_defect > options.defect_ceiling) {
            v.reliable = false;
            v.notes.push_back("k=" + std::to_string(k) + ": unexplored mass exceeds " +
                              std::to_string(options.defect_ceiling));
        }
    }
    v.pass = v.reliable;
    for (const auto& [k, cmp] : v.per_k) v.pass = v.pass && cmp.sd <= v.bound.at(k);
    return v;
}

Report validate_claim(const SecurityClaim& claim, const std::set<int>& ks) {
    Report report;
    if (claim.real.service != claim.ideal.service)
        report.add("identical service ports", "real " + join_ports(claim.real.service) + " vs ideal " +
                                                  join_ports(claim.ideal.service));
    if (claim.witnesses.empty()) report.add("witnesses", "the claim lists no witness");
    if (claim.mode == SecurityMode::statistical) {
        for (const int k : ks)
            if (!claim.bounds.count(k)) report.add("statistical bound", "no bound for k=" + std::to_string(k));
    }
    if (claim.flavor == SecurityFlavor::universal) {
        std::map<std::string, std::string> chosen;
        for (const auto& w : claim.witnesses) {
            auto [it, fresh] = chosen.emplace(w.real_adversary->name, w.simulator->name);
            if (!fresh && it->second != w.simulator->name)
                report.add("simulator independent of the user", "adversary " + w.real_adversary->name +
                                                                     " is simulated by both " + it->second + " and " +
                                                                     w.simulator->name);
        }
    }
    return report;
}

ClaimResult check_claim(const SecurityClaim& claim, const std::set<int>& ks, const RunConfig& rc,
                        const CompareOptions& options) {
    ClaimResult result;
    result.malformed = validate_claim(claim, ks);
    std::vector<std::pair<Configuration, Configuration>> configs;
    for (std::size_t i = 0; i < claim.witnesses.size(); ++i) {
        const auto& w = claim.witnesses[i];
        const std::string tag = "witness " + std::to_string(i) + ": ";
        try {
            Configuration real = make_config(claim.real, w.user, w.real_adversary);
            Configuration ideal = make_config(claim.ideal, w.user, w.simulator);
            if (!is_suitable(real, claim.ideal))
                result.malformed.add("suitable configuration",
                                     tag + w.user->name + " uses forbidden ports of the ideal structure");
            configs.emplace_back(std::move(real), std::move(ideal));
        } catch (const ValidationError& e) {
            result.malformed.add("configuration", tag + e.what());
        }
    }
    if (!result.malformed.ok()) return result;

    result.pass = true;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        Verdict v = compare_views(configs[i].first, configs[i].second, claim.witnesses[i].user->name, ks, rc, options);
        if (claim.mode == SecurityMode::statistical) {
            v.bound = {};
            for (const int k : ks) v.bound[k] = claim.bounds.at(k);
            v.pass = v.reliable;
            for (const auto& [k, cmp] : v.per_k) v.pass = v.pass && cmp.sd <= v.bound.at(k);
        }
        result.pass = result.pass && v.pass;
        result.verdicts.push_back(std::move(v));
    }
    return result;
}

Verdict chain_verdicts(const Verdict& v12, const Verdict& v23) {
    Verdict out;
    for (const auto& [k, _] : v12.per_k)
        if (!v23.per_k.count(k)) throw std::invalid_argument("verdicts cover different security parameters");
    if (v12.per_k.size() != v23.per_k.size())
        throw std::invalid_argument("verdicts cover different security parameters");
    out.reliable = v12.reliable && v23.reliable;
    out.pass = out.reliable;
    for (const auto& [k, a] : v12.per_k) {
        const auto& b = v23.per_k.at(k);
        out.per_k[k] = {a.sd + b.sd, a.real_defect + b.real_defect, a.ideal_defect + b.ideal_defect};
        const double bound = (v12.bound.count(k) ? v12.bound.at(k) : 0.0) + (v23.bound.count(k) ? v23.bound.at(k) : 0.0);
        out.bound[k] = bound;
        out.pass = out.pass && out.per_k[k].sd <= bound;
    }
    out.notes = v12.notes;
    out.notes.insert(out.notes.end(), v23.notes.begin(), v23.notes.end());
    return out;
}

}  // namespace qrsim
