// Acceptance suite: one line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "support/classical_oracle.h"
#include "support/random_network.h"
#include "support/worked_examples.h"

namespace qrsim {
namespace {

struct Result {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail << "FAILED: " << what << "; ";
        pass = pass && ok;
    }
};

RunConfig family_config(int k) {
    RunConfig rc;
    rc.k = k;
    rc.max_activations = 8;
    rc.queue_cap = 2;
    return rc;
}

// Runs at both k, or nothing when either overflows.
std::optional<std::array<RunResult, 2>> run_family(const Collection& c) {
    try {
        return std::array<RunResult, 2>{run(c, family_config(1)), run(c, family_config(2))};
    } catch (const RunError&) {
        return std::nullopt;
    }
}

void canonisation(Result& r) {
    const auto start = std::chrono::steady_clock::now();
    int compared = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; compared < 20 && seed < 500; ++seed) {
        const Collection c = testing::random_network(seed);
        const auto base = run_family(c);
        if (!base) continue;
        std::vector<MachinePtr> canon;
        for (const auto& m : c.machines()) canon.push_back(canonise(m));
        for (int i = 0; i < 2; ++i) {
            const auto other = run(Collection(canon), family_config(i + 1));
            worst = std::max(worst, statistical_distance((*base)[static_cast<std::size_t>(i)].traces, other.traces));
        }
        ++compared;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.require(compared >= 20, "at least 20 networks");
    r.require(worst <= 1e-9, "total variation within 1e-9");
    r.require(secs < 120.0, "under two minutes");
    r.detail << compared << " networks x k in {1,2}, max TV " << worst << ", " << secs << " s";
}

void combination(Result& r) {
    int compared = 0, pairs = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; compared < 20 && seed < 500; ++seed) {
        const Collection c = testing::random_network(seed);
        if (c.machines().size() < 2) continue;
        const auto base = run_family(c);
        if (!base) continue;
        const auto& ms = c.machines();
        for (std::size_t i = 0; i < ms.size(); ++i)
            for (std::size_t j = i + 1; j < ms.size(); ++j) {
                const MachinePtr comb = combine(ms[i], ms[j]);
                const Collection d = c.replacing({ms[i]->name, ms[j]->name}, comb);
                for (int k = 0; k < 2; ++k) {
                    const auto& b = (*base)[static_cast<std::size_t>(k)].traces;
                    const auto runs = run(d, family_config(k + 1)).traces;
                    const auto cv = view(runs, comb->name);
                    worst = std::max(worst, statistical_distance(project_combined_view(cv, *comb, 1), view(b, ms[i]->name)));
                    worst = std::max(worst, statistical_distance(project_combined_view(cv, *comb, 2), view(b, ms[j]->name)));
                    for (const auto& m : ms)
                        if (m != ms[i] && m != ms[j])
                            worst = std::max(worst, statistical_distance(view(runs, m->name), view(b, m->name)));
                }
                ++pairs;
            }
        ++compared;
    }
    r.require(compared >= 20, "at least 20 networks");
    r.require(worst <= 1e-9, "view distances within 1e-9");
    r.detail << compared << " networks, " << pairs << " pairs, max TV " << worst;
}

void classical_oracle(Result& r) {
    int compared = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; compared < 20 && seed < 500; ++seed) {
        const auto net = testing::random_classical_network(seed);
        bool both = true;
        for (int k : {1, 2}) {
            const auto oracle = testing::classical_run(net, k, 8, 2);
            RunResult got;
            try {
                got = run(testing::to_collection(net), family_config(k));
            } catch (const RunError&) {
                r.require(oracle.overflow, "overflow agrees (seed " + std::to_string(seed) + ")");
                both = false;
                continue;
            }
            r.require(!oracle.overflow, "overflow agrees (seed " + std::to_string(seed) + ")");
            if (oracle.overflow) {
                both = false;
                continue;
            }
            for (const auto& [t, p] : oracle.traces.probabilities)
                worst = std::max(worst, std::abs(p - got.traces.probability(t)));
            for (const auto& [t, p] : got.traces.probabilities)
                worst = std::max(worst, std::abs(p - oracle.traces.probability(t)));
            worst = std::max(worst, std::abs(got.truncated_mass - oracle.truncated_mass));
        }
        compared += both ? 1 : 0;
    }
    r.require(compared >= 20, "at least 20 networks");
    r.require(worst <= 1e-12, "agreement within 1e-12");
    r.detail << compared << " networks x k in {1,2}, max gap " << worst;
}

void buffers(Result& r) {
    const SpacePtr msgs = Alphabet("01", 2).message_space();
    const MachinePtr buf = make_buffer("b", 2, msgs);
    const auto b = testing::bench(buf);
    const SubsystemId in = b.port("b-?"), out = b.port("b-!"), clk = b.port("b<?");

    struct Row {
        std::string queue, input, clock, queue_after, out_after;
    };
    // Hand-computed from the buffer's append / select / extract steps.
    const Row table[] = {
        {"0,11", "", "1", "11", "0"},    // head released
        {"0,11", "", "10", "0", "11"},   // adversary picks index n = 2
        {"01", "", "11", "01", ""},      // i = 3 > n = 1
        {"0", "10", "", "0,10", ""},     // enqueue, no clock
        {"", "1", "1", "", "1"},         // enqueue then release
        {"0,1", "", "0", "0,1", ""},     // not a natural number
        {"0,1", "", "01", "0,1", ""},    // leading zero
        {"", "", "1", "", ""},           // empty queue
    };
    int rows = 0;
    for (const auto& row : table) {
        auto s = prepare(b.state, b.q(), row.queue);
        s = prepare(s, in, row.input);
        s = prepare(s, clk, row.clock);
        s = buffer_transition(s, *buf, b.regs);
        const bool ok = s.basis_label(b.q()) == row.queue_after && s.basis_label(out) == row.out_after &&
                        s.basis_label(in) == std::optional<std::string>("");
        r.require(ok, "table row " + std::to_string(rows));
        ++rows;
    }
    bool overflow = false;
    try {
        auto s = prepare(prepare(b.state, b.q(), "0,1"), in, "1");
        buffer_transition(s, *buf, b.regs);
    } catch (const RunError&) {
        overflow = true;
    }
    r.require(overflow, "overflow is a run error");

    // Process fidelity: a reference system maximally entangled with every
    // nonempty message, payload enqueued behind "11" and released by index 2.
    const SubsystemId ref = 1000, half = 1001;
    std::vector<std::uint32_t> payloads;
    for (std::uint32_t i = 0; i < msgs->dim(); ++i)
        if (!msgs->label(i).empty()) payloads.push_back(i);
    Factor phi;
    phi.ids = {ref, half};
    phi.spaces = {msgs, msgs};
    const double norm = 1.0 / static_cast<double>(payloads.size());
    for (auto x : payloads)
        for (auto y : payloads) phi.add({x, x}, {y, y}, norm);
    auto s = prepare(b.state, b.q(), "11").with_added(phi);
    s = move(s, half, in);
    s = buffer_transition(s, *buf, b.regs);
    s = prepare(s, clk, "10");
    s = buffer_transition(s, *buf, b.regs);
    const SubsystemId pair[] = {ref, out};
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(msgs->dim() * msgs->dim()));
    for (auto x : payloads) psi(static_cast<Eigen::Index>(x * msgs->dim() + x)) = std::sqrt(norm);
    const double f = fidelity(reduced_state(s, pair), psi);
    r.require(std::abs(f - 1.0) <= 1e-9, "process fidelity 1");
    r.require(s.basis_label(b.q()) == std::optional<std::string>("11"), "queue restored");
    r.detail << rows << " table rows, overflow raised, process fidelity " << f;
}

void one_time_pad(Result& r) {
    const auto doc = testing::load_example("otp.json");
    const std::set<int> ks = {1, 2, 3};
    const auto rc = testing::document_config(doc);
    const auto good = check_claim(doc.claim("otp"), ks, rc);
    r.require(good.malformed.ok() && good.pass, "OTP claim holds");
    double worst = 0.0;
    for (const auto& v : good.verdicts)
        for (const auto& [k, c] : v.per_k) worst = std::max(worst, c.sd);
    r.require(worst <= 1e-9, "OTP distance within 1e-9");

    const auto plain = check_claim(doc.claim("plaintext"), ks, rc);
    double least = 1.0;
    for (const auto& v : plain.verdicts)
        for (const auto& [k, c] : v.per_k) least = std::min(least, c.sd);
    r.require(plain.malformed.ok() && !plain.pass && std::abs(least - 1.0) <= 1e-12, "plaintext distance 1");
    r.detail << "OTP max sd " << worst << " over k=1..3 and " << good.verdicts.size()
             << " users; plaintext min sd " << least;
}

void composition(Result& r) {
    const auto doc = testing::load_example("otp.json");
    const auto claim = testing::composed_otp_claim(doc);
    const auto result = check_claim(claim, {1, 2, 3}, testing::document_config(doc));
    r.require(result.malformed.ok(), "composed claim well formed: " + result.malformed.str());
    r.require(result.pass, "composed claim holds");
    double worst = 0.0;
    for (const auto& v : result.verdicts)
        for (const auto& [k, c] : v.per_k) worst = std::max(worst, c.sd);
    r.require(worst <= 1e-9, "distance within 1e-9");
    r.detail << "wrapper+OTP real vs wrapper+OTP ideal, same simulator, max sd " << worst;
}

void teleportation(Result& r) {
    const auto doc = testing::load_example("teleport.json");
    const auto rc = testing::document_config(doc);
    const auto real = doc.structure("teleport_real");
    double worst_f = 1.0;
    for (const auto& [user, psi] : testing::teleport_inputs(doc.machine("H0")->qregs[0]))
        worst_f = std::min(worst_f, testing::delivered_fidelity(make_config(real, doc.machine(user), doc.machine("Ar")),
                                                                psi, rc));
    r.require(std::abs(worst_f - 1.0) <= 1e-9, "delivered fidelity 1");
    const auto result = check_claim(doc.claim("teleport"), {1, 2, 3}, rc);
    double worst = 0.0;
    for (const auto& v : result.verdicts)
        for (const auto& [k, c] : v.per_k) worst = std::max(worst, c.sd);
    r.require(result.malformed.ok() && result.pass && worst <= 1e-9, "views match the ideal channel");
    r.detail << "6 input states, min fidelity " << worst_f << ", max sd " << worst;
}

void qcore_suite(Result& r) {
    const SpacePtr space = make_space({"", "0", "1"});
    const SubsystemId ids[] = {0};
    double trace_gap = 0.0, norm_gap = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int count = 1 + i % 3;
        const Eigen::MatrixXcd u = testing::random_unitary(static_cast<std::uint64_t>(i), 3 * count);
        KrausChannel ch;
        ch.domain = {"q"};
        for (int j = 0; j < count; ++j) ch.operators.push_back(u.block(j * 3, 0, 3, 3));
        r.require(validate_channel(ch).ok, "random channel validates");
        const auto start = apply_channel({{testing::random_unitary(1000 + static_cast<std::uint64_t>(i), 3)}, {"q"}},
                                         make_basis_state(0, space, "0"), ids);
        const auto rho = apply_channel(ch, start, ids);
        trace_gap = std::max(trace_gap, std::abs(reduced_state(rho, ids).trace().real() - 1.0));
        double total = 0.0;
        for (const auto& o : measure_complete(rho, 0).outcomes) total += o.probability;
        norm_gap = std::max(norm_gap, std::abs(total - 1.0));
        total = 0.0;
        for (const auto& o : measure_emptiness(rho, 0).outcomes) total += o.probability;
        norm_gap = std::max(norm_gap, std::abs(total - 1.0));
    }
    r.require(trace_gap <= 1e-9, "trace preserved");
    r.require(norm_gap <= 1e-9, "measurements normalised");

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit;
    auto random_distribution = [&] {
        Distribution<int> d;
        std::vector<double> w(6);
        double total = 0.0;
        for (auto& x : w) total += x = unit(rng) < 0.3 ? 0.0 : unit(rng);
        if (total == 0.0) w[0] = total = 1.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (w[i] > 0) d.add(static_cast<int>(i), w[i] / total);
        return d;
    };
    int axioms = 0;
    for (int i = 0; i < 100; ++i) {
        const auto a = random_distribution(), b = random_distribution(), c = random_distribution();
        const bool ok = statistical_distance(a, a) == 0.0 &&
                        statistical_distance(a, b) == statistical_distance(b, a) &&
                        statistical_distance(a, c) <= statistical_distance(a, b) + statistical_distance(b, c) + 1e-15 &&
                        (a.probabilities == b.probabilities || statistical_distance(a, b) > 0.0);
        axioms += ok ? 1 : 0;
    }
    r.require(axioms == 100, "distance axioms on 100 triples");
    r.detail << "100 channels, trace gap " << trace_gap << ", normalisation gap " << norm_gap << ", " << axioms
             << "/100 metric triples";
}

}  // namespace
}  // namespace qrsim

int main() {
    using qrsim::Result;
    const std::pair<const char*, std::function<void(Result&)>> criteria[] = {
        {"canonisation keeps runs", qrsim::canonisation},
        {"combination keeps views", qrsim::combination},
        {"classical oracle agreement", qrsim::classical_oracle},
        {"buffer semantics", qrsim::buffers},
        {"one-time pad, perfect", qrsim::one_time_pad},
        {"simple composition", qrsim::composition},
        {"teleportation", qrsim::teleportation},
        {"qcore properties", qrsim::qcore_suite},
    };
    int failures = 0, n = 0;
    for (const auto& [name, check] : criteria) {
        ++n;
        Result r;
        try {
            check(r);
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail << "exception: " << e.what();
        }
        std::printf("[%s] %d. %s: %s\n", r.pass ? "PASS" : "FAIL", n, name, r.detail.str().c_str());
        std::fflush(stdout);
        failures += r.pass ? 0 : 1;
    }
    std::printf("%d/%d criteria passed\n", n - failures, n);
    return failures == 0 ? 0 : 1;
}
