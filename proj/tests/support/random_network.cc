#include "support/random_network.h"

#include <algorithm>
#include <random>

#include "qrsim/document.h"

namespace qrsim::testing {

namespace {

const std::vector<std::string> kStates = {"1", "11", "0", "00"};
const std::vector<std::string> kQStates = {"", "0", "1"};

struct Draft {
    std::string name;
    std::vector<Port> ports;
    std::set<Port> cports;
};

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    Collection build() {
        const int n = pick(1, 3);
        std::vector<Draft> drafts(static_cast<std::size_t>(n));
        drafts[0].name = "X";
        drafts[0].ports.push_back(kMasterClock);
        drafts[0].cports.insert(kMasterClock);
        for (int i = 1; i < n; ++i) drafts[static_cast<std::size_t>(i)].name = "M" + std::to_string(i);

        const int connections = pick(1, 3);
        for (int c = 0; c < connections; ++c) {
            const std::string name(1, static_cast<char>('a' + c));
            auto& sender = drafts[static_cast<std::size_t>(pick(0, n - 1))];
            const Port out{name, PortLabel::simple, Direction::out};
            sender.ports.push_back(out);
            auto& receiver = drafts[static_cast<std::size_t>(pick(0, n - 1))];
            const Port in{name, PortLabel::simple, Direction::in};
            receiver.ports.push_back(in);
            if (coin(0.5)) {
                sender.cports.insert(out);
                receiver.cports.insert(in);
            }
            auto& scheduler = drafts[static_cast<std::size_t>(pick(0, n - 1))];
            const Port clock{name, PortLabel::clock, Direction::out};
            scheduler.ports.push_back(clock);
            scheduler.cports.insert(clock);
        }

        std::vector<MachinePtr> machines;
        for (auto& d : drafts) {
            std::shuffle(d.ports.begin(), d.ports.end(), rng_);
            machines.push_back(machine(d, d.name == "X"));
        }
        return Collection(std::move(machines));
    }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
    template <typename T>
    const T& choose(const std::vector<T>& xs) {
        return xs[static_cast<std::size_t>(pick(0, static_cast<int>(xs.size()) - 1))];
    }

    Eigen::MatrixXcd random_unitary(int dim) {
        std::normal_distribution<double> g;
        Eigen::MatrixXcd a(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                const double re = g(rng_);
                a(r, c) = Complex(re, g(rng_));
            }
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
        return qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
    }

    Json unitary_on_q() {
        if (coin(0.5)) return {{"op", "unitary"}, {"regs", Json::array({"q"})}, {"matrix", matrix_to_json(random_unitary(3))}};
        return {{"op", "unitary"},
                {"regs", Json::array({"q"})},
                {"matrix", matrix_to_json(random_unitary(2))},
                {"basis", {"0", "1"}}};
    }

    static Json prep(const std::string& reg, const std::string& value) {
        return {{"op", "prepare"}, {"reg", reg}, {"value", value}};
    }

    static std::string quoted(const std::string& label) { return label.empty() ? "''" : label; }

    // Instructions that set the next classical state.
    Json next_state() {
        Json out = Json::array();
        if (coin(0.35)) {
            out.push_back(prep("c", choose(kStates)));
            return out;
        }
        const double p = choose(std::vector<double>{0.25, 0.5, 0.75, 0.125});
        Json values = Json::array();
        values.push_back(Json::array({choose(kStates), p}));
        values.push_back(Json::array({choose(kStates), 1 - p}));
        out.push_back({{"op", "sample"}, {"var", "t"}, {"values", values}});
        out.push_back(prep("c", "$t"));
        return out;
    }

    // Activation behaviour for one classical state.
    Json action(const Draft& d) {
        Json block = Json::array();
        std::vector<Port> quantum_in, classical_in, outs, clocks;
        for (const auto& p : d.ports) {
            if (p.is_in() && p.is_simple()) (d.cports.count(p) ? classical_in : quantum_in).push_back(p);
            if (p.is_out() && p.is_simple()) outs.push_back(p);
            if (p.is_out() && p.is_clock()) clocks.push_back(p);
        }
        if (coin(0.6)) block.push_back(unitary_on_q());
        if (!quantum_in.empty() && coin(0.5))
            block.push_back({{"op", "swap"}, {"regs", {"q", choose(quantum_in).str()}}});
        bool measured = false;
        if (!classical_in.empty() && coin(0.7)) {
            block.push_back({{"op", "measure"}, {"reg", choose(classical_in).str()}, {"var", "x"}});
            measured = true;
        }
        for (const auto& p : outs) {
            if (!coin(0.45)) continue;
            const bool classical = d.cports.count(p) > 0;
            if (measured && coin(0.5))
                block.push_back(prep(p.str(), "$x"));
            else if (!classical && coin(0.5))
                block.push_back({{"op", "swap"}, {"regs", {"q", p.str()}}});
            else
                block.push_back(prep(p.str(), choose(std::vector<std::string>{"0", "1"})));
        }
        if (!clocks.empty()) {
            if (coin(0.8)) block.push_back(prep(choose(clocks).str(), "1"));
            if (coin(0.15)) block.push_back(prep(choose(clocks).str(), choose(std::vector<std::string>{"1", "0"})));
        }
        if (measured && coin(0.5)) {
            block.push_back({{"op", "if"},
                             {"cond", {{"eq", {"$x", "0"}}}},
                             {"then", Json::array({prep("c", choose(kStates))})},
                             {"else", Json::array({prep("c", choose(kStates))})}});
        } else {
            for (const auto& x : next_state()) block.push_back(x);
        }
        return block;
    }

    MachinePtr machine(const Draft& d, bool master) {
        MachineSpec spec;
        spec.name = d.name;
        spec.ports = d.ports;
        spec.cports = d.cports;
        spec.qstates = kQStates;
        spec.cstates = kStates;
        spec.message_space = random_alphabet().message_space();
        for (const auto& s : kStates) {
            const bool initial = s == "1" || s == "11";
            if (coin(initial ? 0.05 : 0.25)) spec.fin.push_back(s);
        }
        if (master && std::find(spec.fin.begin(), spec.fin.end(), "00") == spec.fin.end() && coin(0.5))
            spec.fin.push_back("00");
        for (const auto& s : kStates)
            for (const auto& p : d.ports)
                if (p.is_in() && coin(0.12)) spec.zero_length.emplace_back(s, p);

        Json program = Json::array();
        program.push_back({{"op", "measure"}, {"reg", "c"}, {"var", "s"}});
        Json chain = action(d);
        for (std::size_t i = kStates.size() - 1; i-- > 0;) {
            chain = Json::array({{{"op", "if"},
                                  {"cond", {{"eq", {"$s", quoted(kStates[i])}}}},
                                  {"then", action(d)},
                                  {"else", chain}}});
        }
        for (const auto& x : chain) program.push_back(x);
        spec.delta = program_from_json(program);
        return make_machine(std::move(spec));
    }

    std::mt19937_64 rng_;
};

}  // namespace

Alphabet random_alphabet() { return Alphabet("01", 1); }

Collection random_network(std::uint64_t seed) { return Generator(seed).build(); }

}  // namespace qrsim::testing
