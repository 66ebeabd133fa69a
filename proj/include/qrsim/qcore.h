#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qrsim/report.h"

namespace qrsim {

using Complex = std::complex<double>;
using SubsystemId = std::uint32_t;

namespace tol {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kPositivity = 1e-10;
inline constexpr double kTrace = 1e-9;
inline constexpr double kChannel = 1e-9;
inline constexpr double kNormalization = 1e-9;
// Measurement outcomes below this probability are dropped into pruned mass.
inline constexpr double kBranch = 1e-12;
// Matrix entries below this magnitude are removed from sparse storage.
inline constexpr double kEntry = 1e-15;
}  // namespace tol

class LabeledSpace;
using SpacePtr = std::shared_ptr<const LabeledSpace>;

// Finite computational basis given by distinct string labels.
class LabeledSpace {
public:
    explicit LabeledSpace(std::vector<std::string> labels);

    std::size_t dim() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::uint32_t index) const { return labels_.at(index); }
    bool contains(std::string_view label) const;
    // Returns dim() when the label is absent.
    std::uint32_t find(std::string_view label) const;
    // Throws std::invalid_argument naming the label when it is absent.
    std::uint32_t index_of(std::string_view label) const;
    std::string describe() const;

    friend bool operator==(const LabeledSpace& a, const LabeledSpace& b) { return a.labels_ == b.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

SpacePtr make_space(std::vector<std::string> labels);
bool same_basis(const SpacePtr& a, const SpacePtr& b);

// Message alphabet. Words up to max_len symbols form the message space, which
// always contains the empty word.
class Alphabet {
public:
    Alphabet(std::string symbols = "01", std::size_t max_len = 2);

    const std::string& symbols() const { return symbols_; }
    std::size_t max_len() const { return max_len_; }
    bool is_word(std::string_view w) const;
    // Shortlex order: by length, then by symbol order.
    std::vector<std::string> words() const;
    SpacePtr message_space() const;

    friend bool operator==(const Alphabet&, const Alphabet&) = default;

private:
    std::string symbols_;
    std::size_t max_len_;
};

using BasisKey = std::vector<std::uint32_t>;
using EntryKey = std::pair<BasisKey, BasisKey>;

// One block of a product state: an unnormalised operator on the tensor product
// of its subsystems, stored sparsely by (row, column) basis keys. Keys list one
// label index per subsystem, in the order of `ids`.
struct Factor {
    std::vector<SubsystemId> ids;
    std::vector<SpacePtr> spaces;
    std::map<EntryKey, Complex> entries;

    std::size_t position(SubsystemId id) const;
    bool has(SubsystemId id) const;
    std::size_t size() const { return ids.size(); }
    double trace() const;
    void add(const BasisKey& row, const BasisKey& col, Complex v);
    void add(EntryKey key, Complex v);
    void scale(double s);
    void prune();
    // Dense matrix over the full product basis, first subsystem most significant.
    Eigen::MatrixXcd dense() const;
};

// Column-sparse form of a square matrix, used to apply Kraus operators.
struct SparseOperator {
    std::size_t dim = 0;
    std::vector<std::vector<std::pair<std::uint32_t, Complex>>> columns;

    static SparseOperator from_dense(const Eigen::MatrixXcd& m);
};

// Low-level factor operations. Positions index into Factor::ids.
namespace factor_ops {

Factor basis(SubsystemId id, SpacePtr space, std::uint32_t index);
Factor kron(const Factor& a, const Factor& b);
Factor apply_operators(const Factor& f, std::span<const std::size_t> positions,
                       std::span<const SparseOperator> ops);
// Applies rho -> sum_g K_g rho K_g^dagger where K_g maps basis key r with
// guard(r) == g to map(r). `map` must be injective on each guard class; it
// edits the key in place.
Factor apply_basis_map(const Factor& f, const std::function<BasisKey(const BasisKey&)>& guard,
                       const std::function<void(BasisKey&)>& map);
// Keeps the entries whose row and column label at `pos` both satisfy `keep`.
Factor project(const Factor& f, std::size_t pos, const std::function<bool(std::uint32_t)>& keep);
Factor trace_out(const Factor& f, std::size_t pos);
// Discards the content at `pos` and puts it in basis state `index`.
Factor reset(const Factor& f, std::size_t pos, std::uint32_t index);
void accumulate(Factor& into, const Factor& from, double scale = 1.0);
// Splits off every subsystem that sits in a single basis state.
std::vector<Factor> split_classical(Factor f);

}  // namespace factor_ops

// Density operator over a set of registered subsystems, kept as a product of
// factors. `weight` is the probability of the branch the state belongs to.
class DensityState {
public:
    DensityState() = default;

    double weight() const { return weight_; }
    const std::vector<std::shared_ptr<const Factor>>& factors() const { return factors_; }
    std::vector<SubsystemId> subsystems() const;
    bool contains(SubsystemId id) const;
    const SpacePtr& space(SubsystemId id) const;
    std::size_t factor_of(SubsystemId id) const;
    // Label if the subsystem is in a definite basis state, otherwise empty.
    std::optional<std::string> basis_label(SubsystemId id) const;

    DensityState with_weight(double w) const;
    DensityState with_factor(std::size_t index, Factor f) const;
    DensityState without_factor(std::size_t index) const;
    DensityState with_added(Factor f) const;

    // Merges the factors holding `ids` into one and returns its index.
    std::pair<DensityState, std::size_t> merged(std::span<const SubsystemId> ids) const;
    // Replaces factor `index` by `f` after splitting off classical subsystems.
    DensityState replaced(std::size_t index, Factor f) const;

private:
    std::vector<std::shared_ptr<const Factor>> factors_;
    double weight_ = 1.0;
};

struct KrausChannel {
    std::vector<Eigen::MatrixXcd> operators;
    std::vector<std::string> domain;
};

struct ChannelReport {
    bool ok = false;
    double defect_norm = 0.0;
    std::string message;
};

template <typename T>
struct Distribution {
    std::map<T, double> probabilities;
    double pruned_mass = 0.0;

    void add(const T& outcome, double p) { probabilities[outcome] += p; }
    double mass() const {
        double total = 0.0;
        for (const auto& [_, p] : probabilities) total += p;
        return total;
    }
    double probability(const T& outcome) const {
        auto it = probabilities.find(outcome);
        return it == probabilities.end() ? 0.0 : it->second;
    }
    bool normalized(double tolerance = tol::kNormalization) const {
        return std::abs(mass() + pruned_mass - 1.0) <= tolerance;
    }
};

template <typename T>
double statistical_distance(const Distribution<T>& a, const Distribution<T>& b) {
    double sum = 0.0;
    auto ia = a.probabilities.begin();
    auto ib = b.probabilities.begin();
    while (ia != a.probabilities.end() || ib != b.probabilities.end()) {
        if (ib == b.probabilities.end() || (ia != a.probabilities.end() && ia->first < ib->first)) {
            sum += std::abs(ia->second);
            ++ia;
        } else if (ia == a.probabilities.end() || ib->first < ia->first) {
            sum += std::abs(ib->second);
            ++ib;
        } else {
            sum += std::abs(ia->second - ib->second);
            ++ia;
            ++ib;
        }
    }
    return 0.5 * sum;
}

struct MeasurementOutcome {
    std::string label;
    double probability = 0.0;
    // Renormalised post-measurement state; its weight includes `probability`.
    DensityState state;
};

struct Measurement {
    std::vector<MeasurementOutcome> outcomes;
    double pruned_mass = 0.0;

    double probability(std::string_view label) const;
    const MeasurementOutcome* find(std::string_view label) const;
};

inline constexpr std::string_view kEmpty = "empty";
inline constexpr std::string_view kNonempty = "nonempty";

DensityState make_basis_state(SubsystemId id, SpacePtr space, std::string_view label);
DensityState tensor(const DensityState& a, const DensityState& b);
DensityState apply_channel(const KrausChannel& ch, const DensityState& rho,
                           std::span<const SubsystemId> targets);
Measurement measure_complete(const DensityState& rho, SubsystemId target);
Measurement measure_emptiness(const DensityState& rho, SubsystemId target);
DensityState prepare(const DensityState& rho, SubsystemId target, std::string_view label);
DensityState prepare_epsilon(const DensityState& rho, SubsystemId target);
DensityState move(const DensityState& rho, SubsystemId src, SubsystemId dst);
ChannelReport validate_channel(const KrausChannel& ch);

// Reduced density matrix of `targets` (first target most significant).
Eigen::MatrixXcd reduced_state(const DensityState& rho, std::span<const SubsystemId> targets);
// <psi| rho |psi> for a pure reference state.
double fidelity(const Eigen::MatrixXcd& rho, const Eigen::VectorXcd& psi);
// Checks Hermiticity, positivity and unit trace of every factor.
Report check_state(const DensityState& rho);

}  // namespace qrsim
