#include "qrsim/qcore.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace qrsim {

// ---------------------------------------------------------------- Report

void Report::add(std::string clause, std::string detail) {
    violations_.push_back({std::move(clause), std::move(detail)});
}

void Report::merge(const Report& other, const std::string& prefix) {
    for (const auto& v : other.violations_) violations_.push_back({v.clause, prefix + v.detail});
}

bool Report::mentions(const std::string& clause) const {
    return std::any_of(violations_.begin(), violations_.end(),
                       [&](const Violation& v) { return v.clause.find(clause) != std::string::npos; });
}

std::string Report::str() const {
    std::ostringstream out;
    for (const auto& v : violations_) out << v.clause << ": " << v.detail << "\n";
    return out.str();
}

ValidationError::ValidationError(Report report)
    : ModelError(report.str().empty() ? "validation failed" : report.str()), report_(std::move(report)) {}

// ---------------------------------------------------------------- spaces

namespace {

std::string show_label(std::string_view label) {
    return label.empty() ? std::string("ε") : std::string(label);
}

}  // namespace

LabeledSpace::LabeledSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("a labelled space needs at least one label");
    for (std::uint32_t i = 0; i < labels_.size(); ++i) {
        if (!index_.emplace(labels_[i], i).second) {
            throw std::invalid_argument("duplicate label '" + show_label(labels_[i]) + "'");
        }
    }
}

bool LabeledSpace::contains(std::string_view label) const { return index_.count(std::string(label)) > 0; }

std::uint32_t LabeledSpace::find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    return it == index_.end() ? static_cast<std::uint32_t>(labels_.size()) : it->second;
}

std::uint32_t LabeledSpace::index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) {
        throw std::invalid_argument("label '" + show_label(label) + "' is not in space " + describe());
    }
    return it->second;
}

std::string LabeledSpace::describe() const {
    std::string out = "{";
    const std::size_t shown = std::min<std::size_t>(labels_.size(), 12);
    for (std::size_t i = 0; i < shown; ++i) {
        if (i) out += ",";
        out += show_label(labels_[i]);
    }
    if (shown < labels_.size()) out += ",... (" + std::to_string(labels_.size()) + " labels)";
    return out + "}";
}

SpacePtr make_space(std::vector<std::string> labels) {
    return std::make_shared<const LabeledSpace>(std::move(labels));
}

bool same_basis(const SpacePtr& a, const SpacePtr& b) { return a == b || (a && b && *a == *b); }

Alphabet::Alphabet(std::string symbols, std::size_t max_len) : symbols_(std::move(symbols)), max_len_(max_len) {
    if (symbols_.empty()) throw std::invalid_argument("alphabet needs at least one symbol");
    std::set<char> seen(symbols_.begin(), symbols_.end());
    if (seen.size() != symbols_.size()) throw std::invalid_argument("alphabet symbols must be distinct");
    if (seen.count(',')) throw std::invalid_argument("',' is reserved as the queue separator");
}

bool Alphabet::is_word(std::string_view w) const {
    return w.size() <= max_len_ &&
           std::all_of(w.begin(), w.end(), [&](char c) { return symbols_.find(c) != std::string::npos; });
}

std::vector<std::string> Alphabet::words() const {
    std::vector<std::string> out{""};
    std::vector<std::string> layer{""};
    for (std::size_t len = 1; len <= max_len_; ++len) {
        std::vector<std::string> next;
        for (const auto& w : layer)
            for (char c : symbols_) next.push_back(w + c);
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

SpacePtr Alphabet::message_space() const { return make_space(words()); }

// ---------------------------------------------------------------- Factor

std::size_t Factor::position(SubsystemId id) const {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw std::invalid_argument("subsystem " + std::to_string(id) + " not in factor");
    return static_cast<std::size_t>(it - ids.begin());
}

bool Factor::has(SubsystemId id) const { return std::find(ids.begin(), ids.end(), id) != ids.end(); }

double Factor::trace() const {
    double t = 0.0;
    for (const auto& [key, v] : entries)
        if (key.first == key.second) t += v.real();
    return t;
}

void Factor::add(const BasisKey& row, const BasisKey& col, Complex v) { entries[{row, col}] += v; }

void Factor::add(EntryKey key, Complex v) { entries[std::move(key)] += v; }

void Factor::scale(double s) {
    for (auto& [_, v] : entries) v *= s;
}

void Factor::prune() {
    for (auto it = entries.begin(); it != entries.end();) {
        if (std::abs(it->second) < tol::kEntry)
            it = entries.erase(it);
        else
            ++it;
    }
}

namespace {

struct Radix {
    std::vector<std::size_t> dims;
    std::vector<std::size_t> strides;
    std::size_t total = 1;

    Radix(const std::vector<SpacePtr>& spaces, std::span<const std::size_t> positions) {
        dims.reserve(positions.size());
        for (auto p : positions) dims.push_back(spaces.at(p)->dim());
        strides.assign(dims.size(), 1);
        for (std::size_t i = dims.size(); i-- > 0;) {
            strides[i] = total;
            total *= dims[i];
        }
    }
};

}  // namespace

Eigen::MatrixXcd Factor::dense() const {
    std::vector<std::size_t> all(ids.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Radix radix(spaces, all);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(radix.total, radix.total);
    for (const auto& [key, v] : entries) {
        std::size_t r = 0, c = 0;
        for (std::size_t i = 0; i < all.size(); ++i) {
            r += key.first[i] * radix.strides[i];
            c += key.second[i] * radix.strides[i];
        }
        m(r, c) += v;
    }
    return m;
}

SparseOperator SparseOperator::from_dense(const Eigen::MatrixXcd& m) {
    SparseOperator op;
    op.dim = static_cast<std::size_t>(m.rows());
    op.columns.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            if (std::abs(m(r, c)) > tol::kEntry)
                op.columns[c].emplace_back(static_cast<std::uint32_t>(r), m(r, c));
    return op;
}

namespace factor_ops {

Factor basis(SubsystemId id, SpacePtr space, std::uint32_t index) {
    Factor f;
    f.ids = {id};
    f.spaces = {std::move(space)};
    f.entries[{BasisKey{index}, BasisKey{index}}] = 1.0;
    return f;
}

Factor kron(const Factor& a, const Factor& b) {
    Factor out;
    out.ids = a.ids;
    out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
    out.spaces = a.spaces;
    out.spaces.insert(out.spaces.end(), b.spaces.begin(), b.spaces.end());
    for (const auto& [ka, va] : a.entries) {
        for (const auto& [kb, vb] : b.entries) {
            BasisKey r = ka.first, c = ka.second;
            r.insert(r.end(), kb.first.begin(), kb.first.end());
            c.insert(c.end(), kb.second.begin(), kb.second.end());
            out.entries.emplace(EntryKey{std::move(r), std::move(c)}, va * vb);
        }
    }
    return out;
}

Factor apply_operators(const Factor& f, std::span<const std::size_t> positions,
                       std::span<const SparseOperator> ops) {
    Radix radix(f.spaces, positions);
    for (const auto& op : ops) {
        if (op.dim != radix.total || op.columns.size() != radix.total)
            throw std::invalid_argument("operator dimension " + std::to_string(op.dim) +
                                        " does not match target dimension " + std::to_string(radix.total));
    }
    std::vector<BasisKey> decode(radix.total, BasisKey(positions.size()));
    for (std::size_t j = 0; j < radix.total; ++j)
        for (std::size_t i = 0; i < positions.size(); ++i)
            decode[j][i] = static_cast<std::uint32_t>((j / radix.strides[i]) % radix.dims[i]);
    auto joint = [&](const BasisKey& key) {
        std::size_t x = 0;
        for (std::size_t i = 0; i < positions.size(); ++i) x += key[positions[i]] * radix.strides[i];
        return x;
    };

    Factor out;
    out.ids = f.ids;
    out.spaces = f.spaces;
    for (const auto& [key, v] : f.entries) {
        const std::size_t rt = joint(key.first), ct = joint(key.second);
        for (const auto& op : ops) {
            for (const auto& [i, a] : op.columns[rt]) {
                BasisKey row = key.first;
                for (std::size_t t = 0; t < positions.size(); ++t) row[positions[t]] = decode[i][t];
                for (const auto& [j, b] : op.columns[ct]) {
                    BasisKey col = key.second;
                    for (std::size_t t = 0; t < positions.size(); ++t) col[positions[t]] = decode[j][t];
                    out.add(row, col, a * v * std::conj(b));
                }
            }
        }
    }
    out.prune();
    return out;
}

Factor apply_basis_map(const Factor& f, const std::function<BasisKey(const BasisKey&)>& guard,
                       const std::function<void(BasisKey&)>& map) {
    Factor out;
    out.ids = f.ids;
    out.spaces = f.spaces;
    for (const auto& [key, v] : f.entries) {
        if (guard(key.first) != guard(key.second)) continue;
        BasisKey row = key.first, col = key.second;
        map(row);
        map(col);
        out.add(std::move(row), std::move(col), v);
    }
    out.prune();
    return out;
}

Factor project(const Factor& f, std::size_t pos, const std::function<bool(std::uint32_t)>& keep) {
    Factor out;
    out.ids = f.ids;
    out.spaces = f.spaces;
    for (const auto& [key, v] : f.entries)
        if (keep(key.first[pos]) && keep(key.second[pos])) out.entries.emplace(key, v);
    return out;
}

Factor trace_out(const Factor& f, std::size_t pos) {
    Factor out;
    out.ids = f.ids;
    out.spaces = f.spaces;
    out.ids.erase(out.ids.begin() + static_cast<std::ptrdiff_t>(pos));
    out.spaces.erase(out.spaces.begin() + static_cast<std::ptrdiff_t>(pos));
    for (const auto& [key, v] : f.entries) {
        if (key.first[pos] != key.second[pos]) continue;
        BasisKey row = key.first, col = key.second;
        row.erase(row.begin() + static_cast<std::ptrdiff_t>(pos));
        col.erase(col.begin() + static_cast<std::ptrdiff_t>(pos));
        out.add(std::move(row), std::move(col), v);
    }
    out.prune();
    return out;
}

Factor reset(const Factor& f, std::size_t pos, std::uint32_t index) {
    Factor out;
    out.ids = f.ids;
    out.spaces = f.spaces;
    for (const auto& [key, v] : f.entries) {
        if (key.first[pos] != key.second[pos]) continue;
        BasisKey row = key.first, col = key.second;
        row[pos] = index;
        col[pos] = index;
        out.add(std::move(row), std::move(col), v);
    }
    out.prune();
    return out;
}

void accumulate(Factor& into, const Factor& from, double scale) {
    if (into.ids.empty() && into.entries.empty()) {
        into.ids = from.ids;
        into.spaces = from.spaces;
    }
    if (into.ids != from.ids) throw std::invalid_argument("cannot add factors over different subsystems");
    for (const auto& [key, v] : from.entries) into.entries[key] += scale * v;
}

std::vector<Factor> split_classical(Factor f) {
    std::vector<Factor> pieces;
    if (f.entries.empty()) {
        pieces.push_back(std::move(f));
        return pieces;
    }
    std::size_t pos = 0;
    while (f.ids.size() > 1 && pos < f.ids.size()) {
        const std::uint32_t x = f.entries.begin()->first.first[pos];
        bool definite = true;
        for (const auto& [key, _] : f.entries) {
            if (key.first[pos] != x || key.second[pos] != x) {
                definite = false;
                break;
            }
        }
        if (!definite) {
            ++pos;
            continue;
        }
        pieces.push_back(basis(f.ids[pos], f.spaces[pos], x));
        f = trace_out(f, pos);
    }
    pieces.insert(pieces.begin(), std::move(f));
    return pieces;
}

}  // namespace factor_ops

// ---------------------------------------------------------------- DensityState

std::vector<SubsystemId> DensityState::subsystems() const {
    std::vector<SubsystemId> out;
    for (const auto& f : factors_) out.insert(out.end(), f->ids.begin(), f->ids.end());
    return out;
}

bool DensityState::contains(SubsystemId id) const {
    return std::any_of(factors_.begin(), factors_.end(), [&](const auto& f) { return f->has(id); });
}

std::size_t DensityState::factor_of(SubsystemId id) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
        if (factors_[i]->has(id)) return i;
    throw std::invalid_argument("subsystem " + std::to_string(id) + " is not registered");
}

const SpacePtr& DensityState::space(SubsystemId id) const {
    const auto& f = *factors_[factor_of(id)];
    return f.spaces[f.position(id)];
}

std::optional<std::string> DensityState::basis_label(SubsystemId id) const {
    const auto& f = *factors_[factor_of(id)];
    const std::size_t pos = f.position(id);
    if (f.entries.empty()) return std::nullopt;
    const std::uint32_t x = f.entries.begin()->first.first[pos];
    for (const auto& [key, _] : f.entries)
        if (key.first[pos] != x || key.second[pos] != x) return std::nullopt;
    return f.spaces[pos]->label(x);
}

DensityState DensityState::with_weight(double w) const {
    DensityState out = *this;
    out.weight_ = w;
    return out;
}

DensityState DensityState::with_factor(std::size_t index, Factor f) const {
    DensityState out = *this;
    out.factors_.at(index) = std::make_shared<const Factor>(std::move(f));
    return out;
}

DensityState DensityState::without_factor(std::size_t index) const {
    DensityState out = *this;
    out.factors_.erase(out.factors_.begin() + static_cast<std::ptrdiff_t>(index));
    return out;
}

DensityState DensityState::with_added(Factor f) const {
    DensityState out = *this;
    out.factors_.push_back(std::make_shared<const Factor>(std::move(f)));
    return out;
}

std::pair<DensityState, std::size_t> DensityState::merged(std::span<const SubsystemId> ids) const {
    std::set<std::size_t> which;
    for (auto id : ids) which.insert(factor_of(id));
    if (which.empty()) throw std::invalid_argument("nothing to merge");
    const std::size_t first = *which.begin();
    if (which.size() == 1) return {*this, first};
    Factor joined = *factors_[first];
    for (auto it = std::next(which.begin()); it != which.end(); ++it) joined = factor_ops::kron(joined, *factors_[*it]);
    DensityState out;
    out.weight_ = weight_;
    std::size_t index = 0;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (i == first) {
            index = out.factors_.size();
            out.factors_.push_back(std::make_shared<const Factor>(std::move(joined)));
        } else if (!which.count(i)) {
            out.factors_.push_back(factors_[i]);
        }
    }
    return {out, index};
}

DensityState DensityState::replaced(std::size_t index, Factor f) const {
    auto pieces = factor_ops::split_classical(std::move(f));
    DensityState out = *this;
    if (pieces.front().ids.empty()) {
        out.factors_.erase(out.factors_.begin() + static_cast<std::ptrdiff_t>(index));
    } else {
        out.factors_.at(index) = std::make_shared<const Factor>(std::move(pieces.front()));
    }
    for (std::size_t i = 1; i < pieces.size(); ++i)
        out.factors_.push_back(std::make_shared<const Factor>(std::move(pieces[i])));
    return out;
}

// ---------------------------------------------------------------- operations

DensityState make_basis_state(SubsystemId id, SpacePtr space, std::string_view label) {
    if (!space) throw std::invalid_argument("missing space");
    const std::uint32_t index = space->index_of(label);
    return DensityState().with_added(factor_ops::basis(id, std::move(space), index));
}

DensityState tensor(const DensityState& a, const DensityState& b) {
    for (auto id : b.subsystems())
        if (a.contains(id)) throw std::invalid_argument("overlapping subsystem id " + std::to_string(id));
    DensityState out = a.with_weight(a.weight() * b.weight());
    for (const auto& f : b.factors()) out = out.with_added(*f);
    return out;
}

ChannelReport validate_channel(const KrausChannel& ch) {
    ChannelReport report;
    if (ch.operators.empty()) {
        report.defect_norm = std::numeric_limits<double>::infinity();
        report.message = "channel has no Kraus operators";
        return report;
    }
    const Eigen::Index n = ch.operators.front().rows();
    for (const auto& k : ch.operators) {
        if (k.rows() != n || k.cols() != n) {
            report.defect_norm = std::numeric_limits<double>::infinity();
            report.message = "Kraus operators must be square and of equal shape";
            return report;
        }
    }
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& k : ch.operators) sum += k.adjoint() * k;
    Eigen::MatrixXcd defect = sum - Eigen::MatrixXcd::Identity(n, n);
    defect = 0.5 * (defect + defect.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(defect, Eigen::EigenvaluesOnly);
    report.defect_norm = solver.eigenvalues().cwiseAbs().maxCoeff();
    report.ok = report.defect_norm <= tol::kChannel;
    std::ostringstream msg;
    if (report.ok) {
        msg << "trace preserving; completely positive by Kraus form";
    } else {
        msg << "sum of K^dagger K differs from the identity by " << report.defect_norm << " in operator norm";
    }
    report.message = msg.str();
    return report;
}

DensityState apply_channel(const KrausChannel& ch, const DensityState& rho, std::span<const SubsystemId> targets) {
    const auto report = validate_channel(ch);
    if (!report.ok) throw std::invalid_argument("invalid channel: " + report.message);
    std::set<SubsystemId> distinct(targets.begin(), targets.end());
    if (distinct.size() != targets.size()) throw std::invalid_argument("channel targets must be distinct");
    auto [merged, index] = rho.merged(targets);
    const Factor& f = *merged.factors()[index];
    std::vector<std::size_t> positions;
    for (auto id : targets) positions.push_back(f.position(id));
    std::vector<SparseOperator> ops;
    for (const auto& k : ch.operators) ops.push_back(SparseOperator::from_dense(k));
    return merged.replaced(index, factor_ops::apply_operators(f, positions, ops));
}

double Measurement::probability(std::string_view label) const {
    const auto* o = find(label);
    return o ? o->probability : 0.0;
}

const MeasurementOutcome* Measurement::find(std::string_view label) const {
    for (const auto& o : outcomes)
        if (o.label == label) return &o;
    return nullptr;
}

namespace {

// Splits `rho` along the classes of a projective measurement on `target`.
// `klass` maps a label index to its outcome class; classes are visited in
// increasing order.
Measurement measure_classes(const DensityState& rho, SubsystemId target,
                            const std::function<std::size_t(std::uint32_t)>& klass,
                            const std::function<std::string(std::size_t, std::uint32_t)>& name,
                            bool collapses) {
    const std::size_t fi = rho.factor_of(target);
    const Factor& f = *rho.factors()[fi];
    const std::size_t pos = f.position(target);

    std::map<std::size_t, double> mass;
    std::map<std::size_t, std::uint32_t> witness;
    for (const auto& [key, v] : f.entries) {
        if (key.first != key.second) continue;
        const std::size_t k = klass(key.first[pos]);
        mass[k] += v.real();
        witness.emplace(k, key.first[pos]);
    }

    Measurement result;
    for (const auto& [k, p] : mass) {
        if (p < tol::kBranch) {
            result.pruned_mass += std::max(p, 0.0) * rho.weight();
            continue;
        }
        Factor sub = factor_ops::project(f, pos, [&](std::uint32_t x) { return klass(x) == k; });
        sub.scale(1.0 / p);
        DensityState post = rho.with_weight(rho.weight() * p);
        if (collapses) {
            const std::uint32_t x = witness.at(k);
            if (f.size() == 1) {
                post = post.with_factor(fi, factor_ops::basis(target, f.spaces[pos], x));
            } else {
                post = post.replaced(fi, factor_ops::trace_out(sub, pos))
                           .with_added(factor_ops::basis(target, f.spaces[pos], x));
            }
        } else {
            post = post.replaced(fi, std::move(sub));
        }
        result.outcomes.push_back({name(k, witness.at(k)), p, std::move(post)});
    }
    return result;
}

}  // namespace

Measurement measure_complete(const DensityState& rho, SubsystemId target) {
    const auto& space = rho.space(target);
    return measure_classes(
        rho, target, [](std::uint32_t x) { return static_cast<std::size_t>(x); },
        [&](std::size_t, std::uint32_t x) { return space->label(x); }, true);
}

Measurement measure_emptiness(const DensityState& rho, SubsystemId target) {
    const auto& space = rho.space(target);
    const std::uint32_t eps = space->index_of("");
    return measure_classes(
        rho, target, [eps](std::uint32_t x) { return static_cast<std::size_t>(x == eps ? 0 : 1); },
        [](std::size_t k, std::uint32_t) { return std::string(k == 0 ? kEmpty : kNonempty); }, false);
}

DensityState prepare(const DensityState& rho, SubsystemId target, std::string_view label) {
    const std::size_t fi = rho.factor_of(target);
    const Factor& f = *rho.factors()[fi];
    const std::size_t pos = f.position(target);
    const SpacePtr space = f.spaces[pos];
    const std::uint32_t index = space->index_of(label);
    if (f.size() == 1) return rho.with_factor(fi, factor_ops::basis(target, space, index));
    return rho.replaced(fi, factor_ops::trace_out(f, pos)).with_added(factor_ops::basis(target, space, index));
}

DensityState prepare_epsilon(const DensityState& rho, SubsystemId target) { return prepare(rho, target, ""); }

DensityState move(const DensityState& rho, SubsystemId src, SubsystemId dst) {
    if (src == dst) throw std::invalid_argument("move needs two different subsystems");
    const SpacePtr src_space = rho.space(src);
    if (!same_basis(src_space, rho.space(dst))) {
        throw std::invalid_argument("move between different bases " + src_space->describe() + " and " +
                                    rho.space(dst)->describe());
    }
    DensityState out = rho;
    {
        const std::size_t fi = out.factor_of(dst);
        const Factor& f = *out.factors()[fi];
        out = f.size() == 1 ? out.without_factor(fi) : out.replaced(fi, factor_ops::trace_out(f, f.position(dst)));
    }
    const std::size_t fi = out.factor_of(src);
    Factor renamed = *out.factors()[fi];
    renamed.ids[renamed.position(src)] = dst;
    return out.with_factor(fi, std::move(renamed))
        .with_added(factor_ops::basis(src, src_space, src_space->index_of("")));
}

Eigen::MatrixXcd reduced_state(const DensityState& rho, std::span<const SubsystemId> targets) {
    auto [merged, index] = rho.merged(targets);
    Factor f = *merged.factors()[index];
    for (std::size_t pos = f.size(); pos-- > 0;) {
        if (std::find(targets.begin(), targets.end(), f.ids[pos]) == targets.end()) f = factor_ops::trace_out(f, pos);
    }
    std::vector<std::size_t> order;
    for (auto id : targets) order.push_back(f.position(id));
    Radix radix(f.spaces, order);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(radix.total, radix.total);
    for (const auto& [key, v] : f.entries) {
        std::size_t r = 0, c = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            r += key.first[order[i]] * radix.strides[i];
            c += key.second[order[i]] * radix.strides[i];
        }
        m(r, c) += v;
    }
    return m;
}

double fidelity(const Eigen::MatrixXcd& rho, const Eigen::VectorXcd& psi) {
    return (psi.adjoint() * rho * psi)(0, 0).real();
}

Report check_state(const DensityState& rho) {
    Report report;
    std::set<SubsystemId> seen;
    for (std::size_t i = 0; i < rho.factors().size(); ++i) {
        const Factor& f = *rho.factors()[i];
        const std::string where = "factor " + std::to_string(i);
        for (auto id : f.ids)
            if (!seen.insert(id).second) report.add("partition", where + " repeats subsystem " + std::to_string(id));
        if (std::abs(f.trace() - 1.0) > tol::kTrace)
            report.add("unit trace", where + " has trace " + std::to_string(f.trace()));
        std::map<BasisKey, std::size_t> support;
        for (const auto& [key, v] : f.entries) {
            auto it = f.entries.find({key.second, key.first});
            const Complex mirror = it == f.entries.end() ? Complex(0.0) : it->second;
            if (std::abs(mirror - std::conj(v)) > tol::kHermitian) {
                report.add("hermitian", where + " is not Hermitian");
                break;
            }
            support.emplace(key.first, 0);
            support.emplace(key.second, 0);
        }
        std::size_t n = 0;
        for (auto& [_, idx] : support) idx = n++;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        for (const auto& [key, v] : f.entries) m(support[key.first], support[key.second]) += v;
        if (n > 0) {
            Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
            if (solver.eigenvalues().minCoeff() < -tol::kPositivity)
                report.add("positive", where + " has eigenvalue " + std::to_string(solver.eigenvalues().minCoeff()));
        }
    }
    return report;
}

}  // namespace qrsim
