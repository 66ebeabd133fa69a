#include "qrsim/program.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "qrsim/machine.h"

namespace qrsim {

using nlohmann::ordered_json;

// ---------------------------------------------------------------- naturals

std::optional<std::size_t> parse_natural(std::string_view word) {
    if (word.empty() || word.front() != '1') return std::nullopt;
    std::size_t n = 0;
    for (char c : word) {
        if (c != '0' && c != '1') return std::nullopt;
        if (n > (std::numeric_limits<std::size_t>::max() >> 2)) return std::numeric_limits<std::size_t>::max();
        n = 2 * n + static_cast<std::size_t>(c - '0');
    }
    return n;
}

std::string format_natural(std::size_t n) {
    if (n == 0) return "0";
    std::string out;
    for (; n > 0; n /= 2) out.insert(out.begin(), static_cast<char>('0' + n % 2));
    return out;
}

bool is_initial_label(std::string_view label) {
    return !label.empty() && std::all_of(label.begin(), label.end(), [](char c) { return c == '1'; });
}

std::string ones(int k) { return std::string(static_cast<std::size_t>(std::max(k, 0)), '1'); }

// ---------------------------------------------------------------- expressions

namespace {

const std::set<std::string> kFunctions = {"concat", "xor", "len", "take", "drop"};

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class ExprParser {
public:
    explicit ExprParser(std::string_view s) : s_(s) {}

    Expr parse_all() {
        skip();
        if (i_ == s_.size()) return Expr::literal("");
        Expr e = parse();
        skip();
        if (i_ != s_.size()) fail("trailing input");
        return e;
    }

private:
    Expr parse() {
        skip();
        if (i_ < s_.size() && s_[i_] == '$') {
            ++i_;
            Expr e;
            e.kind = Expr::Kind::variable;
            e.text = word();
            if (e.text.empty()) fail("empty variable name");
            return e;
        }
        if (i_ < s_.size() && s_[i_] == '\'') {
            ++i_;
            const std::size_t end = s_.find('\'', i_);
            if (end == std::string_view::npos) fail("unterminated quote");
            Expr e = Expr::literal(std::string(s_.substr(i_, end - i_)));
            i_ = end + 1;
            return e;
        }
        std::string w = word();
        skip();
        if (i_ < s_.size() && s_[i_] == '(') {
            if (!kFunctions.count(w)) fail("unknown function '" + w + "'");
            ++i_;
            Expr e;
            e.kind = Expr::Kind::call;
            e.text = w;
            skip();
            if (i_ < s_.size() && s_[i_] == ')') {
                ++i_;
                return e;
            }
            while (true) {
                e.args.push_back(parse());
                skip();
                if (i_ < s_.size() && s_[i_] == ',') {
                    ++i_;
                    continue;
                }
                if (i_ < s_.size() && s_[i_] == ')') {
                    ++i_;
                    break;
                }
                fail("expected ',' or ')'");
            }
            return e;
        }
        if (w.empty()) fail("expected an expression");
        return Expr::literal(w);
    }

    std::string word() {
        const std::size_t start = i_;
        while (i_ < s_.size() && word_char(s_[i_])) ++i_;
        return std::string(s_.substr(start, i_ - start));
    }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("bad expression '" + std::string(s_) + "': " + why);
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

std::size_t decimal(const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw RunError("expected a decimal count, got '" + s + "'");
    return static_cast<std::size_t>(std::stoul(s));
}

void need_args(const Expr& e, std::size_t n) {
    if (e.args.size() != n)
        throw RunError(e.text + "() takes " + std::to_string(n) + " arguments, got " + std::to_string(e.args.size()));
}

}  // namespace

Expr Expr::parse(std::string_view source) { return ExprParser(source).parse_all(); }

Expr Expr::literal(std::string value) {
    Expr e;
    e.kind = Kind::literal;
    e.text = std::move(value);
    return e;
}

std::string Expr::str() const {
    switch (kind) {
        case Kind::literal:
            if (!text.empty() && std::all_of(text.begin(), text.end(), word_char)) return text;
            return "'" + text + "'";
        case Kind::variable:
            return "$" + text;
        case Kind::call: {
            std::string out = text + "(";
            for (std::size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + args[i].str();
            return out + ")";
        }
    }
    return text;
}

std::string Expr::eval(const Env& env) const {
    switch (kind) {
        case Kind::literal:
            return text;
        case Kind::variable: {
            auto it = env.find(text);
            if (it == env.end()) throw RunError("unbound variable $" + text);
            return it->second;
        }
        case Kind::call:
            break;
    }
    if (text == "concat") {
        std::string out;
        for (const auto& a : args) out += a.eval(env);
        return out;
    }
    if (text == "len") {
        need_args(*this, 1);
        return format_natural(args[0].eval(env).size());
    }
    if (text == "xor") {
        need_args(*this, 2);
        const std::string a = args[0].eval(env), b = args[1].eval(env);
        if (b.size() < a.size()) throw RunError("xor: key '" + b + "' shorter than '" + a + "'");
        std::string out(a.size(), '0');
        for (std::size_t i = 0; i < a.size(); ++i) {
            if ((a[i] != '0' && a[i] != '1') || (b[i] != '0' && b[i] != '1'))
                throw RunError("xor needs binary words, got '" + a + "' and '" + b + "'");
            out[i] = a[i] == b[i] ? '0' : '1';
        }
        return out;
    }
    if (text == "take" || text == "drop") {
        need_args(*this, 2);
        const std::string a = args[0].eval(env);
        const std::size_t n = std::min(decimal(args[1].eval(env)), a.size());
        return text == "take" ? a.substr(0, n) : a.substr(n);
    }
    throw RunError("unknown function " + text);
}

bool Predicate::eval(const Env& env) const {
    switch (kind) {
        case Kind::constant:
            return value;
        case Kind::eq:
            return args.at(0).eval(env) == args.at(1).eval(env);
        case Kind::ne:
            return args.at(0).eval(env) != args.at(1).eval(env);
        case Kind::in: {
            const std::string v = args.at(0).eval(env);
            return std::find(set.begin(), set.end(), v) != set.end();
        }
        case Kind::prefix:
            return args.at(0).eval(env).starts_with(args.at(1).eval(env));
        case Kind::initial:
            return is_initial_label(args.at(0).eval(env));
        case Kind::all:
            return std::all_of(children.begin(), children.end(), [&](const Predicate& p) { return p.eval(env); });
        case Kind::any:
            return std::any_of(children.begin(), children.end(), [&](const Predicate& p) { return p.eval(env); });
        case Kind::negate:
            return !children.at(0).eval(env);
    }
    return false;
}

// ---------------------------------------------------------------- JSON

ordered_json matrix_to_json(const Eigen::MatrixXcd& m) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back({m(r, c).real(), m(r, c).imag()});
    return out;
}

Eigen::MatrixXcd matrix_from_json(const ordered_json& j, std::size_t rows, std::size_t cols) {
    if (!j.is_array() || j.size() != rows * cols)
        throw std::invalid_argument("matrix needs " + std::to_string(rows * cols) + " (re, im) pairs");
    Eigen::MatrixXcd m(rows, cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw std::invalid_argument("matrix entries must be [re, im] pairs");
        m(static_cast<Eigen::Index>(i / cols), static_cast<Eigen::Index>(i % cols)) =
            Complex(e[0].get<double>(), e[1].get<double>());
    }
    return m;
}

Eigen::MatrixXcd square_matrix_from_json(const ordered_json& j) {
    if (!j.is_array()) throw std::invalid_argument("matrix must be an array");
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(j.size()))));
    if (n * n != j.size() || n == 0) throw std::invalid_argument("matrix entry count is not a square");
    return matrix_from_json(j, n, n);
}

namespace {

Expr expr_from_json(const ordered_json& j) {
    if (!j.is_string()) throw std::invalid_argument("expressions are strings");
    return Expr::parse(j.get<std::string>());
}

std::vector<std::string> strings_from_json(const ordered_json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw std::invalid_argument("expected an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

const ordered_json& field(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return *it;
}

std::string string_field(const ordered_json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

Predicate predicate_from_json(const ordered_json& j) {
    Predicate p;
    if (j.is_boolean()) {
        p.kind = Predicate::Kind::constant;
        p.value = j.get<bool>();
        return p;
    }
    if (!j.is_object() || j.size() != 1) throw std::invalid_argument("a predicate is a boolean or a one-key object");
    const auto& [key, arg] = *j.items().begin();
    auto pair_args = [&]() {
        if (!arg.is_array() || arg.size() != 2) throw std::invalid_argument("'" + key + "' takes two operands");
        p.args = {expr_from_json(arg[0]), expr_from_json(arg[1])};
    };
    if (key == "eq") {
        p.kind = Predicate::Kind::eq;
        pair_args();
    } else if (key == "ne") {
        p.kind = Predicate::Kind::ne;
        pair_args();
    } else if (key == "prefix") {
        p.kind = Predicate::Kind::prefix;
        pair_args();
    } else if (key == "in") {
        p.kind = Predicate::Kind::in;
        if (!arg.is_array() || arg.size() != 2) throw std::invalid_argument("'in' takes [expr, [labels]]");
        p.args = {expr_from_json(arg[0])};
        p.set = strings_from_json(arg[1]);
    } else if (key == "initial") {
        p.kind = Predicate::Kind::initial;
        p.args = {expr_from_json(arg)};
    } else if (key == "and" || key == "or") {
        p.kind = key == "and" ? Predicate::Kind::all : Predicate::Kind::any;
        if (!arg.is_array()) throw std::invalid_argument("'" + key + "' takes a list");
        for (const auto& c : arg) p.children.push_back(predicate_from_json(c));
    } else if (key == "not") {
        p.kind = Predicate::Kind::negate;
        p.children = {predicate_from_json(arg)};
    } else {
        throw std::invalid_argument("unknown predicate '" + key + "'");
    }
    return p;
}

ordered_json predicate_to_json(const Predicate& p) {
    auto pair = [&](const char* key) { return ordered_json{{key, {p.args[0].str(), p.args[1].str()}}}; };
    switch (p.kind) {
        case Predicate::Kind::constant:
            return p.value;
        case Predicate::Kind::eq:
            return pair("eq");
        case Predicate::Kind::ne:
            return pair("ne");
        case Predicate::Kind::prefix:
            return pair("prefix");
        case Predicate::Kind::in:
            return ordered_json{{"in", {p.args[0].str(), p.set}}};
        case Predicate::Kind::initial:
            return ordered_json{{"initial", p.args[0].str()}};
        case Predicate::Kind::all:
        case Predicate::Kind::any: {
            ordered_json list = ordered_json::array();
            for (const auto& c : p.children) list.push_back(predicate_to_json(c));
            return ordered_json{{p.kind == Predicate::Kind::all ? "and" : "or", list}};
        }
        case Predicate::Kind::negate:
            return ordered_json{{"not", predicate_to_json(p.children[0])}};
    }
    return false;
}

Program program_from_json(const ordered_json& j) {
    if (!j.is_array()) throw std::invalid_argument("a program is a list of instructions");
    Program prog;
    for (const auto& ins : j) {
        if (!ins.is_object()) throw std::invalid_argument("instructions are objects");
        const std::string op = string_field(ins, "op");
        if (op == "unitary") {
            UnitaryOp u;
            u.regs = strings_from_json(field(ins, "regs"));
            u.matrix = square_matrix_from_json(field(ins, "matrix"));
            if (ins.contains("basis")) {
                for (const auto& t : ins["basis"]) {
                    if (t.is_string())
                        u.basis.push_back({t.get<std::string>()});
                    else
                        u.basis.push_back(strings_from_json(t));
                }
            }
            prog.push_back({u});
        } else if (op == "measure") {
            prog.push_back({MeasureOp{string_field(ins, "reg"), string_field(ins, "var")}});
        } else if (op == "prepare") {
            prog.push_back({PrepareOp{string_field(ins, "reg"), expr_from_json(field(ins, "value"))}});
        } else if (op == "copy") {
            prog.push_back({CopyOp{string_field(ins, "from"), string_field(ins, "to")}});
        } else if (op == "swap") {
            auto regs = strings_from_json(field(ins, "regs"));
            if (regs.size() != 2) throw std::invalid_argument("swap takes two registers");
            prog.push_back({SwapOp{regs[0], regs[1]}});
        } else if (op == "sample") {
            SampleOp s;
            s.var = string_field(ins, "var");
            for (const auto& v : field(ins, "values")) {
                if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_number())
                    throw std::invalid_argument("sample values are [label, probability] pairs");
                s.values.emplace_back(v[0].get<std::string>(), v[1].get<double>());
            }
            prog.push_back({s});
        } else if (op == "if") {
            BranchOp b;
            b.cond = predicate_from_json(field(ins, "cond"));
            if (ins.contains("then")) b.then_block = program_from_json(ins["then"]);
            if (ins.contains("else")) b.else_block = program_from_json(ins["else"]);
            prog.push_back({std::move(b)});
        } else {
            throw std::invalid_argument("unknown instruction '" + op + "'");
        }
    }
    return prog;
}

ordered_json program_to_json(const Program& p) {
    ordered_json out = ordered_json::array();
    for (const auto& ins : p) {
        std::visit(
            [&](const auto& op) {
                using T = std::decay_t<decltype(op)>;
                ordered_json j;
                if constexpr (std::is_same_v<T, UnitaryOp>) {
                    j["op"] = "unitary";
                    j["regs"] = op.regs;
                    j["matrix"] = matrix_to_json(op.matrix);
                    if (!op.basis.empty()) j["basis"] = op.basis;
                } else if constexpr (std::is_same_v<T, MeasureOp>) {
                    j = {{"op", "measure"}, {"reg", op.reg}, {"var", op.var}};
                } else if constexpr (std::is_same_v<T, PrepareOp>) {
                    j = {{"op", "prepare"}, {"reg", op.reg}, {"value", op.value.str()}};
                } else if constexpr (std::is_same_v<T, CopyOp>) {
                    j = {{"op", "copy"}, {"from", op.from}, {"to", op.to}};
                } else if constexpr (std::is_same_v<T, SwapOp>) {
                    j = {{"op", "swap"}, {"regs", {op.a, op.b}}};
                } else if constexpr (std::is_same_v<T, SampleOp>) {
                    j["op"] = "sample";
                    j["var"] = op.var;
                    j["values"] = ordered_json::array();
                    for (const auto& [label, p] : op.values) j["values"].push_back({label, p});
                } else {
                    j["op"] = "if";
                    j["cond"] = predicate_to_json(op.cond);
                    j["then"] = program_to_json(op.then_block);
                    j["else"] = program_to_json(op.else_block);
                }
                out.push_back(std::move(j));
            },
            ins.op);
    }
    return out;
}

// ---------------------------------------------------------------- compilation

namespace {

const SpacePtr& role_space(const MachineDef& m, const Role& r) {
    switch (r.kind) {
        case Role::Kind::q:
            if (r.index >= m.qregs.size()) throw ValidationError("no quantum register " + r.str());
            return m.qregs[r.index];
        case Role::Kind::c:
            if (r.index >= m.cregs.size()) throw ValidationError("no classical register " + r.str());
            return m.cregs[r.index];
        case Role::Kind::port:
            if (!m.has_port(r.port)) throw ValidationError("machine " + m.name + " has no port " + r.port.str());
            return m.message_space;
    }
    throw ValidationError("bad register reference");
}

Role resolve(const MachineDef& m, const std::string& ref) {
    Role r;
    try {
        r = Role::parse(ref);
    } catch (const std::invalid_argument& e) {
        throw ValidationError("unresolved register reference '" + ref + "'");
    }
    role_space(m, r);
    return r;
}

struct CInstr;
using CBlock = std::vector<CInstr>;

struct CInstr {
    enum class Kind { unitary, measure, prepare, copy, swap, sample, branch };
    Kind kind = Kind::unitary;
    std::vector<Role> roles;
    SparseOperator op;
    std::string var;
    Expr value;
    SpacePtr space;
    std::vector<std::uint32_t> translate;
    std::vector<std::pair<std::string, double>> values;
    Predicate cond;
    CBlock then_block, else_block;
};

constexpr std::uint32_t kMissing = std::numeric_limits<std::uint32_t>::max();

Eigen::MatrixXcd embed_unitary(const UnitaryOp& u, const std::vector<SpacePtr>& spaces) {
    std::size_t total = 1;
    for (const auto& s : spaces) total *= s->dim();
    if (total > 4096) throw ValidationError("unitary acts on a space of dimension " + std::to_string(total));
    const auto n = static_cast<std::size_t>(u.matrix.rows());
    if (u.matrix.rows() != u.matrix.cols()) throw ValidationError("unitary matrix is not square");
    const Eigen::MatrixXcd check = u.matrix.adjoint() * u.matrix - Eigen::MatrixXcd::Identity(n, n);
    if (check.cwiseAbs().maxCoeff() > tol::kChannel) throw ValidationError("non-unitary matrix in program");
    if (u.basis.empty()) {
        if (n != total)
            throw ValidationError("unitary of size " + std::to_string(n) + " on registers of dimension " +
                                  std::to_string(total));
        return u.matrix;
    }
    if (u.basis.size() != n) throw ValidationError("unitary basis list does not match matrix size");
    std::vector<std::size_t> idx;
    for (const auto& tuple : u.basis) {
        if (tuple.size() != spaces.size()) throw ValidationError("unitary basis tuple has wrong arity");
        std::size_t x = 0;
        for (std::size_t i = 0; i < spaces.size(); ++i) {
            if (!spaces[i]->contains(tuple[i]))
                throw ValidationError("unitary basis label '" + tuple[i] + "' not in " + spaces[i]->describe());
            x = x * spaces[i]->dim() + spaces[i]->index_of(tuple[i]);
        }
        idx.push_back(x);
    }
    if (std::set<std::size_t>(idx.begin(), idx.end()).size() != idx.size())
        throw ValidationError("unitary basis repeats a tuple");
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(total, total);
    for (auto a : idx) full(a, a) = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) full(idx[a], idx[b]) = u.matrix(a, b);
    return full;
}

CBlock compile_block(const Block& block, const MachineDef& m) {
    CBlock out;
    for (const auto& ins : block) {
        CInstr c;
        std::visit(
            [&](const auto& op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, UnitaryOp>) {
                    c.kind = CInstr::Kind::unitary;
                    std::vector<SpacePtr> spaces;
                    for (const auto& r : op.regs) {
                        c.roles.push_back(resolve(m, r));
                        spaces.push_back(role_space(m, c.roles.back()));
                    }
                    if (std::set<Role>(c.roles.begin(), c.roles.end()).size() != c.roles.size())
                        throw ValidationError("unitary names a register twice");
                    c.op = SparseOperator::from_dense(embed_unitary(op, spaces));
                } else if constexpr (std::is_same_v<T, MeasureOp>) {
                    c.kind = CInstr::Kind::measure;
                    c.roles = {resolve(m, op.reg)};
                    c.var = op.var;
                } else if constexpr (std::is_same_v<T, PrepareOp>) {
                    c.kind = CInstr::Kind::prepare;
                    c.roles = {resolve(m, op.reg)};
                    c.space = role_space(m, c.roles[0]);
                    c.value = op.value;
                } else if constexpr (std::is_same_v<T, CopyOp>) {
                    c.kind = CInstr::Kind::copy;
                    c.roles = {resolve(m, op.from), resolve(m, op.to)};
                    if (c.roles[0] == c.roles[1]) throw ValidationError("copy onto itself");
                    const auto& from = role_space(m, c.roles[0]);
                    const auto& to = role_space(m, c.roles[1]);
                    c.space = to;
                    for (const auto& label : from->labels()) c.translate.push_back(to->contains(label) ? to->index_of(label) : kMissing);
                } else if constexpr (std::is_same_v<T, SwapOp>) {
                    c.kind = CInstr::Kind::swap;
                    c.roles = {resolve(m, op.a), resolve(m, op.b)};
                    if (c.roles[0] == c.roles[1]) throw ValidationError("swap of a register with itself");
                    if (!same_basis(role_space(m, c.roles[0]), role_space(m, c.roles[1])))
                        throw ValidationError("swap between registers with different bases");
                } else if constexpr (std::is_same_v<T, SampleOp>) {
                    c.kind = CInstr::Kind::sample;
                    c.var = op.var;
                    c.values = op.values;
                    double total = 0.0;
                    for (const auto& [_, p] : op.values) {
                        if (p < 0.0) throw ValidationError("negative sample probability");
                        total += p;
                    }
                    if (std::abs(total - 1.0) > tol::kNormalization) throw ValidationError("sample probabilities do not sum to 1");
                } else {
                    c.kind = CInstr::Kind::branch;
                    c.cond = op.cond;
                    c.then_block = compile_block(op.then_block, m);
                    c.else_block = compile_block(op.else_block, m);
                }
            },
            ins.op);
        out.push_back(std::move(c));
    }
    return out;
}

class ProgramTransition : public Transition {
public:
    ProgramTransition(CBlock body, std::string owner) : body_(std::move(body)), owner_(std::move(owner)) {}

    Factor apply(const Factor& m, const RegisterSlots& slots) const override {
        Continuation cont{{&body_, 0}};
        return run(std::move(cont), m, {}, slots);
    }

private:
    using Continuation = std::vector<std::pair<const CBlock*, std::size_t>>;

    Factor run(Continuation cont, Factor m, Env env, const RegisterSlots& slots) const {
        while (!cont.empty()) {
            auto& [block, index] = cont.back();
            if (index == block->size()) {
                cont.pop_back();
                continue;
            }
            const CInstr& ins = (*block)[index++];
            switch (ins.kind) {
                case CInstr::Kind::unitary: {
                    std::vector<std::size_t> pos;
                    for (const auto& r : ins.roles) pos.push_back(slots.at(r));
                    m = factor_ops::apply_operators(m, pos, std::span<const SparseOperator>(&ins.op, 1));
                    break;
                }
                case CInstr::Kind::prepare: {
                    const std::string label = ins.value.eval(env);
                    const std::uint32_t idx = ins.space->find(label);
                    if (idx == ins.space->dim()) {
                        if (ins.roles[0].kind == Role::Kind::port)
                            throw RunError(owner_ + " wrote '" + label + "' to " + ins.roles[0].port.str() +
                                           ": message longer than L or outside the alphabet");
                        throw RunError(owner_ + ": label '" + label + "' is not in register " + ins.roles[0].str());
                    }
                    m = factor_ops::reset(m, slots.at(ins.roles[0]), idx);
                    break;
                }
                case CInstr::Kind::copy: {
                    const std::size_t from = slots.at(ins.roles[0]), to = slots.at(ins.roles[1]);
                    m = factor_ops::apply_basis_map(
                        m, [&](const BasisKey& k) { return BasisKey{k[from], k[to]}; },
                        [&](BasisKey& k) {
                            const std::uint32_t x = ins.translate[k[from]];
                            if (x == kMissing)
                                throw RunError(owner_ + ": cannot copy into " + ins.roles[1].str() + ", label missing");
                            k[to] = x;
                        });
                    break;
                }
                case CInstr::Kind::swap: {
                    const std::size_t a = slots.at(ins.roles[0]), b = slots.at(ins.roles[1]);
                    m = factor_ops::apply_basis_map(
                        m, [](const BasisKey&) { return BasisKey{}; }, [&](BasisKey& k) { std::swap(k[a], k[b]); });
                    break;
                }
                case CInstr::Kind::branch:
                    cont.push_back({ins.cond.eval(env) ? &ins.then_block : &ins.else_block, 0});
                    break;
                case CInstr::Kind::measure: {
                    const std::size_t pos = slots.at(ins.roles[0]);
                    const auto& space = m.spaces[pos];
                    std::set<std::uint32_t> seen;
                    for (const auto& [key, _] : m.entries)
                        if (key.first[pos] == key.second[pos]) seen.insert(key.first[pos]);
                    Factor total;
                    total.ids = m.ids;
                    total.spaces = m.spaces;
                    for (auto x : seen) {
                        Env next = env;
                        next[ins.var] = space->label(x);
                        Factor part = run(cont, factor_ops::project(m, pos, [x](std::uint32_t y) { return y == x; }),
                                          std::move(next), slots);
                        factor_ops::accumulate(total, part);
                    }
                    total.prune();
                    return total;
                }
                case CInstr::Kind::sample: {
                    Factor total;
                    total.ids = m.ids;
                    total.spaces = m.spaces;
                    for (const auto& [label, p] : ins.values) {
                        if (p == 0.0) continue;
                        Env next = env;
                        next[ins.var] = label;
                        factor_ops::accumulate(total, run(cont, m, std::move(next), slots), p);
                    }
                    total.prune();
                    return total;
                }
            }
        }
        return m;
    }

    CBlock body_;
    std::string owner_;
};

class KrausTransition : public Transition {
public:
    KrausTransition(std::vector<Role> domain, std::vector<SparseOperator> ops)
        : domain_(std::move(domain)), ops_(std::move(ops)) {}

    Factor apply(const Factor& m, const RegisterSlots& slots) const override {
        std::vector<std::size_t> pos;
        for (const auto& r : domain_) pos.push_back(slots.at(r));
        return factor_ops::apply_operators(m, pos, ops_);
    }

private:
    std::vector<Role> domain_;
    std::vector<SparseOperator> ops_;
};

}  // namespace

std::shared_ptr<const Transition> compile_program(const TransitionSpec& spec, const MachineDef& m) {
    if (const auto* prog = std::get_if<Program>(&spec))
        return std::make_shared<ProgramTransition>(compile_block(*prog, m), m.name);
    const auto& kraus = std::get<KrausSpec>(spec);
    std::vector<Role> domain;
    std::size_t dim = 1;
    for (const auto& ref : kraus.domain) {
        domain.push_back(resolve(m, ref));
        dim *= role_space(m, domain.back())->dim();
    }
    if (std::set<Role>(domain.begin(), domain.end()).size() != domain.size())
        throw ValidationError("Kraus domain names a register twice");
    if (kraus.operators.empty()) throw ValidationError("Kraus channel of " + m.name + " has no operators");
    std::vector<SparseOperator> ops;
    for (const auto& k : kraus.operators) {
        if (static_cast<std::size_t>(k.rows()) != dim || static_cast<std::size_t>(k.cols()) != dim)
            throw ValidationError("Kraus operator of " + m.name + " is " + std::to_string(k.rows()) + "x" +
                                  std::to_string(k.cols()) + ", domain dimension is " + std::to_string(dim));
        ops.push_back(SparseOperator::from_dense(k));
    }
    return std::make_shared<KrausTransition>(std::move(domain), std::move(ops));
}

}  // namespace qrsim
