#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qrsim {

using Env = std::map<std::string, std::string>;

// Label expression. Grammar:
//   expr := '$' ident | ident '(' [expr (',' expr)*] ')' | "'" chars "'" | word
// Functions: concat(a, b, ...), xor(a, b), len(a), take(a, n), drop(a, n).
// xor combines a with the first |a| symbols of b; len gives |a| in binary.
struct Expr {
    enum class Kind { literal, variable, call };
    Kind kind = Kind::literal;
    std::string text;
    std::vector<Expr> args;

    static Expr parse(std::string_view source);
    static Expr literal(std::string value);
    std::string str() const;
    std::string eval(const Env& env) const;

    friend bool operator==(const Expr&, const Expr&) = default;
};

struct Predicate {
    enum class Kind { constant, eq, ne, in, prefix, initial, all, any, negate };
    Kind kind = Kind::constant;
    bool value = true;
    std::vector<Expr> args;
    std::vector<std::string> set;
    std::vector<Predicate> children;

    bool eval(const Env& env) const;

    friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct Instruction;
using Block = std::vector<Instruction>;

// Unitary on the listed registers. With `basis` given it acts on the span of
// those basis tuples and as the identity on the orthogonal complement.
struct UnitaryOp {
    std::vector<std::string> regs;
    Eigen::MatrixXcd matrix;
    std::vector<std::vector<std::string>> basis;

    friend bool operator==(const UnitaryOp& a, const UnitaryOp& b) {
        return a.regs == b.regs && a.basis == b.basis && a.matrix.rows() == b.matrix.rows() &&
               a.matrix.cols() == b.matrix.cols() && a.matrix == b.matrix;
    }
};
struct MeasureOp {
    std::string reg;
    std::string var;
    friend bool operator==(const MeasureOp&, const MeasureOp&) = default;
};
struct PrepareOp {
    std::string reg;
    Expr value;
    friend bool operator==(const PrepareOp&, const PrepareOp&) = default;
};
// Measures `from` and writes its label into `to`.
struct CopyOp {
    std::string from;
    std::string to;
    friend bool operator==(const CopyOp&, const CopyOp&) = default;
};
struct SwapOp {
    std::string a;
    std::string b;
    friend bool operator==(const SwapOp&, const SwapOp&) = default;
};
// Classical randomness: continues with each value bound to `var`, mixed with
// the given probabilities.
struct SampleOp {
    std::string var;
    std::vector<std::pair<std::string, double>> values;
    friend bool operator==(const SampleOp&, const SampleOp&) = default;
};
struct BranchOp {
    Predicate cond;
    Block then_block;
    Block else_block;
    friend bool operator==(const BranchOp&, const BranchOp&) = default;
};

struct Instruction {
    std::variant<UnitaryOp, MeasureOp, PrepareOp, CopyOp, SwapOp, SampleOp, BranchOp> op;
    friend bool operator==(const Instruction&, const Instruction&) = default;
};

using Program = Block;

// Natural numbers on clock ports are binary words without leading zeros.
std::optional<std::size_t> parse_natural(std::string_view word);
std::string format_natural(std::size_t n);
bool is_initial_label(std::string_view label);
std::string ones(int k);

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const nlohmann::ordered_json& j, std::size_t rows, std::size_t cols);
Eigen::MatrixXcd square_matrix_from_json(const nlohmann::ordered_json& j);

Predicate predicate_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json predicate_to_json(const Predicate& p);
Program program_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json program_to_json(const Program& p);

}  // namespace qrsim
