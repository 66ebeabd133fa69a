#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qrsim {

// A single violated rule. `clause` names the rule, `detail` says what broke it.
struct Violation {
    std::string clause;
    std::string detail;
};

class Report {
public:
    void add(std::string clause, std::string detail);
    void merge(const Report& other, const std::string& prefix = "");

    bool ok() const { return violations_.empty(); }
    const std::vector<Violation>& violations() const { return violations_; }
    bool mentions(const std::string& clause) const;
    std::string str() const;

private:
    std::vector<Violation> violations_;
};

// Base for errors that come from the model rather than from API misuse.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Something was rejected before execution: a malformed machine, collection,
// configuration or document.
class ValidationError : public ModelError {
public:
    explicit ValidationError(const std::string& what) : ModelError(what) {}
    explicit ValidationError(Report report);
    const Report& report() const { return report_; }

private:
    Report report_;
};

// A run hit a model-level failure: queue overflow, an over-long message, or a
// transition that lost trace.
class RunError : public ModelError {
public:
    using ModelError::ModelError;
};

}  // namespace qrsim
