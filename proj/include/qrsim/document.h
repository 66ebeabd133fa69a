#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrsim/machine.h"
#include "qrsim/network.h"
#include "qrsim/runner.h"
#include "qrsim/security.h"

namespace qrsim {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// Reading or writing a file failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StructureEntry {
    std::vector<std::string> machines;
    std::set<Port> service;
};

struct ConfigurationEntry {
    std::string structure;
    std::string user;
    std::string adversary;
};

struct WitnessEntry {
    std::string user;
    std::string adversary;
    std::string simulator;
};

struct ClaimEntry {
    std::string real;
    std::string ideal;
    SecurityMode mode = SecurityMode::perfect;
    SecurityFlavor flavor = SecurityFlavor::standard;
    std::vector<WitnessEntry> witnesses;
    std::map<int, double> bounds;
};

// A network description file. Sections keep their file order.
struct NetworkDocument {
    Alphabet alphabet;
    std::size_t queue_cap = kDefaultQueueCap;
    std::vector<MachinePtr> machines;
    std::vector<std::pair<std::string, std::vector<std::string>>> collections;
    std::vector<std::pair<std::string, StructureEntry>> structures;
    std::vector<std::pair<std::string, ConfigurationEntry>> configurations;
    std::vector<std::pair<std::string, ClaimEntry>> claims;

    MachinePtr machine(const std::string& name) const;
    Collection collection(const std::string& name) const;
    Structure structure(const std::string& name) const;
    Configuration configuration(const std::string& name) const;
    SecurityClaim claim(const std::string& name) const;
};

// Parse errors and unresolved references throw ValidationError.
NetworkDocument parse_document(const Json& j);
Json document_to_json(const NetworkDocument& doc);

MachinePtr machine_from_json(const Json& j, const SpacePtr& message_space,
                             const std::map<std::string, std::vector<std::string>>& spaces = {});
Json machine_to_json(const MachineDef& m);

// Runs every validator on the document's contents.
Report validate_document(const NetworkDocument& doc, const std::set<int>& ks = {1});

Json run_to_json(const RunResult& r, const std::string& collection);
// Trace distribution stored in a run document.
Distribution<Trace> traces_from_json(const Json& j);
Json view_to_json(const Distribution<View>& v, const std::string& machine);
Json verdict_to_json(const ClaimResult& r, const SecurityClaim& claim, const std::set<int>& ks);

Json trace_record_to_json(const TraceRecord& r);
TraceRecord trace_record_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
std::string dump(const Json& j);

}  // namespace qrsim
