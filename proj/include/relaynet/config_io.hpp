#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "relaynet/model.hpp"
#include "relaynet/schedule.hpp"
#include "relaynet/search.hpp"

namespace relaynet {

using nlohmann::json;

// Configs are versioned and fail-closed: any key outside the documented
// schema is rejected so a typo cannot silently change a run.
inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

json instance_to_json(const NetworkSpec& net, const RelayAssignment& a, const InputSpec& input);

NetworkSpec network_from_json(const json& j, const std::string& path = "network");
RelayAssignment assignment_from_json(const json& j, const std::string& path = "assignment");
InputSpec input_from_json(const json& j, const std::string& path = "input");

struct ScheduleConfig {
    ScheduleVariant variant = ScheduleVariant::BlockByBlock;
    int Mcount = 1;
    long B = 2;
    long L = 1;
    long cap = kDefaultBlockCap;
    struct Corrupt {
        int level = 2;
        int eventIndex = 0;
        long shiftBlocks = 0;
    };
    std::optional<Corrupt> corrupt;  // replay a hand-corrupted schedule
};

struct EquivConfig {
    int discreteInstances = 100;
    int gaussianInstances = 50;
    int maxRelaysDiscrete = 3;
    int maxRelaysGaussian = 4;
    uint64_t seed = 1;
    double tol = 1e-9;
    std::optional<json> replayInstance;
};

struct OracleConfig {
    int pmfTrials = 1000;
    int quantBins = 96;
    int quantTrials = 8;
    uint64_t seed = 1;
    double chainTol = 1e-8;
    double quantTol = 0.05;
};

struct LoadedConfig {
    json raw;
    std::optional<NetworkSpec> network;
    std::optional<RelayAssignment> assignment;
    std::optional<InputSpec> input;
    std::optional<ScheduleConfig> schedule;
    std::optional<EquivConfig> equiv;
    std::optional<OracleConfig> oracle;
    std::optional<SearchConfig> search;
    std::optional<uint64_t> seed;
    std::optional<double> tol;
};

// Parses and validates the whole file against the schema; throws
// ConfigError with a dotted path on any violation.
LoadedConfig load_config_file(const std::string& path);
LoadedConfig load_config_json(const json& j);

}  // namespace relaynet
