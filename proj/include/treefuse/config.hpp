#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "treefuse/llm_client.hpp"
#include "treefuse/synthetic.hpp"

namespace treefuse {

enum class RunMode { Synthetic, Live };

struct TrainerHook {
    std::string command;  // run with the batch path substituted for {batch}
    std::string url;      // or POST {"batch_path": ...} here
};

// Everything that determines how a run evolves. Output locations live in
// OutputConfig so that redirecting files never perturbs a seeded run.
struct RunConfig {
    int rounds = 10;              // R
    int meditation_batch = 10;    // B paths per meditation round
    int enlightenment_batch = 20; // M draws per enlightenment round
    int window_width = 20;        // w
    double quantile_u = 0.2;      // u
    std::uint64_t seed = 0;
    RunMode mode = RunMode::Synthetic;
    int harvest_parallelism = 1;
    SyntheticWorldConfig synthetic;
    std::vector<EndpointConfig> sources;  // live mode
    EndpointConfig target;                // live mode
    TrainerHook trainer;

    int num_sources() const {
        return mode == RunMode::Synthetic ? synthetic.num_sources
                                          : static_cast<int>(sources.size());
    }
};

struct OutputConfig {
    std::string out_dir = "out";
    std::string dataset_file = "dataset.jsonl";
    std::string metrics_file = "metrics.jsonl";
    std::string report_file = "report.json";
    int checkpoint_every = 1;  // rounds between checkpoints; 0 = final only
};

struct Config {
    RunConfig run;
    OutputConfig output;
};

// Throws ConfigInvalid naming the offending field.
void validate(const Config& config);

// Non-fatal observations (e.g. a judging index that can't fit one digit).
std::vector<std::string> config_warnings(const Config& config);

Config config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const Config& config);
nlohmann::json run_config_to_json(const RunConfig& config);

// Reads and parses a config document. Throws Io / ConfigInvalid.
Config load_config_file(const std::string& path);

}  // namespace treefuse
