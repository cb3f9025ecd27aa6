#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "treefuse/bandit.hpp"
#include "treefuse/change_detection.hpp"
#include "treefuse/config.hpp"
#include "treefuse/knowledge_tree.hpp"
#include "treefuse/records.hpp"
#include "treefuse/synthetic.hpp"

namespace treefuse {

// One executed sliding-window test, kept so the metrics stream can be
// rebuilt verbatim from a checkpoint.
struct IrTest {
    DomainId arm = 0;
    SwblrtResult result;
};

// Per-round summary, emitted to the metrics stream and retained in the
// checkpoint so a resumed run reproduces its outputs byte for byte.
struct RoundReport {
    int round = 0;            // 1-based
    int paths_sampled = 0;    // == B
    int paths_valid = 0;      // valid at sampling time; valid + invalid = B
    int paths_invalid = 0;
    int sprouts_ok = 0;
    int sprouts_failed = 0;
    int deactivations = 0;
    int discarded_harvests = 0;  // valid paths dropped by backend failures
    int rewards_committed = 0;   // == paths_valid - discarded_harvests
    double mean_reward = 0.0;    // sum(rewards) / rewards_committed; 0 if none
    int ir_resets = 0;
    std::array<int, 3> level_counts{0, 0, 0};
    // Share of this round's valid paths passing through each level-1
    // domain, keyed by name (sorted; the raw material for balance plots).
    std::map<std::string, double> level1_shares;
    std::string posterior_digest;  // after commits + IR sweep
    std::vector<IrTest> ir_tests;  // arms actually tested this round
    int enlightenment_records = 0;
    int enlightenment_skipped = 0;  // draws abandoned after the retry budget
};

// Everything a run needs to continue: checkpoints are a digest-protected
// serialization of this. Output routing is deliberately absent so that
// re-pointing files cannot perturb a seeded run.
struct RunState {
    RunConfig config;
    KnowledgeTree tree;
    PosteriorTable posteriors;
    std::map<DomainId, std::vector<QaRecord>> pools;  // leaf id -> records
    SyntheticWorld::State world;
    std::vector<RoundReport> reports;
    int completed_rounds = 0;
    std::int64_t next_seq = 0;  // next QaRecord insertion stamp
};

nlohmann::json record_to_json(const QaRecord& record);
QaRecord record_from_json(const nlohmann::json& doc);

nlohmann::json report_to_json(const RoundReport& report);
RoundReport report_from_json(const nlohmann::json& doc);

// Dataset-export form: the ten public fields, no internal ids.
nlohmann::json export_record_to_json(const QaRecord& record);

// Metrics-stream line for one tested arm in an IR sweep.
nlohmann::json ir_test_to_json(int round, const IrTest& test);

nlohmann::json tree_to_json(const KnowledgeTree& tree);
nlohmann::json posteriors_to_json(const PosteriorTable& table);

nlohmann::json state_to_json(const RunState& state);
RunState state_from_json(const nlohmann::json& doc);

// Atomic write of {format, digest, state}; digest covers the canonical
// serialization of the state object alone.
void save_checkpoint(const RunState& state, const std::string& path);

// Throws Io when unreadable, CorruptCheckpoint on parse/digest/shape
// trouble.
RunState load_checkpoint(const std::string& path);

}  // namespace treefuse
