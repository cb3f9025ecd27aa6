#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "treefuse/checkpoint.hpp"
#include "treefuse/llm_client.hpp"
#include "treefuse/oracle.hpp"
#include "treefuse/synthetic.hpp"

namespace treefuse {

// What run() hands back: every round's metrics plus the final shape of the
// run. The dataset location is the configured file name, relative to the
// output directory, so reports from runs in different directories compare
// byte for byte.
struct FusionReport {
    std::vector<RoundReport> rounds;
    std::array<int, 3> level_counts{0, 0, 0};
    std::string posterior_digest;
    std::string dataset_file;
    std::int64_t dataset_records = 0;
};

// Full report document: per-round metrics, final tree and posteriors,
// dataset location.
nlohmann::json fusion_report_to_json(const FusionReport& report, const RunState& state);

// Writes every pooled record as one JSON line, ordered by round then
// insertion. Returns the line count; throws Io.
std::int64_t export_dataset(const std::map<DomainId, std::vector<QaRecord>>& pools,
                            const std::string& path);

// Owns all mutable run state and drives the alternating
// meditation/enlightenment rounds. Construction wires backends from the
// config (a shared synthetic world, or one chat client per endpoint);
// tests may swap in scripted backends via set_backends.
class Orchestrator {
public:
    explicit Orchestrator(Config config);
    Orchestrator(Config config, RunState resumed);  // config supplies outputs only

    // Non-owning; sources are model ids 1..K in order, target answers last.
    void set_backends(std::vector<ModelBackend*> sources, ModelBackend* target);

    const RunState& state() const { return state_; }
    RunState& state() { return state_; }
    SyntheticWorld* world() { return world_.get(); }

    // One meditation phase: drift, B snapshot-sampled paths, parallel
    // harvests, serialized commit, IR sweep. Enlightenment fields of the
    // returned report are zero; the caller runs the enlightenment phase.
    RoundReport meditation_round(int round);

    // One enlightenment phase: M posterior-pure draws, one pooled record
    // each (leaf pools, uniform, duplicates allowed; empty pools redraw up
    // to 10 times then skip). Synthetic mode trains the world; live mode
    // exports the batch and fires the trainer hook. Fills the report's
    // enlightenment fields. Throws NoCompleteChain when the tree has no
    // complete chain at all.
    std::vector<QaRecord> enlightenment_round(int round, RoundReport& report);

    // Remaining rounds end to end; writes metrics/dataset/report/checkpoints
    // under the output directory.
    FusionReport run();

    std::int64_t export_dataset(const std::string& path) const {
        return treefuse::export_dataset(state_.pools, path);
    }

private:
    Config config_;
    RunState state_;
    std::unique_ptr<SyntheticWorld> world_;
    std::unique_ptr<SyntheticEnsemble> ensemble_;
    std::vector<std::unique_ptr<LiveBackend>> live_backends_;
    std::vector<ModelBackend*> sources_;
    ModelBackend* target_ = nullptr;

    void wire_backends(bool resumed);
    void write_metrics() const;
    void fire_trainer_hook(const std::vector<QaRecord>& batch, int round) const;
};

}  // namespace treefuse
