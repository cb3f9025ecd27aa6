#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treefuse/oracle.hpp"

namespace treefuse {

inline constexpr int kTargetModel = 0;  // sources are 1..K

struct SkillOverride {
    int model = kTargetModel;
    std::string domain;  // matched against any name on the path, leaf first
    double value = 0.5;
};

struct DriftEvent {
    int round = 0;  // applied before this round's meditation
    int model = kTargetModel;
    std::string domain;
    double value = 0.5;
};

struct SyntheticWorldConfig {
    int num_sources = 3;
    double sprout_success_rate = 0.9;
    double eta = 0.01;                 // per-record skill gain for the target
    double default_target_skill = 0.3;
    double default_source_skill = 0.6;
    std::vector<SkillOverride> skills;
    std::vector<DriftEvent> drift;
    // Per-level name pools (index 0 = level 1). A level with an exhausted
    // pool stops proposing unless `unbounded_names` lets it mint
    // "<level-stem>-N" names forever.
    std::vector<std::vector<std::string>> level_names;
    bool unbounded_names = true;
};

// Ground truth for simulation: per-(model, domain) success skills, a
// deterministic name stream, drift, and the training response. Skills live
// in [0.01, 0.99] no matter what drift or training does to them.
class SyntheticWorld {
public:
    explicit SyntheticWorld(SyntheticWorldConfig config);

    const SyntheticWorldConfig& config() const { return config_; }

    // Effective skill of `model` answering in the leaf of `path`: nearest
    // named override walking sub -> secondary -> main, else the model's
    // default; the target additionally carries its learned per-leaf delta.
    double skill(int model, const PathNames& path) const;

    // skill(target, record's sub-domain) += eta (clamped).
    void train(const QaRecord& record);

    // Apply every drift event scheduled for `round`.
    void apply_drift(int round);

    // Next fresh name for a child at `level` (1-based), or nullopt when the
    // pool is exhausted and minting is off.
    std::optional<std::string> next_name(int level);

    double sprout_success_rate() const { return config_.sprout_success_rate; }
    int num_sources() const { return config_.num_sources; }

    // Mutable state, exposed for checkpointing.
    struct State {
        std::map<std::pair<int, std::string>, double> overrides;
        std::map<std::string, double> learned;  // leaf name -> target delta
        std::vector<std::int64_t> name_cursors;
    };
    const State& state() const { return state_; }
    void restore(State state) { state_ = std::move(state); }

private:
    SyntheticWorldConfig config_;
    State state_;
};

// One synthetic participant. Proposals draw names from the shared world
// stream with the world's success rate; answers carry a Bernoulli(skill)
// latent quality; judging picks the argmax quality with uniform ties.
class SyntheticBackend : public ModelBackend {
public:
    SyntheticBackend(SyntheticWorld& world, int model_id)
        : world_(&world), model_id_(model_id) {}

    std::optional<std::string> propose_domain(const std::vector<std::string>& parent_path,
                                              const KnowledgeTree& tree,
                                              SplitRng& rng) override;
    std::string generate_question(const PathNames& path,
                                  QuestionStyle style,
                                  SplitRng& rng) override;
    AnswerResult answer(const std::string& question,
                        const PathNames& path,
                        SplitRng& rng) override;
    std::optional<int> select_best(const std::string& question,
                                   const std::vector<AnswerResult>& answers,
                                   SplitRng& rng) override;

private:
    SyntheticWorld* world_;
    int model_id_;
};

// Backend set for a whole synthetic ensemble: K sources + target.
struct SyntheticEnsemble {
    explicit SyntheticEnsemble(SyntheticWorld& world);
    std::vector<std::unique_ptr<SyntheticBackend>> backends;  // [0]=target, 1..K sources
    std::vector<ModelBackend*> sources;                       // views into backends
    ModelBackend* target;
};

// Post-enlightenment training response, one skill bump per record.
void apply_training(SyntheticWorld& world, std::span<const QaRecord> batch);

}  // namespace treefuse
