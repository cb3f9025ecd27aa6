#include "treefuse/synthetic.hpp"

#include <algorithm>

namespace treefuse {

namespace {

constexpr double kSkillFloor = 0.01;
constexpr double kSkillCeil = 0.99;

double clamp_skill(double v) { return std::clamp(v, kSkillFloor, kSkillCeil); }

}  // namespace

SyntheticWorld::SyntheticWorld(SyntheticWorldConfig config) : config_(std::move(config)) {
    for (const SkillOverride& o : config_.skills)
        state_.overrides[{o.model, normalize_name(o.domain)}] = clamp_skill(o.value);
    state_.name_cursors.assign(std::max<std::size_t>(config_.level_names.size(),
                                                     static_cast<std::size_t>(kLeafLevel)),
                               0);
}

double SyntheticWorld::skill(int model, const PathNames& path) const {
    double base = (model == kTargetModel) ? config_.default_target_skill
                                          : config_.default_source_skill;
    for (const std::string* n : {&path.sub, &path.secondary, &path.main}) {
        auto it = state_.overrides.find({model, normalize_name(*n)});
        if (it != state_.overrides.end()) {
            base = it->second;
            break;
        }
    }
    if (model == kTargetModel) {
        auto it = state_.learned.find(normalize_name(path.sub));
        if (it != state_.learned.end()) base += it->second;
    }
    return clamp_skill(base);
}

void SyntheticWorld::train(const QaRecord& record) {
    state_.learned[normalize_name(record.sub)] += config_.eta;
}

void SyntheticWorld::apply_drift(int round) {
    for (const DriftEvent& e : config_.drift)
        if (e.round == round)
            state_.overrides[{e.model, normalize_name(e.domain)}] = clamp_skill(e.value);
}

std::optional<std::string> SyntheticWorld::next_name(int level) {
    std::int64_t& cursor = state_.name_cursors.at(level - 1);
    const std::vector<std::string>* pool = nullptr;
    if (static_cast<std::size_t>(level - 1) < config_.level_names.size())
        pool = &config_.level_names[level - 1];
    if (pool && cursor < static_cast<std::int64_t>(pool->size()))
        return (*pool)[cursor++];
    if (!config_.unbounded_names) return std::nullopt;
    static const char* stems[] = {"field", "area", "topic"};
    return std::string(stems[level - 1]) + "-" + std::to_string(cursor++);
}

std::optional<std::string> SyntheticBackend::propose_domain(
    const std::vector<std::string>& parent_path,
    const KnowledgeTree& tree,
    SplitRng& rng) {
    (void)tree;
    if (!rng.bernoulli(world_->sprout_success_rate())) return std::nullopt;
    return world_->next_name(static_cast<int>(parent_path.size()) + 1);
}

std::string SyntheticBackend::generate_question(const PathNames& path,
                                                QuestionStyle style,
                                                SplitRng& rng) {
    (void)rng;  // deterministic template; embeds the full chain
    return "Question in " + path.main + " / " + path.secondary + " / " + path.sub +
           " (style " + std::to_string(static_cast<int>(style)) + ")";
}

AnswerResult SyntheticBackend::answer(const std::string& question,
                                      const PathNames& path,
                                      SplitRng& rng) {
    (void)question;
    AnswerResult a;
    a.quality = rng.bernoulli(world_->skill(model_id_, path)) ? 1.0 : 0.0;
    a.text = "model " + std::to_string(model_id_) + " answer on " + path.sub;
    return a;
}

std::optional<int> SyntheticBackend::select_best(const std::string& question,
                                                 const std::vector<AnswerResult>& answers,
                                                 SplitRng& rng) {
    (void)question;
    double best = -1.0;
    for (const AnswerResult& a : answers)
        best = std::max(best, a.quality.value_or(0.0));
    std::vector<int> tied;
    for (std::size_t i = 0; i < answers.size(); ++i)
        if (answers[i].quality.value_or(0.0) == best)
            tied.push_back(static_cast<int>(i) + 1);
    return tied[tied.size() == 1 ? 0 : rng.below(tied.size())];
}

SyntheticEnsemble::SyntheticEnsemble(SyntheticWorld& world) {
    const int k = world.num_sources();
    for (int id = 0; id <= k; ++id)
        backends.push_back(std::make_unique<SyntheticBackend>(world, id));
    for (int id = 1; id <= k; ++id) sources.push_back(backends[id].get());
    target = backends[kTargetModel].get();
}

void apply_training(SyntheticWorld& world, std::span<const QaRecord> batch) {
    for (const QaRecord& rec : batch) world.train(rec);
}

}  // namespace treefuse
