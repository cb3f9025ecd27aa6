#include "treefuse/oracle.hpp"

#include <algorithm>
#include <map>

namespace treefuse {

std::optional<std::string> sprout(const KnowledgeTree& tree,
                                  DomainId parent,
                                  std::span<ModelBackend* const> sources,
                                  SplitRng& rng) {
    std::vector<std::string> parent_path = tree.path_names(parent);

    // Count surviving proposals by normalized name, keeping the first
    // spelling seen; map keeps tie enumeration order deterministic.
    std::map<std::string, std::pair<std::string, int>> votes;
    for (ModelBackend* source : sources) {
        std::optional<std::string> name = source->propose_domain(parent_path, tree, rng);
        if (!name) continue;
        std::string key = normalize_name(*name);
        if (key.empty() || tree.contains_name(*name)) continue;
        auto [it, fresh] = votes.try_emplace(key, *name, 0);
        ++it->second.second;
    }
    if (votes.empty()) return std::nullopt;

    int top = 0;
    for (const auto& [key, v] : votes) top = std::max(top, v.second);
    std::vector<const std::string*> tied;
    for (const auto& [key, v] : votes)
        if (v.second == top) tied.push_back(&v.first);
    return *tied[tied.size() == 1 ? 0 : rng.below(tied.size())];
}

int reward_from_best_index(int best_index, int num_sources) {
    if (best_index < 1 || best_index > num_sources + 1)
        throw OutOfRange("best_index " + std::to_string(best_index) +
                         " not in [1, " + std::to_string(num_sources + 1) + "]");
    return best_index <= num_sources ? 1 : 0;
}

QaRecord harvest(const KnowledgeTree& tree,
                 const Path& path,
                 std::span<ModelBackend* const> sources,
                 ModelBackend& target,
                 SplitRng& rng) {
    const int k = static_cast<int>(sources.size());
    DomainId leaf = path.nodes.back();
    std::vector<std::string> names = tree.path_names(leaf);
    PathNames p{names.at(0), names.at(1), names.at(2)};

    const int leader = 1 + static_cast<int>(rng.below(k));
    const QuestionStyle style =
        static_cast<QuestionStyle>(1 + static_cast<int>(rng.below(kNumStyles)));

    std::string question;
    for (int attempt = 0;; ++attempt) {
        try {
            question = sources[leader - 1]->generate_question(p, style, rng);
            break;
        } catch (const Error& e) {
            if (attempt >= 1)
                throw QuestionGenFailed("leader " + std::to_string(leader) +
                                        " produced no question (" + e.code() + ")");
        }
    }

    // K source answers in id order, then the target at index K+1.
    std::vector<AnswerResult> answers;
    for (ModelBackend* source : sources)
        answers.push_back(source->answer(question, p, rng));
    answers.push_back(target.answer(question, p, rng));

    std::optional<int> best;
    for (int attempt = 0; attempt < 2 && !best; ++attempt) {
        best = sources[leader - 1]->select_best(question, answers, rng);
        if (best && (*best < 1 || *best > k + 1)) best.reset();  // out of bounds = unusable
    }
    if (!best)
        throw JudgeParseFailed("leader " + std::to_string(leader) +
                               " returned no usable verdict");

    QaRecord rec;
    rec.leaf = leaf;
    rec.main = p.main;
    rec.secondary = p.secondary;
    rec.sub = p.sub;
    rec.style = style;
    rec.question = question;
    rec.answer = answers.at(*best - 1).text;
    rec.leader_id = leader;
    rec.best_index = *best;
    rec.reward = reward_from_best_index(*best, k);
    return rec;
}

}  // namespace treefuse
