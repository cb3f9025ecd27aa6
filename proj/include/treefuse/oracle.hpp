#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treefuse/knowledge_tree.hpp"
#include "treefuse/records.hpp"
#include "treefuse/rng.hpp"

namespace treefuse {

struct AnswerResult {
    std::string text;
    // Latent quality attached by the synthetic world (a Bernoulli(skill)
    // draw); live endpoints leave it unset and judging goes through text.
    std::optional<double> quality;
};

// What the protocol needs from a model, synthetic or live. Callers pass in
// the randomness stream; deterministic backends are free to ignore it.
// Implementations must be safe to call concurrently across harvests.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;

    // Propose one fresh child-domain name for the node whose level-1..k
    // ancestor names are `parent_path` (empty at the root). Failure —
    // transport trouble, refusal, nothing left to propose — is `nullopt`
    // and counts as a dropped proposal.
    virtual std::optional<std::string> propose_domain(
        const std::vector<std::string>& parent_path,
        const KnowledgeTree& tree,
        SplitRng& rng) = 0;

    // One question for the complete chain, honoring the style directive.
    virtual std::string generate_question(const PathNames& path,
                                          QuestionStyle style,
                                          SplitRng& rng) = 0;

    virtual AnswerResult answer(const std::string& question,
                                const PathNames& path,
                                SplitRng& rng) = 0;

    // 1-based index of the best answer, or nullopt when the verdict can't
    // be parsed. Must stay within bounds.
    virtual std::optional<int> select_best(const std::string& question,
                                           const std::vector<AnswerResult>& answers,
                                           SplitRng& rng) = 0;
};

// Proposal-and-election: every source proposes a child name for `parent`;
// failures and names already in the tree (trim/case-insensitive) drop out;
// the most frequent surviving name wins, frequency ties (including the
// all-distinct case) decided uniformly by `rng`. Nothing surviving is a
// sprout failure (nullopt).
std::optional<std::string> sprout(const KnowledgeTree& tree,
                                  DomainId parent,
                                  std::span<ModelBackend* const> sources,
                                  SplitRng& rng);

// reward = 1 iff the judged-best answer came from a source (index <= K).
int reward_from_best_index(int best_index, int num_sources);

// One inquiry/response/judging cycle for a complete path: a uniformly drawn
// leader asks one styled question, all K sources answer (id order), the
// target answers last, and the leader picks the best. Question generation
// and judging each get one retry; persistent failure throws
// QuestionGenFailed / JudgeParseFailed and the caller discards the sample.
// `round` and `seq` are left for the caller to fill.
QaRecord harvest(const KnowledgeTree& tree,
                 const Path& path,
                 std::span<ModelBackend* const> sources,
                 ModelBackend& target,
                 SplitRng& rng);

}  // namespace treefuse
