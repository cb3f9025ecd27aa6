#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treefuse/knowledge_tree.hpp"
#include "treefuse/rng.hpp"

namespace treefuse {

// Beta-Bernoulli posterior for one arm, plus the bookkeeping the
// inspiration-rejuvenation test needs: a sliding window of the last
// `window capacity` rewards and success/count totals over the current
// epoch (an epoch restarts when the posterior is reset).
//
// unk arms never receive rewards through the window path, so their window
// stays empty and their history counters stay zero.
struct ArmPosterior {
    double alpha = 1.0;  // Beta(1,1) prior: uniform over the success rate
    double beta = 1.0;
    bool deactivated = false;
    std::int64_t history_successes = 0;
    std::int64_t history_count = 0;
    std::deque<std::uint8_t> window;

    double mean() const { return alpha / (alpha + beta); }
};

// One posterior per domain id (dense; ids are small and contiguous).
// The root slot exists but is never an arm.
class PosteriorTable {
public:
    explicit PosteriorTable(int window_capacity = 20)
        : window_capacity_(window_capacity) {}

    int window_capacity() const { return window_capacity_; }

    // Grow to cover ids < n with fresh Beta(1,1) entries.
    void ensure_size(std::size_t n) {
        if (arms_.size() < n) arms_.resize(n);
    }

    ArmPosterior& arm(DomainId id) { return arms_.at(id); }
    const ArmPosterior& arm(DomainId id) const { return arms_.at(id); }
    std::size_t size() const { return arms_.size(); }

    // Reward commit: conjugate update + window push + epoch counters.
    // Throws DeactivatedArm; unk arms keep no window or history, their
    // alpha/beta moves are applied directly by the batch commit.
    void update_posterior(DomainId id, int reward, bool is_unk_arm = false);

    void deactivate_arm(DomainId id);

private:
    std::vector<ArmPosterior> arms_;
    int window_capacity_;
};

struct ArmView {
    DomainId id;
    double alpha;
    double beta;
    bool deactivated;
};

// Thompson draw: one Beta sample per non-deactivated arm, argmax wins,
// ties resolved toward the earliest-listed arm. Throws AllDeactivated.
DomainId sample_arm(std::span<const ArmView> arms, SplitRng& rng);

enum class PathStatus { Valid, Invalid };

struct UnkDelta {
    DomainId arm;
    double d_alpha = 0.0;
    double d_beta = 0.0;
};

struct SproutedDomain {
    DomainId parent;
    DomainId id;
    std::string name;
};

// Everything one meditation path draw produced. Posterior effects are only
// recorded here; commit_batch applies them in the serialized phase.
struct PathSampleResult {
    Path path;                       // partial when Invalid
    PathStatus status = PathStatus::Valid;
    std::vector<UnkDelta> unk_updates;
    std::vector<SproutedDomain> sprouted;
    std::optional<DomainId> deactivate;  // set iff status == Invalid
    int sprout_failures = 0;
};

// Proposes a name for a new child of `parent`, or nothing on failure.
using SproutFn = std::function<std::optional<std::string>(DomainId parent)>;

inline constexpr int kSproutFailBudget = 10;

// One top-down meditation draw per Algorithm description: Thompson-sample
// each level; a non-unk win descends, an unk win attempts a sprout. Sprout
// success appends the new domain (visible in `tree` immediately) and counts
// alpha on the unk; failure counts beta and re-samples the same level. Ten
// failures abort the path: it is Invalid and the most recently appended
// non-root arm (the root's unk if none) is marked for deactivation.
//
// Reads posteriors from `snapshot` (state at batch start) overlaid with this
// path's own unk deltas; arms created during the batch fall back to the
// Beta(1,1) prior. Mutates only the tree (sprouts) and `live`'s size.
PathSampleResult sample_path_meditation(KnowledgeTree& tree,
                                        PosteriorTable& live,
                                        const PosteriorTable& snapshot,
                                        const SproutFn& sprout,
                                        SplitRng& rng);

// Thompson draw over non-unk, non-deactivated arms that still lead to at
// least one complete chain; no posterior or tree mutation. Throws
// NoCompleteChain when the root has no such arm.
Path sample_path_enlightenment(const KnowledgeTree& tree,
                               const PosteriorTable& table,
                               SplitRng& rng);

// Serialized commit for one batch: per result (in order) apply unk deltas
// then any deactivation; then pop one reward per Valid result (in order)
// into its three non-root arms. Arms already deactivated are left frozen.
// Throws LengthMismatch when rewards and Valid results disagree.
void commit_batch(KnowledgeTree& tree,
                  PosteriorTable& table,
                  std::span<const PathSampleResult> results,
                  std::span<const int> rewards);

}  // namespace treefuse
