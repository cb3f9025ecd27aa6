#include "treefuse/bandit.hpp"

#include <unordered_map>

namespace treefuse {

void PosteriorTable::update_posterior(DomainId id, int reward, bool is_unk_arm) {
    ArmPosterior& a = arm(id);
    if (a.deactivated) throw DeactivatedArm("arm " + std::to_string(id) + " is deactivated");
    a.alpha += reward;
    a.beta += 1 - reward;
    if (is_unk_arm) return;
    a.window.push_back(static_cast<std::uint8_t>(reward));
    if (static_cast<int>(a.window.size()) > window_capacity_) a.window.pop_front();
    a.history_successes += reward;
    a.history_count += 1;
}

void PosteriorTable::deactivate_arm(DomainId id) {
    arm(id).deactivated = true;
}

DomainId sample_arm(std::span<const ArmView> arms, SplitRng& rng) {
    bool any = false;
    DomainId best = 0;
    double best_draw = -1.0;
    for (const ArmView& a : arms) {
        if (a.deactivated) continue;
        double draw = rng.beta(a.alpha, a.beta);
        if (!any || draw > best_draw) {  // strict: ties keep the earliest arm
            any = true;
            best = a.id;
            best_draw = draw;
        }
    }
    if (!any) throw AllDeactivated("no selectable arm");
    return best;
}

namespace {

// Posterior view for path sampling: snapshot state, Beta(1,1) for arms born
// after the snapshot, plus this path's own unk deltas.
struct OverlayView {
    const PosteriorTable& snapshot;
    std::unordered_map<DomainId, std::pair<double, double>> deltas;  // arm -> (dα, dβ)

    ArmView view(DomainId id) const {
        double alpha = 1.0, beta = 1.0;
        bool deactivated = false;
        if (id < snapshot.size()) {
            const ArmPosterior& a = snapshot.arm(id);
            alpha = a.alpha;
            beta = a.beta;
            deactivated = a.deactivated;
        }
        if (auto it = deltas.find(id); it != deltas.end()) {
            alpha += it->second.first;
            beta += it->second.second;
        }
        return {id, alpha, beta, deactivated};
    }
};

}  // namespace

PathSampleResult sample_path_meditation(KnowledgeTree& tree,
                                        PosteriorTable& live,
                                        const PosteriorTable& snapshot,
                                        const SproutFn& sprout,
                                        SplitRng& rng) {
    PathSampleResult result;
    result.path.nodes.push_back(kRootId);
    OverlayView overlay{snapshot, {}};
    auto bump = [&](DomainId arm, double da, double db) {
        auto& d = overlay.deltas[arm];
        d.first += da;
        d.second += db;
        for (UnkDelta& u : result.unk_updates) {
            if (u.arm == arm) {
                u.d_alpha += da;
                u.d_beta += db;
                return;
            }
        }
        result.unk_updates.push_back({arm, da, db});
    };

    DomainId node = kRootId;
    int fails = 0;
    while (tree.domain(node).level < kLeafLevel && fails < kSproutFailBudget) {
        std::vector<ArmView> arms;
        for (DomainId c : tree.children(node)) arms.push_back(overlay.view(c));
        DomainId picked = sample_arm(arms, rng);

        if (!tree.domain(picked).is_unk) {
            result.path.nodes.push_back(picked);
            node = picked;
            continue;
        }

        std::optional<std::string> name = sprout(node);
        if (name) {
            DomainId child = tree.add_domain(node, *name);
            live.ensure_size(tree.size());
            result.sprouted.push_back({node, child, *name});
            bump(picked, 1.0, 0.0);
            result.path.nodes.push_back(child);
            node = child;
        } else {
            bump(picked, 0.0, 1.0);
            ++fails;
        }
    }

    result.sprout_failures = fails;
    if (fails >= kSproutFailBudget) {
        result.status = PathStatus::Invalid;
        // Deactivate the most recently appended non-root arm; with nothing
        // appended the run of failures happened at level 1, so the root's
        // own expansion arm is the one that is exhausted.
        if (result.path.nodes.size() > 1)
            result.deactivate = result.path.nodes.back();
        else
            result.deactivate = tree.unk_child_of(kRootId);
    } else {
        result.status = PathStatus::Valid;
        result.path.valid = true;
    }
    return result;
}

namespace {

// An arm can carry an enlightenment draw only if some complete non-unk
// chain runs through it and no deactivated link blocks the way.
bool fertile(const KnowledgeTree& tree, const PosteriorTable& table, DomainId id) {
    const Domain& d = tree.domain(id);
    if (d.is_unk) return false;
    if (id < table.size() && table.arm(id).deactivated) return false;
    if (d.level == kLeafLevel) return true;
    for (DomainId c : d.children)
        if (fertile(tree, table, c)) return true;
    return false;
}

}  // namespace

Path sample_path_enlightenment(const KnowledgeTree& tree,
                               const PosteriorTable& table,
                               SplitRng& rng) {
    Path path;
    path.nodes.push_back(kRootId);
    DomainId node = kRootId;
    for (int level = 1; level <= kLeafLevel; ++level) {
        std::vector<ArmView> arms;
        for (DomainId c : tree.children(node)) {
            if (!fertile(tree, table, c)) continue;
            const ArmPosterior& a = table.arm(c);
            arms.push_back({c, a.alpha, a.beta, a.deactivated});
        }
        if (arms.empty())
            throw NoCompleteChain("no completable domain chain below node " +
                                  std::to_string(node));
        node = sample_arm(arms, rng);
        path.nodes.push_back(node);
    }
    path.valid = true;
    return path;
}

void commit_batch(KnowledgeTree& tree,
                  PosteriorTable& table,
                  std::span<const PathSampleResult> results,
                  std::span<const int> rewards) {
    std::size_t n_valid = 0;
    for (const PathSampleResult& r : results)
        if (r.status == PathStatus::Valid) ++n_valid;
    if (n_valid != rewards.size())
        throw LengthMismatch("got " + std::to_string(rewards.size()) +
                             " rewards for " + std::to_string(n_valid) +
                             " valid paths");

    std::size_t next_reward = 0;
    for (const PathSampleResult& r : results) {
        for (const UnkDelta& u : r.unk_updates) {
            ArmPosterior& a = table.arm(u.arm);
            if (a.deactivated) continue;  // frozen
            a.alpha += u.d_alpha;
            a.beta += u.d_beta;
        }
        if (r.deactivate) {
            table.deactivate_arm(*r.deactivate);
            tree.set_active(*r.deactivate, false);
        }
        if (r.status != PathStatus::Valid) continue;
        int reward = rewards[next_reward++];
        for (std::size_t i = 1; i < r.path.nodes.size(); ++i) {
            DomainId arm = r.path.nodes[i];
            if (table.arm(arm).deactivated) continue;  // frozen mid-batch
            table.update_posterior(arm, reward);
        }
    }
}

}  // namespace treefuse
