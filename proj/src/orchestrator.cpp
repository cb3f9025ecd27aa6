#include "treefuse/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include "treefuse/change_detection.hpp"
#include "treefuse/digest.hpp"

namespace treefuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream purposes for counter-based rng derivation: every draw site gets its
// own stream keyed by (seed, round, purpose, index), so concurrency and
// resume cannot reorder consumption.
constexpr std::uint64_t kStreamMeditate = 1;
constexpr std::uint64_t kStreamHarvest = 2;
constexpr std::uint64_t kStreamEnlighten = 3;

SplitRng stream(std::uint64_t seed, int round, std::uint64_t purpose, int index) {
    return SplitRng::derive(seed, {static_cast<std::uint64_t>(round), purpose,
                                   static_cast<std::uint64_t>(index)});
}

}  // namespace

json fusion_report_to_json(const FusionReport& report, const RunState& state) {
    json rounds = json::array();
    for (const RoundReport& r : report.rounds) rounds.push_back(report_to_json(r));
    return {{"rounds", std::move(rounds)},
            {"final",
             {{"level_counts", report.level_counts},
              {"posterior_digest", report.posterior_digest},
              {"tree", tree_to_json(state.tree)},
              {"posteriors", posteriors_to_json(state.posteriors)}}},
            {"dataset",
             {{"file", report.dataset_file}, {"records", report.dataset_records}}}};
}

Orchestrator::Orchestrator(Config config) : config_(std::move(config)) {
    state_.config = config_.run;
    state_.posteriors = PosteriorTable(state_.config.window_width);
    state_.posteriors.ensure_size(state_.tree.size());
    wire_backends(/*resumed=*/false);
}

Orchestrator::Orchestrator(Config config, RunState resumed)
    : config_(std::move(config)), state_(std::move(resumed)) {
    // The checkpointed run configuration wins: resuming must continue the
    // original trajectory; only output routing comes from the fresh config.
    config_.run = state_.config;
    wire_backends(/*resumed=*/true);
}

void Orchestrator::wire_backends(bool resumed) {
    sources_.clear();
    target_ = nullptr;
    if (state_.config.mode == RunMode::Synthetic) {
        world_ = std::make_unique<SyntheticWorld>(state_.config.synthetic);
        if (resumed)
            world_->restore(state_.world);
        else
            state_.world = world_->state();
        ensemble_ = std::make_unique<SyntheticEnsemble>(*world_);
        sources_ = ensemble_->sources;
        target_ = ensemble_->target;
    } else {
        for (const EndpointConfig& e : state_.config.sources)
            live_backends_.push_back(std::make_unique<LiveBackend>(e));
        live_backends_.push_back(std::make_unique<LiveBackend>(state_.config.target));
        for (std::size_t i = 0; i + 1 < live_backends_.size(); ++i)
            sources_.push_back(live_backends_[i].get());
        target_ = live_backends_.back().get();
    }
}

void Orchestrator::set_backends(std::vector<ModelBackend*> sources, ModelBackend* target) {
    sources_ = std::move(sources);
    target_ = target;
}

RoundReport Orchestrator::meditation_round(int round) {
    const RunConfig& rc = state_.config;
    const int batch = rc.meditation_batch;

    if (world_) {
        world_->apply_drift(round);
        state_.world = world_->state();
    }

    // Phase 1: draw B paths against a fixed posterior snapshot. Sprouts
    // mutate the tree immediately (later paths may descend into them);
    // posterior effects stay queued in the results.
    const PosteriorTable snapshot = state_.posteriors;
    std::vector<PathSampleResult> results;
    results.reserve(batch);
    for (int b = 1; b <= batch; ++b) {
        SplitRng rng = stream(rc.seed, round, kStreamMeditate, b);
        SproutFn propose = [&](DomainId parent) {
            return sprout(state_.tree, parent,
                          std::span<ModelBackend* const>(sources_), rng);
        };
        try {
            results.push_back(sample_path_meditation(state_.tree, state_.posteriors,
                                                     snapshot, propose, rng));
        } catch (const AllDeactivated&) {
            // Nothing selectable at some level: a dead draw, nothing to do.
            PathSampleResult dead;
            dead.path.nodes.push_back(kRootId);
            dead.status = PathStatus::Invalid;
            results.push_back(std::move(dead));
        }
    }

    // Phase 2: harvest every valid path; fan out across workers, results
    // land in per-path slots so ordering is unaffected by scheduling.
    std::vector<int> jobs;
    for (int b = 0; b < batch; ++b)
        if (results[b].status == PathStatus::Valid) jobs.push_back(b);
    std::vector<std::optional<QaRecord>> harvested(batch);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= jobs.size()) return;
            const int b = jobs[i];
            SplitRng rng = stream(rc.seed, round, kStreamHarvest, b + 1);
            try {
                harvested[b] = harvest(state_.tree, results[b].path,
                                       std::span<ModelBackend* const>(sources_),
                                       *target_, rng);
            } catch (const Error&) {
                harvested[b] = std::nullopt;  // discard the sample, keep going
            }
        }
    };
    const int workers = std::min<int>(rc.harvest_parallelism,
                                      static_cast<int>(jobs.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }

    // Phase 3: serialized commit. Valid paths whose harvest was discarded
    // still carry their sprout evidence but yield no reward and no record.
    std::vector<PathSampleResult> committed = results;
    std::vector<int> rewards;
    std::vector<QaRecord> records;
    int discarded = 0;
    for (int b = 0; b < batch; ++b) {
        if (results[b].status != PathStatus::Valid) continue;
        if (!harvested[b]) {
            committed[b].status = PathStatus::Invalid;
            ++discarded;
            continue;
        }
        rewards.push_back(harvested[b]->reward);
        records.push_back(std::move(*harvested[b]));
    }
    commit_batch(state_.tree, state_.posteriors, committed, rewards);
    for (QaRecord& record : records) {
        record.round = round;
        record.seq = state_.next_seq++;
        state_.pools[record.leaf].push_back(std::move(record));
    }

    // Phase 4: sweep every live arm for distribution change.
    const IrConfig ir = IrConfig::make(rc.window_width, rc.quantile_u);
    const std::vector<IrOutcome> outcomes = ir_sweep(state_.tree, state_.posteriors, ir);

    RoundReport report;
    report.round = round;
    report.paths_sampled = batch;
    std::map<std::string, int> level1_counts;
    int level1_total = 0;
    for (const PathSampleResult& r : results) {
        if (r.status == PathStatus::Valid) {
            ++report.paths_valid;
            ++level1_counts[state_.tree.domain(r.path.nodes[1]).name];
            ++level1_total;
        } else {
            ++report.paths_invalid;
        }
        report.sprouts_ok += static_cast<int>(r.sprouted.size());
        report.sprouts_failed += r.sprout_failures;
        if (r.deactivate) ++report.deactivations;
    }
    report.discarded_harvests = discarded;
    report.rewards_committed = static_cast<int>(rewards.size());
    report.mean_reward =
        rewards.empty() ? 0.0
                        : std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                              static_cast<double>(rewards.size());
    for (const auto& [name, count] : level1_counts)
        report.level1_shares[name] =
            static_cast<double>(count) / static_cast<double>(level1_total);
    for (const IrOutcome& o : outcomes) {
        if (o.reset_applied) ++report.ir_resets;
        if (o.result) report.ir_tests.push_back({o.arm, *o.result});
    }
    report.level_counts = state_.tree.level_counts();
    report.posterior_digest = posterior_digest(state_.posteriors);
    return report;
}

std::vector<QaRecord> Orchestrator::enlightenment_round(int round, RoundReport& report) {
    const RunConfig& rc = state_.config;
    std::vector<QaRecord> batch;
    int skipped = 0;
    for (int m = 1; m <= rc.enlightenment_batch; ++m) {
        SplitRng rng = stream(rc.seed, round, kStreamEnlighten, m);
        for (int redraws = 0;; ++redraws) {
            const Path path =
                sample_path_enlightenment(state_.tree, state_.posteriors, rng);
            const auto it = state_.pools.find(path.nodes.back());
            if (it != state_.pools.end() && !it->second.empty()) {
                const std::vector<QaRecord>& pool = it->second;
                batch.push_back(pool[rng.below(pool.size())]);
                break;
            }
            if (redraws == 10) {  // budget spent: give this draw up
                ++skipped;
                break;
            }
        }
    }
    if (rc.mode == RunMode::Synthetic) {
        apply_training(*world_, batch);
        state_.world = world_->state();
    } else if (!batch.empty()) {
        fire_trainer_hook(batch, round);
    }
    report.enlightenment_records = static_cast<int>(batch.size());
    report.enlightenment_skipped = skipped;
    return batch;
}

FusionReport Orchestrator::run() {
    const RunConfig& rc = state_.config;
    const OutputConfig& oc = config_.output;
    const fs::path out_dir(oc.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir / "checkpoints", ec);
    if (ec) throw Io("cannot create output directory " + out_dir.string());

    for (int round = state_.completed_rounds + 1; round <= rc.rounds; ++round) {
        RoundReport report = meditation_round(round);
        try {
            enlightenment_round(round, report);
        } catch (const NoCompleteChain&) {
            // No complete chain yet (every path so far failed): nothing to
            // train on this round.
            report.enlightenment_records = 0;
            report.enlightenment_skipped = rc.enlightenment_batch;
        }
        state_.reports.push_back(std::move(report));
        state_.completed_rounds = round;

        const bool on_cadence =
            oc.checkpoint_every > 0 && round % oc.checkpoint_every == 0;
        if (on_cadence || round == rc.rounds)
            save_checkpoint(state_, (out_dir / "checkpoints" /
                                     ("round_" + std::to_string(round) + ".json"))
                                        .string());
        write_metrics();
    }

    FusionReport report;
    report.rounds = state_.reports;
    report.level_counts = state_.tree.level_counts();
    report.posterior_digest = posterior_digest(state_.posteriors);
    report.dataset_file = oc.dataset_file;
    report.dataset_records = export_dataset((out_dir / oc.dataset_file).string());

    std::ofstream out(out_dir / oc.report_file, std::ios::binary | std::ios::trunc);
    if (!out) throw Io("cannot write report " + (out_dir / oc.report_file).string());
    out << fusion_report_to_json(report, state_).dump(2) << '\n';
    if (!out.flush()) throw Io("short write on report file");
    return report;
}

void Orchestrator::write_metrics() const {
    const fs::path path = fs::path(config_.output.out_dir) / config_.output.metrics_file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Io("cannot write metrics " + path.string());
    for (const RoundReport& r : state_.reports) {
        out << report_to_json(r).dump() << '\n';
        for (const IrTest& t : r.ir_tests) out << ir_test_to_json(r.round, t).dump() << '\n';
    }
    if (!out.flush()) throw Io("short write on metrics file");
}

std::int64_t export_dataset(const std::map<DomainId, std::vector<QaRecord>>& pools,
                            const std::string& path) {
    std::vector<const QaRecord*> all;
    for (const auto& [leaf, records] : pools)
        for (const QaRecord& r : records) all.push_back(&r);
    std::sort(all.begin(), all.end(), [](const QaRecord* a, const QaRecord* b) {
        if (a->round != b->round) return a->round < b->round;
        return a->seq < b->seq;
    });
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Io("cannot write dataset " + path);
    for (const QaRecord* r : all) out << export_record_to_json(*r).dump() << '\n';
    if (!out.flush()) throw Io("short write on dataset " + path);
    return static_cast<std::int64_t>(all.size());
}

void Orchestrator::fire_trainer_hook(const std::vector<QaRecord>& batch, int round) const {
    const fs::path path = fs::path(config_.output.out_dir) /
                          ("training_batch_round_" + std::to_string(round) + ".jsonl");
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Io("cannot write training batch " + path.string());
        for (const QaRecord& r : batch) out << export_record_to_json(r).dump() << '\n';
        if (!out.flush()) throw Io("short write on training batch");
    }
    const std::string batch_path = fs::absolute(path).string();
    const TrainerHook& hook = state_.config.trainer;
    if (!hook.command.empty()) {
        std::string command = hook.command;
        const std::string placeholder = "{batch}";
        if (const std::size_t at = command.find(placeholder); at != std::string::npos)
            command.replace(at, placeholder.size(), batch_path);
        else
            command += " " + batch_path;
        const int status = std::system(command.c_str());
        if (status != 0)
            std::cerr << "Warning: trainer command exited with status " << status << "\n";
    }
    if (!hook.url.empty()) {
        const json body = {{"batch_path", batch_path}};
        if (!post_json(hook.url, body.dump()))
            std::cerr << "Warning: trainer webhook " << hook.url << " did not accept the batch\n";
    }
}

}  // namespace treefuse
