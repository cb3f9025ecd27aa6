#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treefuse/change_detection.hpp"
#include "treefuse/checkpoint.hpp"
#include "treefuse/config.hpp"
#include "treefuse/digest.hpp"
#include "treefuse/orchestrator.hpp"

namespace {

using nlohmann::json;
using namespace treefuse;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration document (JSON)");
    cmd->add_option("--seed", flags.seed, "override the configured seed");
}

// Flag > config > default.
std::uint64_t resolve_seed(const CommonFlags& flags, std::uint64_t fallback) {
    if (flags.seed) return *flags.seed;
    if (!flags.config_path.empty()) return load_config_file(flags.config_path).run.seed;
    return fallback;
}

int cmd_run(const CommonFlags& flags, const std::string& resume_path,
            const std::string& out_dir_override) {
    if (flags.config_path.empty())
        throw ConfigInvalid("--config: run needs a configuration document");
    Config config = load_config_file(flags.config_path);
    if (flags.seed) config.run.seed = *flags.seed;
    if (!out_dir_override.empty()) config.output.out_dir = out_dir_override;
    validate(config);
    for (const std::string& w : config_warnings(config))
        std::cerr << "Warning: " << w << "\n";

    std::optional<Orchestrator> orchestrator;
    if (resume_path.empty()) {
        orchestrator.emplace(config);
    } else {
        orchestrator.emplace(config, load_checkpoint(resume_path));
    }
    const FusionReport report = orchestrator->run();
    json summary = {{"rounds", static_cast<int>(report.rounds.size())},
                    {"level_counts", report.level_counts},
                    {"dataset_records", report.dataset_records},
                    {"out_dir", config.output.out_dir}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_calibrate(const CommonFlags& flags, int w, double u, double lambda, int trials,
                  int n) {
    if (trials < 1) throw ConfigInvalid("trials: must be >= 1");
    if (w < 2) throw ConfigInvalid("w: must be >= 2");
    if (n <= w) throw ConfigInvalid("n: must exceed the window width");
    if (!(u > 0.0 && u < 1.0)) throw ConfigInvalid("u: must lie strictly between 0 and 1");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigInvalid("lambda: must lie in [0, 1]");

    const IrConfig config = IrConfig::make(w, u);
    const std::uint64_t seed = resolve_seed(flags, 0);
    std::int64_t rejections = 0;
    for (int t = 0; t < trials; ++t) {
        SplitRng rng = SplitRng::derive(seed, {static_cast<std::uint64_t>(t)});
        std::vector<std::uint8_t> window;
        std::int64_t successes = 0;
        for (int i = 0; i < n; ++i) {
            const std::uint8_t r = rng.bernoulli(lambda) ? 1 : 0;
            successes += r;
            window.push_back(r);
            if (static_cast<int>(window.size()) > w) window.erase(window.begin());
        }
        const SwblrtResult result = swblrt_statistic(window, successes, n, config);
        rejections += result.reject ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / trials;
    const double half = 1.96 * std::sqrt(std::max(rate * (1.0 - rate), 1e-12) / trials);
    json out = {{"w", w},
                {"u", u},
                {"lambda", lambda},
                {"trials", trials},
                {"n", n},
                {"threshold", config.threshold},
                {"rejections", rejections},
                {"rate", rate},
                {"nominal", u},
                {"ci_low", rate - half},
                {"ci_high", rate + half}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_simulate(const CommonFlags& flags, const std::string& arms_spec, int rounds,
                 const std::vector<std::string>& drift_specs) {
    std::vector<double> probs;
    std::stringstream ss(arms_spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            probs.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigInvalid("arms: '" + item + "' is not a number");
        }
    }
    if (probs.empty()) throw ConfigInvalid("arms: need at least one arm");
    for (double p : probs)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigInvalid("arms: rates must lie in [0, 1]");
    if (rounds < 1) throw ConfigInvalid("rounds: must be >= 1");

    struct Drift {
        int round;
        int arm;
        double value;
    };
    std::vector<Drift> drift;
    for (const std::string& spec : drift_specs) {
        Drift d{};
        char c1 = 0, c2 = 0;
        std::stringstream ds(spec);
        ds >> d.round >> c1 >> d.arm >> c2 >> d.value;
        if (!ds || c1 != ':' || c2 != ':' || d.round < 1 || d.arm < 0 ||
            d.arm >= static_cast<int>(probs.size()) || !(d.value >= 0.0 && d.value <= 1.0))
            throw ConfigInvalid("drift: '" + spec + "' is not round:arm:rate");
        drift.push_back(d);
    }

    const std::uint64_t seed = resolve_seed(flags, 0);
    SplitRng rng(seed);
    std::vector<double> alpha(probs.size(), 1.0), beta(probs.size(), 1.0);
    std::vector<std::int64_t> picks(probs.size(), 0);
    std::int64_t cumulative = 0;
    for (int round = 1; round <= rounds; ++round) {
        for (const Drift& d : drift)
            if (d.round == round) probs[d.arm] = d.value;
        std::vector<ArmView> views;
        for (std::size_t i = 0; i < probs.size(); ++i)
            views.push_back({static_cast<DomainId>(i), alpha[i], beta[i], false});
        const DomainId pick = sample_arm(views, rng);
        const int reward = rng.bernoulli(probs[pick]) ? 1 : 0;
        alpha[pick] += reward;
        beta[pick] += 1 - reward;
        ++picks[pick];
        cumulative += reward;
        json line = {{"round", round},
                     {"arm", pick},
                     {"reward", reward},
                     {"cumulative_reward", cumulative}};
        std::cout << line.dump() << "\n";
    }
    json shares = json::array();
    for (std::int64_t c : picks)
        shares.push_back(static_cast<double>(c) / static_cast<double>(rounds));
    json summary = {{"rounds", rounds},
                    {"arms", static_cast<int>(probs.size())},
                    {"shares", std::move(shares)},
                    {"cumulative_reward", cumulative}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_export(const std::string& checkpoint_path, const std::string& out_path) {
    const RunState state = load_checkpoint(checkpoint_path);
    const std::int64_t count = export_dataset(state.pools, out_path);
    std::cout << count << "\n";
    return 0;
}

int cmd_inspect(const std::string& checkpoint_path) {
    const RunState state = load_checkpoint(checkpoint_path);
    std::int64_t pooled = 0;
    for (const auto& [leaf, records] : state.pools)
        pooled += static_cast<std::int64_t>(records.size());
    int deactivated = 0;
    for (DomainId id = 0; id < state.tree.size(); ++id)
        if (!state.tree.domain(id).active) ++deactivated;

    struct ArmLine {
        DomainId id;
        double mean;
    };
    std::vector<ArmLine> arms;
    for (DomainId id = 1; id < state.tree.size(); ++id) {
        const Domain& d = state.tree.domain(id);
        if (d.is_unk) continue;
        const ArmPosterior& a = state.posteriors.arm(id);
        if (a.deactivated) continue;
        arms.push_back({id, a.mean()});
    }
    std::sort(arms.begin(), arms.end(), [](const ArmLine& a, const ArmLine& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        return a.id < b.id;
    });
    json top = json::array();
    for (std::size_t i = 0; i < arms.size() && i < 10; ++i) {
        const Domain& d = state.tree.domain(arms[i].id);
        const ArmPosterior& a = state.posteriors.arm(arms[i].id);
        top.push_back({{"arm_id", arms[i].id},
                       {"name", d.name},
                       {"level", d.level},
                       {"mean", arms[i].mean},
                       {"alpha", a.alpha},
                       {"beta", a.beta}});
    }

    // Arms still filling toward testability (history not yet past the window).
    json pending = json::array();
    const int w = state.posteriors.window_capacity();
    for (DomainId id = 1; id < state.tree.size(); ++id) {
        const Domain& d = state.tree.domain(id);
        if (d.is_unk) continue;
        const ArmPosterior& a = state.posteriors.arm(id);
        if (a.deactivated || a.history_count == 0 || a.history_count > w) continue;
        pending.push_back({{"arm_id", id},
                           {"window_fill", static_cast<int>(a.window.size())},
                           {"history_count", a.history_count}});
    }

    json out = {{"completed_rounds", state.completed_rounds},
                {"level_counts", state.tree.level_counts()},
                {"nodes", state.tree.size()},
                {"deactivated", deactivated},
                {"pool_leaves", state.pools.size()},
                {"pool_records", pooled},
                {"posterior_digest", posterior_digest(state.posteriors)},
                {"top_arms", std::move(top)},
                {"pending_windows", std::move(pending)}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical-bandit fusion loop: run, calibrate, simulate, inspect"};
    app.require_subcommand(1);

    CommonFlags run_flags, cal_flags, sim_flags, export_flags, inspect_flags;

    CLI::App* run = app.add_subcommand("run", "execute the meditation/enlightenment loop");
    add_common(run, run_flags);
    std::string resume_path, out_dir_override;
    run->add_option("--resume", resume_path, "continue from a checkpoint file");
    run->add_option("--out-dir", out_dir_override, "override the output directory");

    CLI::App* cal = app.add_subcommand(
        "calibrate-swblrt", "Monte Carlo rejection rate under a stationary arm");
    add_common(cal, cal_flags);
    int cal_w = 20, cal_trials = 20000, cal_n = 200;
    double cal_u = 0.2, cal_lambda = 0.5;
    cal->add_option("--w", cal_w, "window width");
    cal->add_option("--u", cal_u, "nominal rejection level");
    cal->add_option("--lambda", cal_lambda, "stationary success rate");
    cal->add_option("--trials", cal_trials, "Monte Carlo trials");
    cal->add_option("--n", cal_n, "history length per trial");

    CLI::App* sim = app.add_subcommand("simulate-bandit",
                                       "flat Thompson sampling over Bernoulli arms");
    add_common(sim, sim_flags);
    std::string arms_spec;
    int sim_rounds = 2000;
    std::vector<std::string> drift_specs;
    sim->add_option("--arms", arms_spec, "comma-separated success rates")->required();
    sim->add_option("--rounds", sim_rounds, "rounds to play");
    sim->add_option("--drift", drift_specs, "scheduled rate change, round:arm:rate");

    CLI::App* exp = app.add_subcommand("export", "re-emit the dataset from a checkpoint");
    add_common(exp, export_flags);
    std::string export_checkpoint, export_out;
    exp->add_option("--checkpoint", export_checkpoint, "checkpoint file")->required();
    exp->add_option("--out", export_out, "dataset destination")->required();

    CLI::App* ins = app.add_subcommand("inspect", "summarize a checkpoint");
    add_common(ins, inspect_flags);
    std::string inspect_checkpoint;
    ins->add_option("--checkpoint", inspect_checkpoint, "checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is an invalid configuration
    }

    try {
        if (app.got_subcommand(run))
            return cmd_run(run_flags, resume_path, out_dir_override);
        if (app.got_subcommand(cal))
            return cmd_calibrate(cal_flags, cal_w, cal_u, cal_lambda, cal_trials, cal_n);
        if (app.got_subcommand(sim))
            return cmd_simulate(sim_flags, arms_spec, sim_rounds, drift_specs);
        if (app.got_subcommand(exp)) return cmd_export(export_checkpoint, export_out);
        if (app.got_subcommand(ins)) return cmd_inspect(inspect_checkpoint);
    } catch (const ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "Fatal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
