#include "treefuse/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <utility>

#include "treefuse/digest.hpp"

namespace treefuse {

namespace {

using nlohmann::json;

constexpr const char* kCheckpointFormat = "treefuse-checkpoint-v1";

json arm_to_json(DomainId id, const ArmPosterior& a) {
    json window = json::array();
    for (std::uint8_t r : a.window) window.push_back(static_cast<int>(r));
    return {{"arm_id", id},
            {"alpha", a.alpha},
            {"beta", a.beta},
            {"deactivated", a.deactivated},
            {"history_successes", a.history_successes},
            {"history_count", a.history_count},
            {"window", std::move(window)}};
}

KnowledgeTree tree_from_json(const json& nodes) {
    std::vector<Domain> out;
    out.reserve(nodes.size());
    for (const json& n : nodes) {
        Domain d;
        d.id = n.at("id").get<DomainId>();
        d.name = n.at("name").get<std::string>();
        d.level = n.at("level").get<int>();
        d.parent = n.at("parent_id").get<DomainId>();
        d.is_unk = n.at("is_unk").get<bool>();
        d.active = n.at("active").get<bool>();
        out.push_back(std::move(d));
    }
    return KnowledgeTree::restore(std::move(out));
}

json world_to_json(const SyntheticWorld::State& w) {
    json overrides = json::array();
    for (const auto& [key, value] : w.overrides)
        overrides.push_back(
            {{"model", key.first}, {"domain", key.second}, {"value", value}});
    json learned = json::array();
    for (const auto& [domain, delta] : w.learned)
        learned.push_back({{"domain", domain}, {"value", delta}});
    return {{"overrides", std::move(overrides)},
            {"learned", std::move(learned)},
            {"name_cursors", w.name_cursors}};
}

SyntheticWorld::State world_from_json(const json& doc) {
    SyntheticWorld::State w;
    for (const json& o : doc.at("overrides"))
        w.overrides[{o.at("model").get<int>(), o.at("domain").get<std::string>()}] =
            o.at("value").get<double>();
    for (const json& o : doc.at("learned"))
        w.learned[o.at("domain").get<std::string>()] = o.at("value").get<double>();
    w.name_cursors = doc.at("name_cursors").get<std::vector<std::int64_t>>();
    return w;
}

}  // namespace

json tree_to_json(const KnowledgeTree& tree) {
    json nodes = json::array();
    for (DomainId id = 0; id < tree.size(); ++id) {
        const Domain& d = tree.domain(id);
        nodes.push_back({{"id", d.id},
                         {"name", d.name},
                         {"level", d.level},
                         {"parent_id", d.parent},
                         {"is_unk", d.is_unk},
                         {"active", d.active}});
    }
    return nodes;
}

json posteriors_to_json(const PosteriorTable& table) {
    json arms = json::array();
    for (std::size_t i = 0; i < table.size(); ++i)
        arms.push_back(
            arm_to_json(static_cast<DomainId>(i), table.arm(static_cast<DomainId>(i))));
    return {{"window_capacity", table.window_capacity()}, {"arms", std::move(arms)}};
}

json record_to_json(const QaRecord& r) {
    return {{"round", r.round},
            {"leaf", r.leaf},
            {"main", r.main},
            {"secondary", r.secondary},
            {"sub", r.sub},
            {"style", static_cast<int>(r.style)},
            {"question", r.question},
            {"answer", r.answer},
            {"leader_id", r.leader_id},
            {"best_index", r.best_index},
            {"reward", r.reward},
            {"seq", r.seq}};
}

QaRecord record_from_json(const json& doc) {
    QaRecord r;
    r.round = doc.at("round").get<int>();
    r.leaf = doc.at("leaf").get<DomainId>();
    r.main = doc.at("main").get<std::string>();
    r.secondary = doc.at("secondary").get<std::string>();
    r.sub = doc.at("sub").get<std::string>();
    int style = doc.at("style").get<int>();
    if (style < 1 || style > kNumStyles)
        throw CorruptCheckpoint("record style " + std::to_string(style) + " out of range");
    r.style = static_cast<QuestionStyle>(style);
    r.question = doc.at("question").get<std::string>();
    r.answer = doc.at("answer").get<std::string>();
    r.leader_id = doc.at("leader_id").get<int>();
    r.best_index = doc.at("best_index").get<int>();
    r.reward = doc.at("reward").get<int>();
    r.seq = doc.at("seq").get<std::int64_t>();
    return r;
}

json export_record_to_json(const QaRecord& r) {
    return {{"round", r.round},
            {"main", r.main},
            {"secondary", r.secondary},
            {"sub", r.sub},
            {"style", static_cast<int>(r.style)},
            {"question", r.question},
            {"answer", r.answer},
            {"leader_id", r.leader_id},
            {"best_index", r.best_index},
            {"reward", r.reward}};
}

json ir_test_to_json(int round, const IrTest& t) {
    return {{"round", round},
            {"arm_id", t.arm},
            {"lambda_win", t.result.lambda_win},
            {"lambda_all", t.result.lambda_all},
            {"statistic", t.result.statistic},
            {"reject", t.result.reject}};
}

json report_to_json(const RoundReport& r) {
    json ir = json::array();
    for (const IrTest& t : r.ir_tests)
        ir.push_back({{"arm_id", t.arm},
                      {"lambda_win", t.result.lambda_win},
                      {"lambda_all", t.result.lambda_all},
                      {"statistic", t.result.statistic},
                      {"reject", t.result.reject}});
    return {{"round", r.round},
            {"paths_sampled", r.paths_sampled},
            {"paths_valid", r.paths_valid},
            {"paths_invalid", r.paths_invalid},
            {"sprouts_ok", r.sprouts_ok},
            {"sprouts_failed", r.sprouts_failed},
            {"deactivations", r.deactivations},
            {"discarded_harvests", r.discarded_harvests},
            {"rewards_committed", r.rewards_committed},
            {"mean_reward", r.mean_reward},
            {"ir_resets", r.ir_resets},
            {"level_counts", r.level_counts},
            {"level1_shares", r.level1_shares},
            {"posterior_digest", r.posterior_digest},
            {"ir_tests", std::move(ir)},
            {"enlightenment_records", r.enlightenment_records},
            {"enlightenment_skipped", r.enlightenment_skipped}};
}

RoundReport report_from_json(const json& doc) {
    RoundReport r;
    r.round = doc.at("round").get<int>();
    r.paths_sampled = doc.at("paths_sampled").get<int>();
    r.paths_valid = doc.at("paths_valid").get<int>();
    r.paths_invalid = doc.at("paths_invalid").get<int>();
    r.sprouts_ok = doc.at("sprouts_ok").get<int>();
    r.sprouts_failed = doc.at("sprouts_failed").get<int>();
    r.deactivations = doc.at("deactivations").get<int>();
    r.discarded_harvests = doc.at("discarded_harvests").get<int>();
    r.rewards_committed = doc.at("rewards_committed").get<int>();
    r.mean_reward = doc.at("mean_reward").get<double>();
    r.ir_resets = doc.at("ir_resets").get<int>();
    r.level_counts = doc.at("level_counts").get<std::array<int, 3>>();
    r.level1_shares = doc.at("level1_shares").get<std::map<std::string, double>>();
    r.posterior_digest = doc.at("posterior_digest").get<std::string>();
    for (const json& t : doc.at("ir_tests")) {
        IrTest test;
        test.arm = t.at("arm_id").get<DomainId>();
        test.result.lambda_win = t.at("lambda_win").get<double>();
        test.result.lambda_all = t.at("lambda_all").get<double>();
        test.result.statistic = t.at("statistic").get<double>();
        test.result.reject = t.at("reject").get<bool>();
        r.ir_tests.push_back(test);
    }
    r.enlightenment_records = doc.at("enlightenment_records").get<int>();
    r.enlightenment_skipped = doc.at("enlightenment_skipped").get<int>();
    return r;
}

json state_to_json(const RunState& state) {
    json pools = json::array();
    for (const auto& [leaf, records] : state.pools) {
        json recs = json::array();
        for (const QaRecord& r : records) recs.push_back(record_to_json(r));
        pools.push_back({{"leaf", leaf}, {"records", std::move(recs)}});
    }
    json reports = json::array();
    for (const RoundReport& r : state.reports) reports.push_back(report_to_json(r));
    return {{"run_config", run_config_to_json(state.config)},
            {"tree", tree_to_json(state.tree)},
            {"posteriors", posteriors_to_json(state.posteriors)},
            {"pools", std::move(pools)},
            {"world", world_to_json(state.world)},
            {"reports", std::move(reports)},
            {"completed_rounds", state.completed_rounds},
            {"next_seq", state.next_seq}};
}

RunState state_from_json(const json& doc) {
    try {
        RunState state;
        state.config = config_from_json(doc.at("run_config")).run;
        state.tree = tree_from_json(doc.at("tree"));

        const json& post = doc.at("posteriors");
        state.posteriors = PosteriorTable(post.at("window_capacity").get<int>());
        const json& arms = post.at("arms");
        if (arms.size() != state.tree.size())
            throw CorruptCheckpoint("posterior table does not cover the tree");
        state.posteriors.ensure_size(arms.size());
        for (const json& a : arms) {
            DomainId id = a.at("arm_id").get<DomainId>();
            if (id >= state.posteriors.size())
                throw CorruptCheckpoint("arm id " + std::to_string(id) + " out of range");
            ArmPosterior& arm = state.posteriors.arm(id);
            arm.alpha = a.at("alpha").get<double>();
            arm.beta = a.at("beta").get<double>();
            arm.deactivated = a.at("deactivated").get<bool>();
            arm.history_successes = a.at("history_successes").get<std::int64_t>();
            arm.history_count = a.at("history_count").get<std::int64_t>();
            for (const json& r : a.at("window")) {
                int v = r.get<int>();
                if (v != 0 && v != 1) throw CorruptCheckpoint("window entries are 0/1");
                arm.window.push_back(static_cast<std::uint8_t>(v));
            }
        }

        for (const json& p : doc.at("pools")) {
            DomainId leaf = p.at("leaf").get<DomainId>();
            if (!state.tree.has(leaf) || state.tree.domain(leaf).level != kLeafLevel ||
                state.tree.domain(leaf).is_unk)
                throw CorruptCheckpoint("pool attached to non-leaf id " +
                                        std::to_string(leaf));
            auto& records = state.pools[leaf];
            for (const json& r : p.at("records")) records.push_back(record_from_json(r));
        }

        state.world = world_from_json(doc.at("world"));
        for (const json& r : doc.at("reports"))
            state.reports.push_back(report_from_json(r));
        state.completed_rounds = doc.at("completed_rounds").get<int>();
        state.next_seq = doc.at("next_seq").get<std::int64_t>();
        return state;
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("malformed state: ") + e.what());
    }
}

void save_checkpoint(const RunState& state, const std::string& path) {
    json body = state_to_json(state);
    json doc = {{"format", kCheckpointFormat},
                {"digest", fnv1a64_hex(body.dump())},
                {"state", std::move(body)}};
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Io("cannot write checkpoint " + tmp);
        out << doc.dump() << '\n';
        if (!out.flush()) throw Io("short write on checkpoint " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Io("cannot move checkpoint into place: " + ec.message());
}

RunState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Io("cannot open checkpoint " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("not a checkpoint document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("format") || !doc.contains("digest") ||
        !doc.contains("state"))
        throw CorruptCheckpoint("missing format/digest/state fields");
    if (doc.at("format") != kCheckpointFormat)
        throw CorruptCheckpoint("unknown checkpoint format");
    std::string expected = doc.at("digest").get<std::string>();
    std::string actual = fnv1a64_hex(doc.at("state").dump());
    if (expected != actual)
        throw CorruptCheckpoint("digest mismatch: stored " + expected + ", content " +
                                actual);
    return state_from_json(doc.at("state"));
}

}  // namespace treefuse
