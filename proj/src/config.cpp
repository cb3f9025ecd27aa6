#include "treefuse/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace treefuse {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw ConfigInvalid(field + ": " + why);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) bad(where + "." + it.key(), "unknown field");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad(where + "." + key, "wrong type");
    }
}

EndpointConfig endpoint_from_json(const json& obj, const std::string& where) {
    check_keys(obj, where,
               {"base_url", "model", "api_key_env", "temperature", "top_p_generate",
                "top_p_answer", "top_p_judge", "max_tokens", "max_tokens_answer",
                "timeout_ms"});
    EndpointConfig e;
    read(obj, "base_url", e.base_url, where);
    read(obj, "model", e.model, where);
    read(obj, "api_key_env", e.api_key_env, where);
    read(obj, "temperature", e.temperature, where);
    read(obj, "top_p_generate", e.top_p_generate, where);
    read(obj, "top_p_answer", e.top_p_answer, where);
    read(obj, "top_p_judge", e.top_p_judge, where);
    read(obj, "max_tokens", e.max_tokens, where);
    read(obj, "max_tokens_answer", e.max_tokens_answer, where);
    read(obj, "timeout_ms", e.timeout_ms, where);
    return e;
}

json endpoint_to_json(const EndpointConfig& e) {
    return {{"base_url", e.base_url},
            {"model", e.model},
            {"api_key_env", e.api_key_env},
            {"temperature", e.temperature},
            {"top_p_generate", e.top_p_generate},
            {"top_p_answer", e.top_p_answer},
            {"top_p_judge", e.top_p_judge},
            {"max_tokens", e.max_tokens},
            {"max_tokens_answer", e.max_tokens_answer},
            {"timeout_ms", e.timeout_ms}};
}

}  // namespace

Config config_from_json(const json& doc) {
    if (!doc.is_object()) bad("(document)", "config must be a JSON object");
    check_keys(doc, "(top)", {"run", "ir", "output", "synthetic", "live"});
    Config c;

    if (doc.contains("run")) {
        const json& r = doc.at("run");
        check_keys(r, "run",
                   {"rounds", "meditation_batch", "enlightenment_batch", "seed",
                    "mode", "harvest_parallelism"});
        read(r, "rounds", c.run.rounds, "run");
        read(r, "meditation_batch", c.run.meditation_batch, "run");
        read(r, "enlightenment_batch", c.run.enlightenment_batch, "run");
        read(r, "seed", c.run.seed, "run");
        read(r, "harvest_parallelism", c.run.harvest_parallelism, "run");
        if (r.contains("mode")) {
            std::string mode;
            read(r, "mode", mode, "run");
            if (mode == "synthetic") c.run.mode = RunMode::Synthetic;
            else if (mode == "live") c.run.mode = RunMode::Live;
            else bad("run.mode", "must be \"synthetic\" or \"live\"");
        }
    }

    if (doc.contains("ir")) {
        const json& ir = doc.at("ir");
        check_keys(ir, "ir", {"window_width", "quantile_u"});
        read(ir, "window_width", c.run.window_width, "ir");
        read(ir, "quantile_u", c.run.quantile_u, "ir");
    }

    if (doc.contains("output")) {
        const json& o = doc.at("output");
        check_keys(o, "output",
                   {"out_dir", "dataset_file", "metrics_file", "report_file",
                    "checkpoint_every"});
        read(o, "out_dir", c.output.out_dir, "output");
        read(o, "dataset_file", c.output.dataset_file, "output");
        read(o, "metrics_file", c.output.metrics_file, "output");
        read(o, "report_file", c.output.report_file, "output");
        read(o, "checkpoint_every", c.output.checkpoint_every, "output");
    }

    if (doc.contains("synthetic")) {
        const json& s = doc.at("synthetic");
        check_keys(s, "synthetic",
                   {"num_sources", "sprout_success_rate", "eta",
                    "default_target_skill", "default_source_skill", "skills",
                    "drift", "level_names", "unbounded_names"});
        SyntheticWorldConfig& w = c.run.synthetic;
        read(s, "num_sources", w.num_sources, "synthetic");
        read(s, "sprout_success_rate", w.sprout_success_rate, "synthetic");
        read(s, "eta", w.eta, "synthetic");
        read(s, "default_target_skill", w.default_target_skill, "synthetic");
        read(s, "default_source_skill", w.default_source_skill, "synthetic");
        read(s, "level_names", w.level_names, "synthetic");
        read(s, "unbounded_names", w.unbounded_names, "synthetic");
        if (s.contains("skills")) {
            for (const json& o : s.at("skills")) {
                check_keys(o, "synthetic.skills[]", {"model", "domain", "value"});
                SkillOverride sk;
                read(o, "model", sk.model, "synthetic.skills[]");
                read(o, "domain", sk.domain, "synthetic.skills[]");
                read(o, "value", sk.value, "synthetic.skills[]");
                w.skills.push_back(std::move(sk));
            }
        }
        if (s.contains("drift")) {
            for (const json& o : s.at("drift")) {
                check_keys(o, "synthetic.drift[]", {"round", "model", "domain", "value"});
                DriftEvent e;
                read(o, "round", e.round, "synthetic.drift[]");
                read(o, "model", e.model, "synthetic.drift[]");
                read(o, "domain", e.domain, "synthetic.drift[]");
                read(o, "value", e.value, "synthetic.drift[]");
                w.drift.push_back(std::move(e));
            }
        }
    }

    if (doc.contains("live")) {
        const json& l = doc.at("live");
        check_keys(l, "live", {"sources", "target", "trainer_command", "trainer_url"});
        if (l.contains("sources"))
            for (const json& o : l.at("sources"))
                c.run.sources.push_back(endpoint_from_json(o, "live.sources[]"));
        if (l.contains("target"))
            c.run.target = endpoint_from_json(l.at("target"), "live.target");
        read(l, "trainer_command", c.run.trainer.command, "live");
        read(l, "trainer_url", c.run.trainer.url, "live");
    }

    return c;
}

void validate(const Config& config) {
    const RunConfig& r = config.run;
    if (r.rounds < 1) bad("run.rounds", "must be >= 1");
    if (r.meditation_batch < 1) bad("run.meditation_batch", "must be >= 1");
    if (r.enlightenment_batch < 1) bad("run.enlightenment_batch", "must be >= 1");
    if (r.harvest_parallelism < 1) bad("run.harvest_parallelism", "must be >= 1");
    if (r.window_width < 2) bad("ir.window_width", "must be >= 2");
    if (!(r.quantile_u > 0.0 && r.quantile_u < 1.0))
        bad("ir.quantile_u", "must lie strictly between 0 and 1");
    if (config.output.checkpoint_every < 0) bad("output.checkpoint_every", "must be >= 0");

    if (r.mode == RunMode::Synthetic) {
        const SyntheticWorldConfig& w = r.synthetic;
        if (w.num_sources < 1) bad("synthetic.num_sources", "must be >= 1");
        if (!(w.sprout_success_rate >= 0.0 && w.sprout_success_rate <= 1.0))
            bad("synthetic.sprout_success_rate", "must lie in [0, 1]");
        if (w.eta < 0.0) bad("synthetic.eta", "must be >= 0");
        for (const SkillOverride& s : w.skills) {
            if (s.model < 0 || s.model > w.num_sources)
                bad("synthetic.skills[].model",
                    "must be 0 (target) .. " + std::to_string(w.num_sources));
            if (!(s.value > 0.0 && s.value < 1.0))
                bad("synthetic.skills[].value", "must lie strictly between 0 and 1");
        }
        for (const DriftEvent& e : w.drift) {
            if (e.round < 1) bad("synthetic.drift[].round", "must be >= 1");
            if (e.model < 0 || e.model > w.num_sources)
                bad("synthetic.drift[].model",
                    "must be 0 (target) .. " + std::to_string(w.num_sources));
        }
        if (w.level_names.size() > static_cast<std::size_t>(kLeafLevel))
            bad("synthetic.level_names", "at most 3 levels");
    } else {
        if (r.sources.empty()) bad("live.sources", "live mode needs at least one source");
        for (const EndpointConfig& e : r.sources)
            if (e.base_url.empty()) bad("live.sources[].base_url", "must not be empty");
        if (r.target.base_url.empty()) bad("live.target.base_url", "must not be empty");
    }
}

std::vector<std::string> config_warnings(const Config& config) {
    std::vector<std::string> warnings;
    if (config.run.num_sources() + 1 > 9)
        warnings.push_back(
            "judging asks for a 1-digit index but there are " +
            std::to_string(config.run.num_sources() + 1) +
            " answers; multi-digit verdicts will be accepted");
    return warnings;
}

json run_config_to_json(const RunConfig& r) {
    json synthetic = {{"num_sources", r.synthetic.num_sources},
                      {"sprout_success_rate", r.synthetic.sprout_success_rate},
                      {"eta", r.synthetic.eta},
                      {"default_target_skill", r.synthetic.default_target_skill},
                      {"default_source_skill", r.synthetic.default_source_skill},
                      {"level_names", r.synthetic.level_names},
                      {"unbounded_names", r.synthetic.unbounded_names},
                      {"skills", json::array()},
                      {"drift", json::array()}};
    for (const SkillOverride& s : r.synthetic.skills)
        synthetic["skills"].push_back(
            {{"model", s.model}, {"domain", s.domain}, {"value", s.value}});
    for (const DriftEvent& e : r.synthetic.drift)
        synthetic["drift"].push_back({{"round", e.round},
                                      {"model", e.model},
                                      {"domain", e.domain},
                                      {"value", e.value}});
    json live = {{"trainer_command", r.trainer.command},
                 {"trainer_url", r.trainer.url},
                 {"sources", json::array()},
                 {"target", endpoint_to_json(r.target)}};
    for (const EndpointConfig& e : r.sources) live["sources"].push_back(endpoint_to_json(e));
    return {{"run",
             {{"rounds", r.rounds},
              {"meditation_batch", r.meditation_batch},
              {"enlightenment_batch", r.enlightenment_batch},
              {"seed", r.seed},
              {"mode", r.mode == RunMode::Synthetic ? "synthetic" : "live"},
              {"harvest_parallelism", r.harvest_parallelism}}},
            {"ir", {{"window_width", r.window_width}, {"quantile_u", r.quantile_u}}},
            {"synthetic", synthetic},
            {"live", live}};
}

json config_to_json(const Config& config) {
    json doc = run_config_to_json(config.run);
    doc["output"] = {{"out_dir", config.output.out_dir},
                     {"dataset_file", config.output.dataset_file},
                     {"metrics_file", config.output.metrics_file},
                     {"report_file", config.output.report_file},
                     {"checkpoint_every", config.output.checkpoint_every}};
    return doc;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Io("cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
    }
    Config c = config_from_json(doc);
    validate(c);
    return c;
}

}  // namespace treefuse
