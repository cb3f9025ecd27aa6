#include "treefuse/llm_client.hpp"

#include <cctype>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace treefuse {

namespace {

using nlohmann::json;

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path under the origin, "" or "/v1" style
};

SplitUrl split_url(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    if (scheme == std::string::npos)
        throw Transport("endpoint url '" + base_url + "' has no scheme");
    const std::size_t slash = base_url.find('/', scheme + 3);
    if (slash == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, slash), prefix};
}

double top_p_for(const EndpointConfig& e, ChatRole role) {
    switch (role) {
        case ChatRole::Answer: return e.top_p_answer;
        case ChatRole::Judge: return e.top_p_judge;
        default: return e.top_p_generate;
    }
}

}  // namespace

std::string chat(const EndpointConfig& endpoint,
                 const std::vector<ChatMessage>& messages,
                 ChatRole role) {
    const SplitUrl url = split_url(endpoint.base_url);

    httplib::Headers headers;
    if (!endpoint.api_key_env.empty()) {
        const char* key = std::getenv(endpoint.api_key_env.c_str());
        if (!key || !*key)
            throw AuthMissing("environment variable " + endpoint.api_key_env +
                              " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body;
    body["model"] = endpoint.model;
    body["temperature"] = endpoint.temperature;
    body["top_p"] = top_p_for(endpoint, role);
    body["max_tokens"] =
        role == ChatRole::Answer ? endpoint.max_tokens_answer : endpoint.max_tokens;
    body["messages"] = json::array();
    for (const ChatMessage& m : messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        httplib::Client client(url.origin);
        client.set_connection_timeout(0, endpoint.timeout_ms * 1000LL);
        client.set_read_timeout(endpoint.timeout_ms / 1000, (endpoint.timeout_ms % 1000) * 1000);
        client.set_default_headers(headers);

        httplib::Result res =
            client.Post(url.prefix + "/chat/completions", payload, "application/json");
        if (!res) {
            if (res.error() == httplib::Error::ConnectionTimeout)
                last_error = "connection to " + url.origin + " timed out";
            else
                last_error = "no response from " + url.origin + " (" +
                             httplib::to_string(res.error()) + ")";
            continue;  // transient: retry once
        }
        if (res->status >= 500) {
            last_error = "status " + std::to_string(res->status) + " from " + url.origin;
            continue;  // transient: retry once
        }
        if (res->status < 200 || res->status >= 300)
            throw Transport("status " + std::to_string(res->status) + " from " +
                            url.origin + ": " + res->body.substr(0, 200));
        try {
            json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw Transport("malformed completion from " + url.origin + ": " + e.what());
        }
    }
    if (last_error.find("timed out") != std::string::npos) throw Timeout(last_error);
    throw Transport(last_error);
}

bool post_json(const std::string& url, const std::string& json_body) {
    try {
        const SplitUrl split = split_url(url);
        httplib::Client client(split.origin);
        httplib::Result res = client.Post(split.prefix, json_body, "application/json");
        return res && res->status >= 200 && res->status < 300;
    } catch (const Error&) {
        return false;
    }
}

std::string sanitize_proposal(std::string name) {
    for (char& c : name)
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    if (name.size() > kMaxProposalLength) name.resize(kMaxProposalLength);
    // re-trim after the edits above
    std::size_t b = 0, e = name.size();
    while (b < e && std::isspace(static_cast<unsigned char>(name[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(name[e - 1]))) --e;
    return name.substr(b, e - b);
}

std::optional<std::string> LiveBackend::propose_domain(
    const std::vector<std::string>& parent_path,
    const KnowledgeTree& tree,
    SplitRng& rng) {
    (void)tree;
    (void)rng;
    PromptParams params;
    PromptKind kind;
    switch (parent_path.size()) {
        case 0:
            kind = PromptKind::ExpandMain;
            break;
        case 1:
            kind = PromptKind::ExpandSecondary;
            params.main = parent_path[0];
            break;
        case 2:
            kind = PromptKind::ExpandSub;
            params.main = parent_path[0];
            params.secondary = parent_path[1];
            break;
        default:
            return std::nullopt;  // leaves take no children
    }
    try {
        const std::string completion = chat(endpoint_, render_prompt(kind, params),
                                            ChatRole::Propose);
        std::string name =
            sanitize_proposal(parse_marked(completion, kPropositionStart, kPropositionEnd));
        if (name.empty()) return std::nullopt;
        return name;
    } catch (const Error&) {
        return std::nullopt;  // dropped proposal
    }
}

std::string LiveBackend::generate_question(const PathNames& path,
                                           QuestionStyle style,
                                           SplitRng& rng) {
    (void)rng;
    PromptParams params;
    params.main = path.main;
    params.secondary = path.secondary;
    params.sub = path.sub;
    params.style = style;
    const std::string completion =
        chat(endpoint_, render_prompt(PromptKind::Inquiry, params), ChatRole::Inquire);
    return parse_marked(completion, kQuestionStart, kQuestionEnd);
}

AnswerResult LiveBackend::answer(const std::string& question,
                                 const PathNames& path,
                                 SplitRng& rng) {
    (void)path;
    (void)rng;
    return {chat(endpoint_, {{"user", question}}, ChatRole::Answer), std::nullopt};
}

std::optional<int> LiveBackend::select_best(const std::string& question,
                                            const std::vector<AnswerResult>& answers,
                                            SplitRng& rng) {
    (void)rng;
    PromptParams params;
    params.question = question;
    for (const AnswerResult& a : answers) params.answers.push_back(a.text);
    try {
        const std::string completion =
            chat(endpoint_, render_prompt(PromptKind::Select, params), ChatRole::Judge);
        const std::string verdict =
            parse_marked(completion, kBestAnswerStart, kBestAnswerEnd);
        if (verdict.empty() || verdict.size() > 9) return std::nullopt;
        for (char c : verdict)
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        const int index = std::stoi(verdict);
        if (index < 1 || index > static_cast<int>(answers.size())) return std::nullopt;
        return index;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace treefuse
