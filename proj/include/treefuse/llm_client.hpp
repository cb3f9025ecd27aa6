#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treefuse/oracle.hpp"
#include "treefuse/prompts.hpp"

namespace treefuse {

struct EndpointConfig {
    std::string base_url;     // e.g. "http://127.0.0.1:8000/v1"
    std::string model;        // model name sent with each request
    std::string api_key_env;  // env var holding the bearer token, "" = none
    double temperature = 0.7;
    // Nucleus sampling per role: proposals and questions sample wide, answers
    // tighter, judging wide again.
    double top_p_generate = 0.95;
    double top_p_answer = 0.8;
    double top_p_judge = 0.95;
    int max_tokens = 1024;
    int max_tokens_answer = 4096;
    int timeout_ms = 120000;
};

enum class ChatRole { Propose, Inquire, Answer, Judge };

// One chat-completion call; request/response use the standard JSON wire
// format ({"model", "messages", "temperature", "top_p", "max_tokens"} in,
// choices[0].message.content out). Transient failures (network, 5xx) get
// exactly one retry; persistent ones throw Transport/Timeout. A configured
// api_key_env that is unset in the environment throws AuthMissing.
std::string chat(const EndpointConfig& endpoint,
                 const std::vector<ChatMessage>& messages,
                 ChatRole role);

// Proposal names coming off the wire get newlines collapsed and are capped
// at this many bytes.
inline constexpr std::size_t kMaxProposalLength = 80;
std::string sanitize_proposal(std::string name);

// Fire-and-check POST of a JSON payload to an absolute URL (the trainer
// webhook). Returns true on a 2xx response; never throws.
bool post_json(const std::string& url, const std::string& json_body);

// A chat endpoint participating in the ensemble protocol.
class LiveBackend : public ModelBackend {
public:
    explicit LiveBackend(EndpointConfig endpoint) : endpoint_(std::move(endpoint)) {}

    const EndpointConfig& endpoint() const { return endpoint_; }

    // Renders the expansion prompt for the parent's level, asks, and parses
    // the proposition markers; any failure is a dropped proposal (nullopt).
    std::optional<std::string> propose_domain(const std::vector<std::string>& parent_path,
                                              const KnowledgeTree& tree,
                                              SplitRng& rng) override;

    // Throws on transport or marker failure; the harvest retry handles it.
    std::string generate_question(const PathNames& path,
                                  QuestionStyle style,
                                  SplitRng& rng) override;

    AnswerResult answer(const std::string& question,
                        const PathNames& path,
                        SplitRng& rng) override;

    // nullopt when the verdict is missing markers, non-numeric, or out of
    // bounds — the caller retries once and then gives up on the sample.
    std::optional<int> select_best(const std::string& question,
                                   const std::vector<AnswerResult>& answers,
                                   SplitRng& rng) override;

private:
    EndpointConfig endpoint_;
};

}  // namespace treefuse
