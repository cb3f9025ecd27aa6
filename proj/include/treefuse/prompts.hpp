#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treefuse/records.hpp"

namespace treefuse {

// Marker grammar used by every structured completion.
inline constexpr std::string_view kPropositionStart = "[Proposition Start]";
inline constexpr std::string_view kPropositionEnd = "[Proposition End]";
inline constexpr std::string_view kQuestionStart = "[Question Start]";
inline constexpr std::string_view kQuestionEnd = "[Question End]";
inline constexpr std::string_view kBestAnswerStart = "[Best Answer Start]";
inline constexpr std::string_view kBestAnswerEnd = "[Best Answer End]";

enum class PromptKind {
    ExpandMain,       // propose a level-1 domain
    ExpandSecondary,  // propose a level-2 domain under `main`
    ExpandSub,        // propose a level-3 domain under `main → secondary`
    Inquiry,          // generate one styled question for a full path
    Select,           // judge the best of the candidate answers
};

struct PromptParams {
    std::optional<std::string> main;
    std::optional<std::string> secondary;
    std::optional<std::string> sub;
    std::optional<QuestionStyle> style;
    std::optional<std::string> question;
    std::vector<std::string> answers;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

// The style directive sentence injected into inquiry prompts.
std::string_view style_sentence(QuestionStyle style);

// Renders the prompt for `kind` as a single user message. Throws
// MissingParam naming whichever field the kind requires but didn't get.
std::vector<ChatMessage> render_prompt(PromptKind kind, const PromptParams& params);

// Content of the first start..end marker pair: first occurrence of `start`,
// then the first `end` after it, trimmed of surrounding whitespace. Throws
// MarkerNotFound when no complete pair exists.
std::string parse_marked(std::string_view text,
                         std::string_view start,
                         std::string_view end);

}  // namespace treefuse
