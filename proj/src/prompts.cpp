#include "treefuse/prompts.hpp"

#include <cctype>

#include "treefuse/errors.hpp"

namespace treefuse {

std::string_view style_sentence(QuestionStyle style) {
    switch (style) {
        case QuestionStyle::Stepwise:
            return "The question should be a high-difficulty one that requires a "
                   "step-by-step solution, with the answer numbered accordingly.";
        case QuestionStyle::OpenEnded:
            return "The question should be open-ended and require the answer to "
                   "include at least two different perspectives.";
        case QuestionStyle::Coding:
            return "The question should require coding to solve, with the answer "
                   "presented in Markdown code block format.";
        case QuestionStyle::Comparative:
            return "The question should require comparative analysis, with the "
                   "answer displayed in a table format to show pros and cons.";
        case QuestionStyle::CrossField:
            return "The question should require association with knowledge from "
                   "other fields (e.g., math + music).";
        case QuestionStyle::Casual:
            return "The question should be styled as casual conversation and Q&A "
                   "in daily life, with the tone and speaking style of the reply "
                   "specified (e.g., using metaphors, rhyming).";
    }
    throw OutOfRange("unknown question style");
}

namespace {

const std::string& require(const std::optional<std::string>& field, const char* name) {
    if (!field) throw MissingParam(std::string("prompt requires '") + name + "'");
    return *field;
}

// Shared tail of the three expansion prompts.
constexpr std::string_view kExpandTail =
    "**STRICT REQUIREMENTS**:\n"
    "\n"
    "1. Must propose **EXACTLY ONE** new domain name\n"
    "\n"
    "2. The proposed domain must be a clearly defined academic field related to "
    "**natural sciences** (such as physics, chemistry), **social sciences** (such "
    "as law, philosophy), **humanities** (linguistics, art), **formal sciences** "
    "(such as mathematics, computer science), or **interdisciplinary** fields "
    "(such as medicine, social psychology, etc.).\n"
    "\n"
    "**STRICT RESPONSE FORMAT**:\n"
    "The proposed domain must be enclosed between [Proposition Start] and "
    "[Proposition End], following the format below:\n"
    "\n"
    "[Proposition Start]proposed domain[Proposition End]\n"
    "\n"
    "Now, please provide your proposed domain according to the requirements "
    "mentioned above.";

std::string render_expand_main() {
    return "I need to generate a hierarchical systematic knowledge tree. First, I "
           "need to determine a set of main subject domains, please use your world "
           "knowledge to propose a **Main Domain** that systematically taught in "
           "primary/secondary/higher education (e.g., in exact sciences, computer "
           "engineering, or other natural sciences and humanities), which should "
           "be as broad as possible to cover a wide range of child domains.\n\n" +
           std::string(kExpandTail);
}

std::string render_expand_secondary(const std::string& main) {
    return "This is a path of a hierarchical systematic knowledge tree: " + main +
           ", and now you need to propose a subject domain that logically and "
           "structurally follows this path, i.e., the domain you propose must be "
           "a secondary domain of " + main + ".\n\n" +
           std::string(kExpandTail);
}

std::string render_expand_sub(const std::string& main, const std::string& secondary) {
    return "This is a path of a hierarchical systematic knowledge tree: " + main +
           " → " + secondary +
           ", and now you need to propose a subject domain that logically and "
           "structurally follows this path, i.e., the domain you propose must be "
           "a specific sub-domain of " + secondary + ".\n\n" +
           std::string(kExpandTail);
}

std::string render_inquiry(const std::string& main, const std::string& secondary,
                           const std::string& sub, QuestionStyle style) {
    return "Now I need to create high-quality SFT data for LLM training, so I "
           "need you to generate such data.\n"
           "\n"
           "For now, **you only need to create one question**. I will provide you "
           "with a specified main domain, its secondary domain, and a further "
           "refined sub-domain in the format [Main Domain]→[Secondary "
           "domain]→[Sub-Domain].\n"
           "\n"
           "The corresponding topic is:\n"
           "\n" +
           main + " → " + secondary + " → " + sub +
           "\n"
           "\n"
           "The question must meet these requirements:\n"
           "\n"
           "1. Strictly fall within the scope of [Sub-Domain] - neither too broad "
           "nor too narrow, and the stem of the question should first contain "
           "sufficient background information or relevant conditions\n"
           "\n"
           "2. The question you provide should be a relatively challenging, but "
           "it must be solvable, and the answer should be definitive\n"
           "\n"
           "3. " + std::string(style_sentence(style)) +
           "\n"
           "\n"
           "4. Must be as original and concise as possible\n"
           "\n"
           "5. The expression style of the question should be **as diverse as "
           "possible**\n"
           "\n"
           "6. Enclose your response strictly between [Question Start] and "
           "[Question End] as shown below:\n"
           "\n"
           "[Question Start]Question[Question End]\n"
           "\n"
           "Now provide **EXACTLY ONE** question for the sub-domain **" + sub +
           "** within secondary domain **" + secondary + "** of main domain **" +
           main + "**.";
}

std::string render_select(const std::string& question,
                          const std::vector<std::string>& answers) {
    std::string serialized;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (i) serialized += "\n\n";
        serialized += "**Answer " + std::to_string(i + 1) + "**\n" + answers[i];
    }
    return "Please compare and evaluate the quality of the multiple answers to "
           "the following question, and return the index of the best one using "
           "**Arabic numerals**:\n"
           "\n"
           "**Question**\n"
           "\n" +
           question +
           "\n"
           "\n"
           "**Answers to be Evaluated**\n"
           "\n" +
           serialized +
           "\n"
           "\n"
           "**Evaluation Criteria**\n"
           "1. Accuracy (40%): Whether the answer correctly solves the problem "
           "and match the required response style.\n"
           "2. Clarity (30%): The expression is structured clearly and smoothly, "
           "and the content is concise without being verbose.\n"
           "3. Completeness (20%): Whether all necessary details are covered.\n"
           "4. Relevance (10%): Whether the answer closely relates to the "
           "question.\n"
           "\n"
           "**Additional Constraints**\n"
           "Incoherent and repetitive answers should be directly assigned a low "
           "score, regardless of whether they contain the correct answer.\n"
           "\n"
           "**Output Requirements**\n"
           "1. You only need to reply with which answer you consider to be the "
           "best answer, and return the index (1-digit) of the best answer "
           "enclosed between [Best Answer Start] and [Best Answer End], following "
           "the format below:\n"
           "\n"
           "The best answer is [Best Answer Start]index[Best Answer End].\n"
           "\n"
           "2. Only one index for the best answer can be returned.";
}

}  // namespace

std::vector<ChatMessage> render_prompt(PromptKind kind, const PromptParams& params) {
    std::string content;
    switch (kind) {
        case PromptKind::ExpandMain:
            content = render_expand_main();
            break;
        case PromptKind::ExpandSecondary:
            content = render_expand_secondary(require(params.main, "main"));
            break;
        case PromptKind::ExpandSub: {
            const std::string& main = require(params.main, "main");
            const std::string& secondary = require(params.secondary, "secondary");
            content = render_expand_sub(main, secondary);
            break;
        }
        case PromptKind::Inquiry: {
            if (!params.style) throw MissingParam("prompt requires 'style'");
            const std::string& main = require(params.main, "main");
            const std::string& secondary = require(params.secondary, "secondary");
            const std::string& sub = require(params.sub, "sub");
            content = render_inquiry(main, secondary, sub, *params.style);
            break;
        }
        case PromptKind::Select: {
            if (params.answers.empty()) throw MissingParam("prompt requires 'answers'");
            content = render_select(require(params.question, "question"), params.answers);
            break;
        }
    }
    return {{"user", std::move(content)}};
}

std::string parse_marked(std::string_view text,
                         std::string_view start,
                         std::string_view end) {
    const std::size_t s = text.find(start);
    if (s == std::string_view::npos)
        throw MarkerNotFound("missing " + std::string(start));
    const std::size_t from = s + start.size();
    const std::size_t e = text.find(end, from);
    if (e == std::string_view::npos)
        throw MarkerNotFound("missing " + std::string(end) + " after " + std::string(start));
    std::string_view inner = text.substr(from, e - from);
    std::size_t b = 0, n = inner.size();
    while (b < n && std::isspace(static_cast<unsigned char>(inner[b]))) ++b;
    while (n > b && std::isspace(static_cast<unsigned char>(inner[n - 1]))) --n;
    return std::string(inner.substr(b, n - b));
}

}  // namespace treefuse
