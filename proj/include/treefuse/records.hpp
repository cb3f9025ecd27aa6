#pragma once

#include <cstdint>
#include <string>

#include "treefuse/knowledge_tree.hpp"

namespace treefuse {

// The six question-style directives a leader can be asked to follow.
enum class QuestionStyle : int {
    Stepwise = 1,      // high difficulty, numbered step-by-step answer
    OpenEnded = 2,     // at least two perspectives
    Coding = 3,        // solution requires code, Markdown block
    Comparative = 4,   // pros/cons table
    CrossField = 5,    // associate with another field (math + music, ...)
    Casual = 6,        // daily-life Q&A with a specified tone
};

inline constexpr int kNumStyles = 6;

// Domain names along a complete chain, root excluded.
struct PathNames {
    std::string main;
    std::string secondary;
    std::string sub;
};

// One harvested question/answer pair, as stored in a leaf pool and exported
// to the training dataset.
struct QaRecord {
    int round = 0;
    DomainId leaf = 0;
    std::string main;
    std::string secondary;
    std::string sub;
    QuestionStyle style = QuestionStyle::Stepwise;
    std::string question;
    std::string answer;        // the judged-best answer's text
    int leader_id = 0;         // 1-based source index
    int best_index = 0;        // 1-based position among the K+1 answers
    int reward = 0;            // 1 iff a source answer won
    std::int64_t seq = 0;      // global insertion order, for stable export
};

}  // namespace treefuse
