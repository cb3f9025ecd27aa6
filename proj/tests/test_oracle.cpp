#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "treefuse/oracle.hpp"

using namespace treefuse;

namespace {

// A fully scripted backend: proposals and verdicts pop off queues, questions
// can be made to fail a set number of times first.
struct ScriptedBackend : ModelBackend {
    std::deque<std::optional<std::string>> proposals;
    std::optional<std::string> propose_fallback;
    std::string question_text = "What is the order of S3?";
    int question_failures = 0;  // throw on this many leading calls
    int question_calls = 0;
    std::string answer_text = "answer";
    std::deque<std::optional<int>> verdicts;
    std::optional<int> verdict_fallback;
    int select_calls = 0;

    std::optional<std::string> propose_domain(const std::vector<std::string>&,
                                              const KnowledgeTree&,
                                              SplitRng&) override {
        if (proposals.empty()) return propose_fallback;
        auto v = proposals.front();
        proposals.pop_front();
        return v;
    }
    std::string generate_question(const PathNames&, QuestionStyle, SplitRng&) override {
        if (question_calls++ < question_failures)
            throw Transport("scripted question failure");
        return question_text;
    }
    AnswerResult answer(const std::string&, const PathNames&, SplitRng&) override {
        return {answer_text, std::nullopt};
    }
    std::optional<int> select_best(const std::string&,
                                   const std::vector<AnswerResult>&,
                                   SplitRng&) override {
        ++select_calls;
        if (verdicts.empty()) return verdict_fallback;
        auto v = verdicts.front();
        verdicts.pop_front();
        return v;
    }
};

struct ChainTree {
    KnowledgeTree tree;
    DomainId main, secondary, sub;
    ChainTree() {
        main = tree.add_domain(kRootId, "Mathematics");
        secondary = tree.add_domain(main, "Algebra");
        sub = tree.add_domain(secondary, "Group Theory");
    }
};

}  // namespace

TEST_CASE("sprout elects the modal surviving proposal") {
    ChainTree fixture;
    SplitRng rng(21);

    SUBCASE("clear majority wins regardless of order") {
        ScriptedBackend a, b, c;
        a.proposals = {std::optional<std::string>{"Topology"}};
        b.proposals = {std::optional<std::string>{"Analysis"}};
        c.proposals = {std::optional<std::string>{"Topology"}};
        std::vector<ModelBackend*> sources{&a, &b, &c};
        auto name = sprout(fixture.tree, fixture.main, sources, rng);
        REQUIRE(name.has_value());
        CHECK(*name == "Topology");
    }
    SUBCASE("votes merge case- and whitespace-insensitively, first spelling kept") {
        ScriptedBackend a, b, c;
        a.proposals = {std::optional<std::string>{"Number Theory"}};
        b.proposals = {std::optional<std::string>{"  number theory "}};
        c.proposals = {std::optional<std::string>{"NUMBER THEORY"}};
        std::vector<ModelBackend*> sources{&a, &b, &c};
        auto name = sprout(fixture.tree, fixture.main, sources, rng);
        REQUIRE(name.has_value());
        CHECK(*name == "Number Theory");
    }
    SUBCASE("names already in the tree are struck from the ballot") {
        ScriptedBackend a, b, c;
        a.proposals = {std::optional<std::string>{"algebra"}};  // duplicate of a node
        b.proposals = {std::optional<std::string>{"algebra"}};
        c.proposals = {std::optional<std::string>{"Geometry"}};
        std::vector<ModelBackend*> sources{&a, &b, &c};
        auto name = sprout(fixture.tree, fixture.main, sources, rng);
        REQUIRE(name.has_value());
        CHECK(*name == "Geometry");
    }
    SUBCASE("failures and blank names drop out; nothing surviving is a failure") {
        ScriptedBackend a, b, c;
        a.proposals = {std::optional<std::string>{}};
        b.proposals = {std::optional<std::string>{"   "}};
        c.proposals = {std::optional<std::string>{"mathematics"}};  // already present
        std::vector<ModelBackend*> sources{&a, &b, &c};
        CHECK_FALSE(sprout(fixture.tree, fixture.main, sources, rng).has_value());
    }
}

TEST_CASE("sprout ties break uniformly") {
    ChainTree fixture;
    std::map<std::string, int> wins;
    const int trials = 9000;
    for (int t = 0; t < trials; ++t) {
        ScriptedBackend a, b, c;
        a.proposals = {std::optional<std::string>{"Topology"}};
        b.proposals = {std::optional<std::string>{"Analysis"}};
        c.proposals = {std::optional<std::string>{"Geometry"}};
        std::vector<ModelBackend*> sources{&a, &b, &c};
        SplitRng rng = SplitRng::derive(77, {static_cast<std::uint64_t>(t)});
        auto name = sprout(fixture.tree, fixture.main, sources, rng);
        REQUIRE(name.has_value());
        ++wins[*name];
    }
    REQUIRE(wins.size() == 3);
    for (const auto& [name, count] : wins)
        CHECK(static_cast<double>(count) / trials == doctest::Approx(1.0 / 3).epsilon(0.1));
}

TEST_CASE("sprout modal election agrees with a brute-force count") {
    ChainTree fixture;
    const std::array<std::string, 4> ballot{"Topology", "Analysis", "Geometry", "Logic"};
    SplitRng pick(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(pick.below(6));
        std::vector<ScriptedBackend> backends(n);
        std::map<std::string, int> count;
        std::vector<ModelBackend*> sources;
        for (int i = 0; i < n; ++i) {
            const std::string& name = ballot[pick.below(ballot.size())];
            backends[i].proposals = {std::optional<std::string>{name}};
            ++count[name];
            sources.push_back(&backends[i]);
        }
        int top = 0;
        for (const auto& [name, c] : count) top = std::max(top, c);
        SplitRng rng = SplitRng::derive(55, {static_cast<std::uint64_t>(trial)});
        auto winner = sprout(fixture.tree, fixture.main, sources, rng);
        REQUIRE(winner.has_value());
        CHECK(count.at(*winner) == top);  // always a modal name
    }
}

TEST_CASE("reward is 1 exactly when a source answer won") {
    CHECK(reward_from_best_index(1, 3) == 1);
    CHECK(reward_from_best_index(2, 3) == 1);
    CHECK(reward_from_best_index(3, 3) == 1);
    CHECK(reward_from_best_index(4, 3) == 0);  // the target
    CHECK(reward_from_best_index(1, 1) == 1);
    CHECK(reward_from_best_index(2, 1) == 0);
    CHECK_THROWS_AS(reward_from_best_index(0, 3), OutOfRange);
    CHECK_THROWS_AS(reward_from_best_index(-2, 3), OutOfRange);
    CHECK_THROWS_AS(reward_from_best_index(5, 3), OutOfRange);
}

TEST_CASE("harvest wires the full inquiry cycle") {
    ChainTree fixture;
    Path path = fixture.tree.path_of(fixture.sub);

    SUBCASE("record carries the chain names, question, and judged answer") {
        ScriptedBackend s1, s2, s3, target;
        s1.answer_text = "from s1";
        s2.answer_text = "from s2";
        s3.answer_text = "from s3";
        target.answer_text = "from target";
        for (ScriptedBackend* b : {&s1, &s2, &s3}) b->verdict_fallback = 4;
        std::vector<ModelBackend*> sources{&s1, &s2, &s3};
        SplitRng rng(41);
        QaRecord rec = harvest(fixture.tree, path, sources, target, rng);
        CHECK(rec.main == "Mathematics");
        CHECK(rec.secondary == "Algebra");
        CHECK(rec.sub == "Group Theory");
        CHECK(rec.leaf == fixture.sub);
        CHECK(rec.question == "What is the order of S3?");
        CHECK(rec.best_index == 4);
        CHECK(rec.answer == "from target");  // index 4 = the target's slot
        CHECK(rec.reward == 0);
        CHECK(rec.leader_id >= 1);
        CHECK(rec.leader_id <= 3);
        CHECK(static_cast<int>(rec.style) >= 1);
        CHECK(static_cast<int>(rec.style) <= 6);
        CHECK(rec.round == 0);  // left for the caller
        CHECK(rec.seq == 0);
    }

    SUBCASE("answers sit in source-id order with the target last") {
        ScriptedBackend s1, s2, target;
        s1.answer_text = "alpha";
        s2.answer_text = "beta";
        target.answer_text = "omega";
        std::vector<ModelBackend*> sources{&s1, &s2};
        for (int want = 1; want <= 3; ++want) {
            s1.verdict_fallback = want;
            s2.verdict_fallback = want;
            SplitRng rng(42);
            QaRecord rec = harvest(fixture.tree, path, sources, target, rng);
            CHECK(rec.best_index == want);
            CHECK(rec.answer == (want == 1 ? "alpha" : want == 2 ? "beta" : "omega"));
            CHECK(rec.reward == (want <= 2 ? 1 : 0));
        }
    }

    SUBCASE("leaders and styles are drawn uniformly") {
        ScriptedBackend s1, s2, s3, target;
        for (ScriptedBackend* b : {&s1, &s2, &s3}) b->verdict_fallback = 1;
        std::vector<ModelBackend*> sources{&s1, &s2, &s3};
        std::array<int, 4> leader_count{};
        std::array<int, 7> style_count{};
        const int n = 3000;
        for (int i = 0; i < n; ++i) {
            SplitRng rng = SplitRng::derive(43, {static_cast<std::uint64_t>(i)});
            QaRecord rec = harvest(fixture.tree, path, sources, target, rng);
            ++leader_count[rec.leader_id];
            ++style_count[static_cast<int>(rec.style)];
        }
        for (int l = 1; l <= 3; ++l)
            CHECK(static_cast<double>(leader_count[l]) / n ==
                  doctest::Approx(1.0 / 3).epsilon(0.1));
        for (int s = 1; s <= 6; ++s)
            CHECK(static_cast<double>(style_count[s]) / n ==
                  doctest::Approx(1.0 / 6).epsilon(0.15));
    }
}

TEST_CASE("harvest retry semantics") {
    ChainTree fixture;
    Path path = fixture.tree.path_of(fixture.sub);

    SUBCASE("one question failure is retried; two abort the sample") {
        ScriptedBackend leader, target;
        leader.question_failures = 1;
        leader.verdict_fallback = 1;
        std::vector<ModelBackend*> sources{&leader};
        SplitRng rng(51);
        QaRecord rec = harvest(fixture.tree, path, sources, target, rng);
        CHECK(rec.question == leader.question_text);
        CHECK(leader.question_calls == 2);

        ScriptedBackend broken, target2;
        broken.question_failures = 2;
        broken.verdict_fallback = 1;
        std::vector<ModelBackend*> sources2{&broken};
        SplitRng rng2(52);
        CHECK_THROWS_AS(harvest(fixture.tree, path, sources2, target2, rng2),
                        QuestionGenFailed);
        CHECK(broken.question_calls == 2);  // no third attempt
    }

    SUBCASE("an unparsable verdict is retried once") {
        ScriptedBackend leader, target;
        leader.verdicts = {std::optional<int>{}, std::optional<int>{1}};
        std::vector<ModelBackend*> sources{&leader};
        SplitRng rng(53);
        QaRecord rec = harvest(fixture.tree, path, sources, target, rng);
        CHECK(rec.best_index == 1);
        CHECK(leader.select_calls == 2);
    }

    SUBCASE("two unparsable verdicts abort the sample") {
        ScriptedBackend leader, target;
        leader.verdicts = {std::optional<int>{}, std::optional<int>{}};
        leader.verdict_fallback = 1;  // never reached
        std::vector<ModelBackend*> sources{&leader};
        SplitRng rng(54);
        CHECK_THROWS_AS(harvest(fixture.tree, path, sources, target, rng),
                        JudgeParseFailed);
        CHECK(leader.select_calls == 2);
    }

    SUBCASE("an out-of-bounds verdict burns a retry like a parse failure") {
        ScriptedBackend leader, target;
        leader.verdicts = {std::optional<int>{7}, std::optional<int>{2}};
        std::vector<ModelBackend*> sources{&leader};
        SplitRng rng(55);
        QaRecord rec = harvest(fixture.tree, path, sources, target, rng);
        CHECK(rec.best_index == 2);  // the target (K=1)
        CHECK(rec.reward == 0);

        ScriptedBackend stuck, target2;
        stuck.verdict_fallback = 0;  // forever out of bounds
        std::vector<ModelBackend*> sources2{&stuck};
        SplitRng rng2(56);
        CHECK_THROWS_AS(harvest(fixture.tree, path, sources2, target2, rng2),
                        JudgeParseFailed);
        CHECK(stuck.select_calls == 2);
    }
}
