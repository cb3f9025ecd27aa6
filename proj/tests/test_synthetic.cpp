#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "treefuse/synthetic.hpp"

using namespace treefuse;

namespace {

// ---- independent oracle, written before the assertions it feeds ----
//
// Exact source-win probability for one harvest when all K sources share
// skill q, the target has skill t, and judging is argmax quality with
// uniform ties over {0,1} qualities:
//   j sources succeed (binomial), reward = j/(j+1) if the target also
//   succeeded, 1 if it failed and j >= 1, K/(K+1) if everything failed.
double exact_source_win(int k, double q, double t) {
    auto choose = [](int n, int r) {
        double c = 1.0;
        for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
        return c;
    };
    double p = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double pj = choose(k, j) * std::pow(q, j) * std::pow(1.0 - q, k - j);
        double win_given_target_ok = (j >= 1) ? static_cast<double>(j) / (j + 1) : 0.0;
        double win_given_target_bad =
            (j >= 1) ? 1.0 : static_cast<double>(k) / (k + 1);
        p += pj * (t * win_given_target_ok + (1.0 - t) * win_given_target_bad);
    }
    return p;
}

PathNames chain(const std::string& main, const std::string& secondary,
                const std::string& sub) {
    return PathNames{main, secondary, sub};
}

}  // namespace

TEST_CASE("skill resolution walks leaf, secondary, main, then the default") {
    SyntheticWorldConfig cfg;
    cfg.default_source_skill = 0.6;
    cfg.default_target_skill = 0.3;
    cfg.skills = {{1, "Group Theory", 0.9},
                  {1, "Algebra", 0.2},
                  {1, "Mathematics", 0.1}};
    SyntheticWorld world(cfg);

    CHECK(world.skill(1, chain("Mathematics", "Algebra", "Group Theory")) == 0.9);
    CHECK(world.skill(1, chain("Mathematics", "Algebra", "Ring Theory")) == 0.2);
    CHECK(world.skill(1, chain("Mathematics", "Geometry", "Curves")) == 0.1);
    CHECK(world.skill(1, chain("Physics", "Optics", "Lenses")) == 0.6);
    // override names match trim/case-insensitively
    CHECK(world.skill(1, chain("mathematics", " ALGEBRA ", "x")) == 0.2);
    // other models see none of model 1's overrides
    CHECK(world.skill(2, chain("Mathematics", "Algebra", "Group Theory")) == 0.6);
    CHECK(world.skill(kTargetModel, chain("Mathematics", "Algebra", "Group Theory")) ==
          0.3);
}

TEST_CASE("training bumps only the target, per leaf, by eta") {
    SyntheticWorldConfig cfg;
    cfg.eta = 0.01;
    cfg.default_target_skill = 0.3;
    SyntheticWorld world(cfg);
    QaRecord rec;
    rec.sub = "Group Theory";
    for (int i = 0; i < 10; ++i) world.train(rec);

    PathNames p = chain("Mathematics", "Algebra", "Group Theory");
    CHECK(world.skill(kTargetModel, p) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(world.skill(1, p) == 0.6);  // sources never learn
    // a different leaf is untouched
    CHECK(world.skill(kTargetModel, chain("Mathematics", "Algebra", "Ring Theory")) ==
          0.3);
    // the learned delta stacks on top of an override
    SyntheticWorldConfig cfg2 = cfg;
    cfg2.skills = {{kTargetModel, "Group Theory", 0.5}};
    SyntheticWorld world2(cfg2);
    for (int i = 0; i < 10; ++i) world2.train(rec);
    CHECK(world2.skill(kTargetModel, p) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("skills are clamped to [0.01, 0.99] at every entry point") {
    SyntheticWorldConfig cfg;
    cfg.eta = 0.5;
    cfg.skills = {{1, "Algebra", 7.0}, {2, "Algebra", -3.0}};
    cfg.drift = {{1, 1, "Geometry", 2.0}};
    SyntheticWorld world(cfg);
    PathNames p = chain("Mathematics", "Algebra", "x");
    CHECK(world.skill(1, p) == 0.99);
    CHECK(world.skill(2, p) == 0.01);
    world.apply_drift(1);
    CHECK(world.skill(1, chain("Mathematics", "Geometry", "y")) == 0.99);
    QaRecord rec;
    rec.sub = "x";
    for (int i = 0; i < 5; ++i) world.train(rec);  // 0.3 + 2.5 without the clamp
    CHECK(world.skill(kTargetModel, p) == 0.99);
}

TEST_CASE("drift applies exactly at its scheduled round") {
    SyntheticWorldConfig cfg;
    cfg.drift = {{3, 1, "Algebra", 0.05}, {3, 2, "Algebra", 0.95}, {5, 1, "Algebra", 0.7}};
    SyntheticWorld world(cfg);
    PathNames p = chain("Mathematics", "Algebra", "x");
    world.apply_drift(2);
    CHECK(world.skill(1, p) == 0.6);
    world.apply_drift(3);
    CHECK(world.skill(1, p) == 0.05);
    CHECK(world.skill(2, p) == 0.95);
    world.apply_drift(4);
    CHECK(world.skill(1, p) == 0.05);
    world.apply_drift(5);
    CHECK(world.skill(1, p) == 0.7);
}

TEST_CASE("the name stream consumes pools in order, then mints or dries up") {
    SUBCASE("pool first, minted names after, cursor never resets") {
        SyntheticWorldConfig cfg;
        cfg.level_names = {{"Science", "Arts"}, {"Physics"}};
        cfg.unbounded_names = true;
        SyntheticWorld world(cfg);
        CHECK(world.next_name(1) == "Science");
        CHECK(world.next_name(1) == "Arts");
        CHECK(world.next_name(1) == "field-2");
        CHECK(world.next_name(1) == "field-3");
        CHECK(world.next_name(2) == "Physics");
        CHECK(world.next_name(2) == "area-1");
        CHECK(world.next_name(3) == "topic-0");  // no pool at all for level 3
    }
    SUBCASE("exhaustion without minting is a dropped proposal") {
        SyntheticWorldConfig cfg;
        cfg.level_names = {{"Science"}};
        cfg.unbounded_names = false;
        SyntheticWorld world(cfg);
        CHECK(world.next_name(1) == "Science");
        CHECK_FALSE(world.next_name(1).has_value());
        CHECK_FALSE(world.next_name(2).has_value());
    }
}

TEST_CASE("synthetic proposals gate on the sprout success rate") {
    KnowledgeTree tree;
    SUBCASE("rate 1 always proposes, at the level below the parent") {
        SyntheticWorldConfig cfg;
        cfg.sprout_success_rate = 1.0;
        cfg.level_names = {{"Science"}, {"Physics"}, {"Optics"}};
        SyntheticWorld world(cfg);
        SyntheticBackend backend(world, 1);
        SplitRng rng(61);
        CHECK(backend.propose_domain({}, tree, rng) == "Science");
        CHECK(backend.propose_domain({"Science"}, tree, rng) == "Physics");
        CHECK(backend.propose_domain({"Science", "Physics"}, tree, rng) == "Optics");
    }
    SUBCASE("rate 0 never proposes and never consumes a name") {
        SyntheticWorldConfig cfg;
        cfg.sprout_success_rate = 0.0;
        cfg.level_names = {{"Science"}};
        SyntheticWorld world(cfg);
        SyntheticBackend backend(world, 1);
        SplitRng rng(62);
        for (int i = 0; i < 20; ++i)
            CHECK_FALSE(backend.propose_domain({}, tree, rng).has_value());
        CHECK(world.state().name_cursors.at(0) == 0);
    }
}

TEST_CASE("synthetic questions embed the whole chain and the style") {
    SyntheticWorldConfig cfg;
    SyntheticWorld world(cfg);
    SyntheticBackend backend(world, 1);
    SplitRng rng(63);
    std::string q = backend.generate_question(
        chain("Mathematics", "Algebra", "Group Theory"), QuestionStyle::Coding, rng);
    CHECK(q.find("Mathematics") != std::string::npos);
    CHECK(q.find("Algebra") != std::string::npos);
    CHECK(q.find("Group Theory") != std::string::npos);
    CHECK(q.find("3") != std::string::npos);
}

TEST_CASE("synthetic answers carry a Bernoulli(skill) latent quality") {
    SyntheticWorldConfig cfg;
    cfg.skills = {{1, "Algebra", 0.99}, {2, "Algebra", 0.01}};
    SyntheticWorld world(cfg);
    SyntheticBackend strong(world, 1), weak(world, 2);
    PathNames p = chain("Mathematics", "Algebra", "x");
    SplitRng rng(64);
    int strong_ok = 0, weak_ok = 0;
    for (int i = 0; i < 2000; ++i) {
        if (strong.answer("q", p, rng).quality == 1.0) ++strong_ok;
        if (weak.answer("q", p, rng).quality == 1.0) ++weak_ok;
    }
    CHECK(strong_ok > 1900);
    CHECK(weak_ok < 100);
}

TEST_CASE("synthetic judging is argmax quality with uniform ties") {
    SyntheticWorldConfig cfg;
    SyntheticWorld world(cfg);
    SyntheticBackend judge(world, 1);
    SplitRng rng(65);
    auto q = [](double v) { return AnswerResult{"", v}; };

    CHECK(judge.select_best("?", {q(1), q(0), q(0)}, rng) == 1);
    CHECK(judge.select_best("?", {q(0), q(0), q(1)}, rng) == 3);

    std::map<int, int> tie_counts;
    for (int i = 0; i < 4000; ++i) {
        SplitRng r = SplitRng::derive(66, {static_cast<std::uint64_t>(i)});
        ++tie_counts[*judge.select_best("?", {q(1), q(1), q(0)}, r)];
    }
    CHECK(tie_counts.size() == 2);
    CHECK(static_cast<double>(tie_counts[1]) / 4000 == doctest::Approx(0.5).epsilon(0.08));

    std::map<int, int> zero_counts;
    for (int i = 0; i < 4000; ++i) {
        SplitRng r = SplitRng::derive(67, {static_cast<std::uint64_t>(i)});
        ++zero_counts[*judge.select_best("?", {q(0), q(0), q(0)}, r)];
    }
    CHECK(zero_counts.size() == 3);  // an all-failure field still elects someone
}

TEST_CASE("ensemble exposes K sources plus the target") {
    SyntheticWorldConfig cfg;
    cfg.num_sources = 3;
    SyntheticWorld world(cfg);
    SyntheticEnsemble ensemble(world);
    REQUIRE(ensemble.backends.size() == 4);
    REQUIRE(ensemble.sources.size() == 3);
    CHECK(ensemble.target == ensemble.backends[0].get());
    for (int i = 0; i < 3; ++i)
        CHECK(ensemble.sources[i] == ensemble.backends[i + 1].get());
}

TEST_CASE("harvest reward frequency matches the exact enumeration") {
    KnowledgeTree tree;
    DomainId main = tree.add_domain(kRootId, "Mathematics");
    DomainId secondary = tree.add_domain(main, "Algebra");
    DomainId sub = tree.add_domain(secondary, "Group Theory");
    Path path = tree.path_of(sub);

    auto run = [&](int k, double q, double t, std::uint64_t seed) {
        SyntheticWorldConfig cfg;
        cfg.num_sources = k;
        cfg.default_source_skill = q;
        cfg.default_target_skill = t;
        SyntheticWorld world(cfg);
        SyntheticEnsemble ensemble(world);
        int wins = 0;
        const int n = 4000;
        for (int i = 0; i < n; ++i) {
            SplitRng rng = SplitRng::derive(seed, {static_cast<std::uint64_t>(i)});
            wins += harvest(tree, path, ensemble.sources, *ensemble.target, rng).reward;
        }
        return static_cast<double>(wins) / n;
    };

    SUBCASE("dominant target, two weak sources") {
        const double expect = exact_source_win(2, 0.2, 0.9);
        CHECK(expect == doctest::Approx(0.2466666667).epsilon(1e-9));
        CHECK(run(2, 0.2, 0.9, 71) == doctest::Approx(expect).epsilon(0.1));
    }
    SUBCASE("dominant sources, weak target") {
        const double expect = exact_source_win(3, 0.9, 0.1);
        CHECK(run(3, 0.9, 0.1, 72) == doctest::Approx(expect).epsilon(0.05));
    }
    SUBCASE("everyone equal still favors the sources by count") {
        const double expect = exact_source_win(3, 0.5, 0.5);
        CHECK(run(3, 0.5, 0.5, 73) == doctest::Approx(expect).epsilon(0.05));
    }
}

TEST_CASE("world state survives a restore round-trip") {
    SyntheticWorldConfig cfg;
    cfg.eta = 0.05;
    cfg.level_names = {{"Science", "Arts"}};
    cfg.drift = {{2, 1, "Algebra", 0.9}};
    SyntheticWorld world(cfg);
    world.next_name(1);
    world.apply_drift(2);
    QaRecord rec;
    rec.sub = "Group Theory";
    world.train(rec);
    SyntheticWorld::State saved = world.state();

    SyntheticWorld fresh(cfg);
    fresh.restore(saved);
    CHECK(fresh.skill(1, chain("Mathematics", "Algebra", "x")) == 0.9);
    CHECK(fresh.skill(kTargetModel, chain("m", "s", "Group Theory")) ==
          doctest::Approx(0.35).epsilon(1e-12));
    CHECK(fresh.next_name(1) == "Arts");  // cursor restored mid-pool
}

TEST_CASE("apply_training is one bump per record") {
    SyntheticWorldConfig cfg;
    cfg.eta = 0.01;
    SyntheticWorld world(cfg);
    std::vector<QaRecord> batch(10);
    for (auto& r : batch) r.sub = "Group Theory";
    batch[9].sub = "Ring Theory";
    apply_training(world, batch);
    CHECK(world.skill(kTargetModel, chain("m", "s", "Group Theory")) ==
          doctest::Approx(0.39).epsilon(1e-12));
    CHECK(world.skill(kTargetModel, chain("m", "s", "Ring Theory")) ==
          doctest::Approx(0.31).epsilon(1e-12));
}
