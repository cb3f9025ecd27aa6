#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "treefuse/knowledge_tree.hpp"

using namespace treefuse;

TEST_CASE("fresh tree holds a root and its expansion arm") {
    KnowledgeTree tree;
    REQUIRE(tree.size() == 2);
    CHECK(tree.domain(kRootId).level == 0);
    CHECK_FALSE(tree.domain(kRootId).is_unk);
    DomainId unk = tree.unk_child_of(kRootId);
    CHECK(tree.domain(unk).is_unk);
    CHECK(tree.domain(unk).level == 1);
    CHECK(tree.domain(unk).parent == kRootId);
    CHECK(tree.level_counts() == std::array<int, 3>{0, 0, 0});
}

TEST_CASE("normalize_name trims and lowercases ASCII") {
    CHECK(normalize_name("  Physics ") == "physics");
    CHECK(normalize_name("\tGroup  Theory\n") == "group  theory");
    CHECK(normalize_name("ALGEBRA") == "algebra");
    CHECK(normalize_name("   ") == "");
    CHECK(normalize_name("") == "");
}

TEST_CASE("adding a three-level chain") {
    KnowledgeTree tree;
    DomainId main = tree.add_domain(kRootId, "Mathematics");
    DomainId secondary = tree.add_domain(main, "Algebra");
    DomainId sub = tree.add_domain(secondary, "Group Theory");

    CHECK(tree.domain(main).level == 1);
    CHECK(tree.domain(secondary).level == 2);
    CHECK(tree.domain(sub).level == 3);
    CHECK(tree.domain(sub).parent == secondary);
    CHECK(tree.level_counts() == std::array<int, 3>{1, 1, 1});

    // every non-leaf named node owns an unk child, listed first
    CHECK(tree.domain(tree.unk_child_of(main)).is_unk);
    CHECK(tree.domain(tree.unk_child_of(secondary)).is_unk);
    CHECK(tree.children(main).front() == tree.unk_child_of(main));
    CHECK_THROWS_AS(tree.children(sub), InvalidDomain);  // leaves own nothing

    // 2 (root + unk) + 3 named + 2 unks under main/secondary
    CHECK(tree.size() == 7);

    SUBCASE("path_of climbs to the root") {
        Path p = tree.path_of(sub);
        REQUIRE(p.nodes.size() == 4);
        CHECK(p.nodes[0] == kRootId);
        CHECK(p.nodes[1] == main);
        CHECK(p.nodes[2] == secondary);
        CHECK(p.nodes[3] == sub);
        CHECK(p.valid);
        CHECK_FALSE(tree.path_of(secondary).valid);      // not a leaf
        CHECK_FALSE(tree.path_of(tree.unk_child_of(main)).valid);
    }

    SUBCASE("path_names excludes the root") {
        auto names = tree.path_names(sub);
        REQUIRE(names.size() == 3);
        CHECK(names[0] == "Mathematics");
        CHECK(names[1] == "Algebra");
        CHECK(names[2] == "Group Theory");
    }

    SUBCASE("children keeps insertion order after the unk") {
        DomainId analysis = tree.add_domain(main, "Analysis");
        DomainId logic = tree.add_domain(main, "Logic");
        const auto& kids = tree.children(main);
        REQUIRE(kids.size() == 4);
        CHECK(kids[0] == tree.unk_child_of(main));
        CHECK(kids[1] == secondary);
        CHECK(kids[2] == analysis);
        CHECK(kids[3] == logic);
    }
}

TEST_CASE("duplicate names are rejected tree-wide, case- and space-insensitively") {
    KnowledgeTree tree;
    DomainId main = tree.add_domain(kRootId, "Mathematics");
    CHECK_THROWS_AS(tree.add_domain(kRootId, "Mathematics"), DuplicateName);
    CHECK_THROWS_AS(tree.add_domain(kRootId, "  mathematics "), DuplicateName);
    CHECK_THROWS_AS(tree.add_domain(kRootId, "MATHEMATICS"), DuplicateName);
    // also across levels: the name space is global
    CHECK_THROWS_AS(tree.add_domain(main, "mathematics"), DuplicateName);
    CHECK(tree.contains_name(" MATHEMATICS  "));
    CHECK_FALSE(tree.contains_name("Physics"));
}

TEST_CASE("invalid parents are rejected") {
    KnowledgeTree tree;
    DomainId main = tree.add_domain(kRootId, "Mathematics");
    DomainId secondary = tree.add_domain(main, "Algebra");
    DomainId sub = tree.add_domain(secondary, "Group Theory");
    CHECK_THROWS_AS(tree.add_domain(999, "X"), InvalidParent);
    CHECK_THROWS_AS(tree.add_domain(tree.unk_child_of(main), "X"), InvalidParent);
    CHECK_THROWS_AS(tree.add_domain(sub, "X"), InvalidParent);  // leaf
    CHECK_THROWS_AS(tree.add_domain(kRootId, ""), InvalidParent);
    CHECK_THROWS_AS(tree.add_domain(kRootId, "   "), InvalidParent);
}

TEST_CASE("set_active flags a node without structural change") {
    KnowledgeTree tree;
    DomainId main = tree.add_domain(kRootId, "Mathematics");
    CHECK(tree.domain(main).active);
    tree.set_active(main, false);
    CHECK_FALSE(tree.domain(main).active);
    CHECK(tree.size() == 4);
    CHECK_THROWS_AS(tree.set_active(999, false), InvalidDomain);
}

TEST_CASE("restore rebuilds an identical tree from its node list") {
    KnowledgeTree tree;
    DomainId main = tree.add_domain(kRootId, "Mathematics");
    DomainId secondary = tree.add_domain(main, "Algebra");
    tree.add_domain(secondary, "Group Theory");
    tree.add_domain(main, "Analysis");
    tree.set_active(secondary, false);

    std::vector<Domain> nodes;
    for (DomainId id = 0; id < tree.size(); ++id) nodes.push_back(tree.domain(id));
    KnowledgeTree copy = KnowledgeTree::restore(nodes);

    REQUIRE(copy.size() == tree.size());
    for (DomainId id = 0; id < tree.size(); ++id) {
        CHECK(copy.domain(id).name == tree.domain(id).name);
        CHECK(copy.domain(id).level == tree.domain(id).level);
        CHECK(copy.domain(id).parent == tree.domain(id).parent);
        CHECK(copy.domain(id).is_unk == tree.domain(id).is_unk);
        CHECK(copy.domain(id).active == tree.domain(id).active);
        CHECK(copy.domain(id).children == tree.domain(id).children);
    }
    CHECK(copy.level_counts() == tree.level_counts());
    CHECK(copy.contains_name("group theory"));
    CHECK_THROWS_AS(copy.add_domain(kRootId, "analysis"), DuplicateName);
}

TEST_CASE("restore rejects structural nonsense") {
    KnowledgeTree tree;
    DomainId main = tree.add_domain(kRootId, "Mathematics");
    (void)main;
    std::vector<Domain> good;
    for (DomainId id = 0; id < tree.size(); ++id) good.push_back(tree.domain(id));

    SUBCASE("empty list") {
        CHECK_THROWS_AS(KnowledgeTree::restore({}), CorruptCheckpoint);
    }
    SUBCASE("ids out of order") {
        auto nodes = good;
        std::swap(nodes[1], nodes[2]);
        CHECK_THROWS_AS(KnowledgeTree::restore(nodes), CorruptCheckpoint);
    }
    SUBCASE("duplicate names") {
        auto nodes = good;
        Domain dup = nodes[2];  // the named main domain
        dup.id = static_cast<DomainId>(nodes.size());
        dup.name = "  MATHEMATICS ";
        nodes.push_back(dup);
        CHECK_THROWS_AS(KnowledgeTree::restore(nodes), CorruptCheckpoint);
    }
    SUBCASE("missing unk child") {
        auto nodes = good;
        nodes.pop_back();  // drops the main domain's unk
        CHECK_THROWS_AS(KnowledgeTree::restore(nodes), CorruptCheckpoint);
    }
    SUBCASE("parent after child") {
        auto nodes = good;
        nodes[2].parent = 3;
        CHECK_THROWS_AS(KnowledgeTree::restore(nodes), CorruptCheckpoint);
    }
    SUBCASE("named node with empty name") {
        auto nodes = good;
        nodes[2].name = "  ";
        CHECK_THROWS_AS(KnowledgeTree::restore(nodes), CorruptCheckpoint);
    }
}
