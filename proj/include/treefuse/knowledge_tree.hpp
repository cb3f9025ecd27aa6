#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "treefuse/errors.hpp"

namespace treefuse {

using DomainId = std::uint32_t;
inline constexpr DomainId kRootId = 0;

// Three named levels below the root: Main = 1, Secondary = 2, Sub = 3.
inline constexpr int kLeafLevel = 3;

struct Domain {
    DomainId id = 0;
    std::string name;        // verbatim as proposed; "" for root and unk nodes
    int level = 0;           // 0 = root
    DomainId parent = kRootId;
    bool is_unk = false;
    bool active = true;      // false once the bandit deactivates this arm
    std::vector<DomainId> children;  // insertion order; unk child is first
};

// A root-to-leaf chain. nodes[0] is always the root; a valid path has all
// four levels filled and contains no unk member.
struct Path {
    std::vector<DomainId> nodes;
    bool valid = false;
};

// Trim + ASCII-lowercase; this is the key used for duplicate detection.
// Stored names keep their original spelling.
std::string normalize_name(std::string_view name);

// Root plus a growing 3-level hierarchy. Every non-unk node above the leaf
// level owns exactly one unk child (the expansion arm); leaves own nothing.
class KnowledgeTree {
public:
    KnowledgeTree();

    // Adds a named child under `parent` (root or a non-unk node at level < 3),
    // plus the child's own unk node when the child is not a leaf.
    // Throws InvalidParent / DuplicateName.
    DomainId add_domain(DomainId parent, std::string_view name);

    const Domain& domain(DomainId id) const;
    bool has(DomainId id) const { return id < nodes_.size(); }
    std::size_t size() const { return nodes_.size(); }

    // Children of a non-leaf, non-unk node, insertion order, unk first.
    // Throws InvalidDomain for unknown ids, unk nodes, and leaves.
    const std::vector<DomainId>& children(DomainId id) const;

    // The unk child of a non-leaf, non-unk node.
    DomainId unk_child_of(DomainId id) const;

    bool contains_name(std::string_view name) const;

    // Non-unk node counts per level (N1, N2, N3).
    std::array<int, 3> level_counts() const { return level_counts_; }

    // Root-to-node chain; valid iff the node is a non-unk leaf.
    Path path_of(DomainId id) const;

    // Names along the chain below the root (levels 1..node.level).
    std::vector<std::string> path_names(DomainId id) const;

    void set_active(DomainId id, bool active);

    // Rebuilds a tree from checkpointed nodes; ids must be dense and in
    // creation order (children lists are reconstructed from parent links).
    // Throws CorruptCheckpoint on structural nonsense.
    static KnowledgeTree restore(std::vector<Domain> nodes);

private:
    std::vector<Domain> nodes_;
    std::unordered_map<std::string, DomainId> by_name_;  // normalized -> id
    std::array<int, 3> level_counts_{0, 0, 0};

    DomainId append_node(DomainId parent, std::string_view name, bool is_unk);
};

}  // namespace treefuse
