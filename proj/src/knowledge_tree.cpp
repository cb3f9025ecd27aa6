#include "treefuse/knowledge_tree.hpp"

#include <algorithm>
#include <cctype>

namespace treefuse {

std::string normalize_name(std::string_view name) {
    std::size_t begin = 0, end = name.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(name[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(name[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(name[i]))));
    return out;
}

KnowledgeTree::KnowledgeTree() {
    append_node(kRootId, "", false);  // root, parent field unused
    append_node(kRootId, "", true);   // root's unk arm
}

DomainId KnowledgeTree::append_node(DomainId parent, std::string_view name, bool is_unk) {
    DomainId id = static_cast<DomainId>(nodes_.size());
    Domain d;
    d.id = id;
    d.name = std::string(name);
    d.level = nodes_.empty() ? 0 : nodes_[parent].level + 1;
    d.parent = parent;
    d.is_unk = is_unk;
    nodes_.push_back(std::move(d));
    if (id != kRootId) nodes_[parent].children.push_back(id);
    return id;
}

DomainId KnowledgeTree::add_domain(DomainId parent, std::string_view name) {
    if (!has(parent)) throw InvalidParent("no such domain id " + std::to_string(parent));
    const Domain& p = nodes_[parent];
    if (p.is_unk) throw InvalidParent("unk nodes cannot take children");
    if (p.level >= kLeafLevel)
        throw InvalidParent("'" + p.name + "' is a leaf domain");

    std::string key = normalize_name(name);
    if (key.empty()) throw InvalidParent("domain name is empty");
    if (by_name_.count(key)) throw DuplicateName("'" + std::string(name) + "' already in the tree");

    DomainId child = append_node(parent, name, false);
    by_name_.emplace(std::move(key), child);
    ++level_counts_[nodes_[child].level - 1];
    if (nodes_[child].level < kLeafLevel) append_node(child, "", true);
    return child;
}

const Domain& KnowledgeTree::domain(DomainId id) const {
    if (!has(id)) throw InvalidDomain("no such domain id " + std::to_string(id));
    return nodes_[id];
}

const std::vector<DomainId>& KnowledgeTree::children(DomainId id) const {
    const Domain& d = domain(id);
    if (d.is_unk) throw InvalidDomain("unk nodes have no children");
    if (d.level >= kLeafLevel) throw InvalidDomain("leaf domains have no children");
    return d.children;
}

DomainId KnowledgeTree::unk_child_of(DomainId id) const {
    for (DomainId c : children(id))
        if (nodes_[c].is_unk) return c;
    throw InvalidDomain("node " + std::to_string(id) + " has no unk child");
}

bool KnowledgeTree::contains_name(std::string_view name) const {
    return by_name_.count(normalize_name(name)) != 0;
}

Path KnowledgeTree::path_of(DomainId id) const {
    const Domain& d = domain(id);
    Path path;
    DomainId cur = id;
    while (true) {
        path.nodes.push_back(cur);
        if (cur == kRootId) break;
        cur = nodes_[cur].parent;
    }
    std::reverse(path.nodes.begin(), path.nodes.end());
    path.valid = !d.is_unk && d.level == kLeafLevel;
    return path;
}

std::vector<std::string> KnowledgeTree::path_names(DomainId id) const {
    Path p = path_of(id);
    std::vector<std::string> names;
    for (std::size_t i = 1; i < p.nodes.size(); ++i)
        names.push_back(nodes_[p.nodes[i]].name);
    return names;
}

void KnowledgeTree::set_active(DomainId id, bool active) {
    if (!has(id)) throw InvalidDomain("no such domain id " + std::to_string(id));
    nodes_[id].active = active;
}

KnowledgeTree KnowledgeTree::restore(std::vector<Domain> nodes) {
    if (nodes.size() < 2 || nodes[0].level != 0 || nodes[0].is_unk)
        throw CorruptCheckpoint("tree must start with a root node");
    KnowledgeTree tree;
    tree.nodes_ = std::move(nodes);
    tree.level_counts_ = {0, 0, 0};
    tree.by_name_.clear();
    for (auto& d : tree.nodes_) {
        d.children.clear();
    }
    for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
        Domain& d = tree.nodes_[i];
        if (d.id != i) throw CorruptCheckpoint("tree node ids must be dense and ordered");
        if (i == kRootId) continue;
        if (d.parent >= i) throw CorruptCheckpoint("child listed before its parent");
        Domain& p = tree.nodes_[d.parent];
        if (d.level != p.level + 1 || p.is_unk || p.level >= kLeafLevel)
            throw CorruptCheckpoint("node " + std::to_string(d.id) + " has an impossible parent");
        p.children.push_back(d.id);
        if (d.is_unk) {
            if (!d.name.empty()) throw CorruptCheckpoint("unk nodes are unnamed");
            continue;
        }
        std::string key = normalize_name(d.name);
        if (key.empty()) throw CorruptCheckpoint("named node with empty name");
        if (!tree.by_name_.emplace(std::move(key), d.id).second)
            throw CorruptCheckpoint("duplicate domain name '" + d.name + "'");
        ++tree.level_counts_[d.level - 1];
    }
    for (const Domain& d : tree.nodes_) {
        if (d.is_unk || d.level >= kLeafLevel) continue;
        if (d.children.empty() || !tree.nodes_[d.children.front()].is_unk)
            throw CorruptCheckpoint("non-leaf node " + std::to_string(d.id) +
                                    " is missing its unk child");
    }
    return tree;
}

}  // namespace treefuse
