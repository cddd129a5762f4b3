#pragma once
// Knowledge-graph core: entities, relations, triplets, the functional fact
// store and the multi-hop traversal used as ground truth everywhere else.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kgr {

// Label types are strong wrappers over UTF-8 text. Construction never fails;
// validate_instance and ingestion check validity.
struct Entity {
    std::string label;

    Entity() = default;
    explicit Entity(std::string l) : label(std::move(l)) {}

    bool valid() const;
    friend auto operator<=>(const Entity&, const Entity&) = default;
};

struct Relation {
    std::string label;

    Relation() = default;
    explicit Relation(std::string l) : label(std::move(l)) {}

    bool valid() const;
    friend auto operator<=>(const Relation&, const Relation&) = default;
};

struct Triplet {
    Entity head;
    Relation relation;
    Entity tail;

    Triplet() = default;
    Triplet(Entity h, Relation r, Entity t)
        : head(std::move(h)), relation(std::move(r)), tail(std::move(t)) {}
    Triplet(std::string h, std::string r, std::string t)
        : head(std::move(h)), relation(std::move(r)), tail(std::move(t)) {}

    bool valid() const { return head.valid() && relation.valid() && tail.valid(); }
    friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

// An n-hop chain: hops[i].tail is the bridge to hops[i+1].head.
struct ReasoningInstance {
    std::vector<Triplet> hops;
    std::optional<std::string> source_id;

    std::size_t hop_count() const { return hops.size(); }
    const Entity& start() const { return hops.front().head; }
    const Entity& answer() const { return hops.back().tail; }
    std::vector<Relation> relations() const;

    friend bool operator==(const ReasoningInstance&, const ReasoningInstance&) = default;
};

struct AddOutcome {
    bool replaced = false;
    std::optional<Entity> previous;
};

// Functional store: each (head, relation) maps to exactly one tail.
// const member functions are safe to call concurrently.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    AddOutcome add_fact(const Triplet& t);

    std::optional<Entity> lookup(const Entity& head, const Relation& relation) const;

    // Walks relations left to right from start. Absent when any step is missing.
    std::optional<Entity> infer(const Entity& start, std::span<const Relation> relations) const;

    // Relations leaving head together with their tails, ordered by relation label.
    std::vector<std::pair<Relation, Entity>> outgoing(const Entity& head) const;

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    std::vector<Triplet> facts() const;

private:
    std::map<std::string, std::map<std::string, std::string>, std::less<>> by_head_;
    std::size_t size_ = 0;
};

class ChainError : public std::runtime_error {
public:
    ChainError(std::size_t index, const std::string& what)
        : std::runtime_error(what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

// One description per violated invariant, prefixed with the hop index.
std::vector<std::string> validate_instance(const ReasoningInstance& chain);

// Throws ChainError (carrying the first offending hop index) on invalid chains.
KnowledgeGraph chain_to_graph(const ReasoningInstance& chain);

// Builds a chain from triplets and checks it; convenience for tests and tools.
ReasoningInstance make_chain(std::vector<Triplet> hops, std::optional<std::string> id = std::nullopt);

}  // namespace kgr
