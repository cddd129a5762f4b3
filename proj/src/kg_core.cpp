#include "kgreason/kg_core.hpp"

#include "kgreason/text.hpp"

namespace kgr {

bool Entity::valid() const { return text::is_valid_label(label); }
bool Relation::valid() const { return text::is_valid_label(label); }

std::vector<Relation> ReasoningInstance::relations() const {
    std::vector<Relation> out;
    out.reserve(hops.size());
    for (const auto& h : hops) out.push_back(h.relation);
    return out;
}

AddOutcome KnowledgeGraph::add_fact(const Triplet& t) {
    auto& rels = by_head_[t.head.label];
    auto [it, inserted] = rels.try_emplace(t.relation.label, t.tail.label);
    if (inserted) {
        ++size_;
        return {};
    }
    if (it->second == t.tail.label) return {};
    AddOutcome out{true, Entity{it->second}};
    it->second = t.tail.label;
    return out;
}

std::optional<Entity> KnowledgeGraph::lookup(const Entity& head, const Relation& relation) const {
    const auto h = by_head_.find(head.label);
    if (h == by_head_.end()) return std::nullopt;
    const auto r = h->second.find(relation.label);
    if (r == h->second.end()) return std::nullopt;
    return Entity{r->second};
}

std::optional<Entity> KnowledgeGraph::infer(const Entity& start, std::span<const Relation> relations) const {
    const std::string* current = &start.label;
    for (const auto& rel : relations) {
        const auto h = by_head_.find(*current);
        if (h == by_head_.end()) return std::nullopt;
        const auto r = h->second.find(rel.label);
        if (r == h->second.end()) return std::nullopt;
        current = &r->second;
    }
    return Entity{*current};
}

std::vector<std::pair<Relation, Entity>> KnowledgeGraph::outgoing(const Entity& head) const {
    std::vector<std::pair<Relation, Entity>> out;
    const auto h = by_head_.find(head.label);
    if (h == by_head_.end()) return out;
    out.reserve(h->second.size());
    for (const auto& [rel, tail] : h->second) out.emplace_back(Relation{rel}, Entity{tail});
    return out;
}

std::vector<Triplet> KnowledgeGraph::facts() const {
    std::vector<Triplet> out;
    out.reserve(size_);
    for (const auto& [head, rels] : by_head_)
        for (const auto& [rel, tail] : rels) out.emplace_back(head, rel, tail);
    return out;
}

std::vector<std::string> validate_instance(const ReasoningInstance& chain) {
    std::vector<std::string> out;
    if (chain.hops.empty()) {
        out.emplace_back("chain has no hops");
        return out;
    }
    for (std::size_t i = 0; i < chain.hops.size(); ++i) {
        const auto& hop = chain.hops[i];
        const auto prefix = "hop " + std::to_string(i) + ": ";
        if (!hop.head.valid()) out.push_back(prefix + (text::trim(hop.head.label).empty() ? "empty head" : "invalid head"));
        if (!hop.relation.valid())
            out.push_back(prefix + (text::trim(hop.relation.label).empty() ? "empty relation" : "invalid relation"));
        if (!hop.tail.valid()) out.push_back(prefix + (text::trim(hop.tail.label).empty() ? "empty tail" : "invalid tail"));
        if (i + 1 < chain.hops.size() && hop.tail != chain.hops[i + 1].head) {
            out.push_back(prefix + "bridge mismatch, tail '" + hop.tail.label + "' != next head '" +
                          chain.hops[i + 1].head.label + "'");
        }
    }
    return out;
}

KnowledgeGraph chain_to_graph(const ReasoningInstance& chain) {
    if (chain.hops.empty()) throw ChainError(0, "chain has no hops");
    for (std::size_t i = 0; i < chain.hops.size(); ++i) {
        if (!chain.hops[i].valid()) throw ChainError(i, "hop " + std::to_string(i) + ": invalid triplet");
        if (i + 1 < chain.hops.size() && chain.hops[i].tail != chain.hops[i + 1].head)
            throw ChainError(i, "hop " + std::to_string(i) + ": bridge mismatch");
    }
    KnowledgeGraph kg;
    for (std::size_t i = 0; i < chain.hops.size(); ++i) {
        if (kg.add_fact(chain.hops[i]).replaced)
            throw ChainError(i, "hop " + std::to_string(i) + ": conflicts with an earlier hop of the same chain");
    }
    return kg;
}

ReasoningInstance make_chain(std::vector<Triplet> hops, std::optional<std::string> id) {
    ReasoningInstance chain{std::move(hops), std::move(id)};
    if (auto v = validate_instance(chain); !v.empty()) throw std::invalid_argument(v.front());
    return chain;
}

}  // namespace kgr
