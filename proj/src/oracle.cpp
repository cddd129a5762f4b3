// Oracle model: reads the query out of a generated prompt and answers it by
// exact traversal of a knowledge graph.

#include "kgreason/gateway.hpp"
#include "kgreason/text.hpp"

#include <array>

namespace kgr {

namespace {

struct QueryText {
    std::string phrase;  // "r_n of ... of r_1 of e1", possibly articled
};

constexpr std::array<std::string_view, 2> kStatementMarkers = {"Given the incomplete statement: ",
                                                                "the uncompleted statement: "};
constexpr std::array<std::string_view, 2> kQuestionMarkers = {"Given the question: ", "and the question: "};

std::optional<QueryText> locate_query(std::string_view prompt) {
    std::size_t best = std::string_view::npos;
    bool statement = true;
    std::size_t marker_len = 0;
    const auto consider = [&](std::string_view marker, bool is_statement) {
        if (marker.empty()) return;
        const auto pos = prompt.rfind(marker);
        if (pos == std::string_view::npos) return;
        if (best == std::string_view::npos || pos > best) {
            best = pos;
            statement = is_statement;
            marker_len = marker.size();
        }
    };
    for (const auto m : kStatementMarkers) consider(m, true);
    for (const auto m : kQuestionMarkers) consider(m, false);
    if (best == std::string_view::npos) return std::nullopt;

    auto rest = prompt.substr(best + marker_len);
    if (statement) {
        const auto end = rest.find(" is _");
        if (end == std::string_view::npos) return std::nullopt;
        return QueryText{std::string(text::trim(rest.substr(0, end)))};
    }
    if (!text::starts_with_icase(rest, "what is ")) return std::nullopt;
    rest.remove_prefix(8);
    const auto end = rest.find(" ?");
    if (end == std::string_view::npos) return std::nullopt;
    return QueryText{std::string(text::trim(rest.substr(0, end)))};
}

// Matches `rel` (optionally preceded by "the ") as the whole of s.
bool is_relation_phrase(std::string_view s, std::string_view rel) {
    if (s == rel) return true;
    return s.size() == rel.size() + 4 && text::starts_with_icase(s, "the ") && s.substr(4) == rel;
}

// Splits "<prefix> of <rel>" / "<prefix> of the <rel>"; returns the prefix.
std::optional<std::string_view> strip_trailing_relation(std::string_view s, std::string_view rel) {
    if (!s.ends_with(rel)) return std::nullopt;
    auto head = s.substr(0, s.size() - rel.size());
    if (head.ends_with(" of the ")) return head.substr(0, head.size() - 8);
    if (head.ends_with(" of ")) return head.substr(0, head.size() - 4);
    return std::nullopt;
}

// Relations are listed outermost first, so the innermost (first applied)
// relation sits at the right end of the phrase.
bool decompose(std::string_view phrase, const Entity& current, const KnowledgeGraph& kg, std::vector<Triplet>& hops,
               int depth) {
    if (depth > 16) return false;
    for (const auto& [rel, tail] : kg.outgoing(current)) {
        if (is_relation_phrase(phrase, rel.label)) {
            hops.emplace_back(current, rel, tail);
            return true;
        }
    }
    for (const auto& [rel, tail] : kg.outgoing(current)) {
        const auto prefix = strip_trailing_relation(phrase, rel.label);
        if (!prefix || prefix->empty()) continue;
        hops.emplace_back(current, rel, tail);
        if (decompose(*prefix, tail, kg, hops, depth + 1)) return true;
        hops.pop_back();
    }
    return false;
}

}  // namespace

RepresentationTag requested_representation(std::string_view prompt) {
    if (prompt.find("generate JSON structure") != std::string_view::npos) return RepresentationTag::json;
    if (prompt.find("generate python code") != std::string_view::npos) {
        if (prompt.find("relationships = {") != std::string_view::npos) return RepresentationTag::python_static;
        return RepresentationTag::python_dynamic;
    }
    return RepresentationTag::natural_language;
}

std::optional<ReasoningInstance> oracle_resolve(const std::string& prompt, const KnowledgeGraph& kg) {
    const auto query = locate_query(prompt);
    if (!query) return std::nullopt;
    const std::string_view phrase = query->phrase;
    // Every " of " is a candidate boundary between the relation list and e1;
    // the longest start entity is tried first.
    for (const auto of : text::find_all(phrase, " of ")) {
        const Entity start{std::string(phrase.substr(of + 4))};
        if (kg.outgoing(start).empty()) continue;
        std::vector<Triplet> hops;
        if (decompose(phrase.substr(0, of), start, kg, hops, 0)) return ReasoningInstance{std::move(hops), std::nullopt};
    }
    return std::nullopt;
}

std::string oracle_complete(const std::string& prompt, const KnowledgeGraph& kg,
                            std::optional<RepresentationTag> representation) {
    const auto tag = representation.value_or(requested_representation(prompt));
    const auto chain = oracle_resolve(prompt, kg);
    if (chain) {
        try {
            return render(*chain, tag).envelope;
        } catch (const RenderError&) {
        }
    }
    return wrap_answer_envelope("", tag, Entity{std::string(kUnknownAnswer)});
}

}  // namespace kgr
