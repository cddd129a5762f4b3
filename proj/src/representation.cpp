#include "kgreason/representation.hpp"

#include "kgreason/text.hpp"
#include "python_lexer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace kgr {

namespace {

using detail::PyToken;

constexpr std::string_view kKnowledgeBaseClass =
    "# Step 1. Define relationships with knowledge base\n"
    "class KnowledgeBase:\n"
    "    def __init__(self):\n"
    "        # Initialize an empty dictionary to store facts.\n"
    "        # Each key is a tuple (entity1, relation), and the value is the entity2 related to entity1 through "
    "relation.\n"
    "        self.facts = {}\n"
    "\n"
    "    def add_fact(self, entity1, relation, entity2):\n"
    "        # Add a fact to the knowledge base.\n"
    "        # :param entity1: The starting entity.\n"
    "        # :param relation: The relation from entity1 to entity2.\n"
    "        #:param entity2: The related entity reached via the relation.\n"
    "\n"
    "        self.facts[(entity1, relation)] = entity2\n"
    "\n"
    "    def infer(self, entity, *relations):\n"
    "        #Infer the resulting entity by traversing the relations starting from the given entity.\n"
    "\n"
    "        #:param entity: The starting entity.\n"
    "        #:param relations: A chain of relations to traverse.\n"
    "        #:return: The resulting entity after applying the relations, or None if no such path exists.\n"
    "\n"
    "        current_entity = entity\n"
    "        for relation in relations:\n"
    "            key = (current_entity, relation)\n"
    "            if key in self.facts:\n"
    "                current_entity = self.facts[key]\n"
    "            else:\n"
    "                # If the path does not exist, return None.\n"
    "                return None\n"
    "        return current_entity\n";

// Column where the trailing comments of the inference lines start.
constexpr std::size_t kInferCommentColumn = 36;

std::string var(char prefix, std::size_t one_based) { return std::string(1, prefix) + std::to_string(one_based); }

// "The r_k of the r_{k-1} of ... the r_1 of e1" over hops[0..k).
std::string composed_subject(const std::vector<Triplet>& hops, std::size_t k) {
    std::string out = "The " + hops[k - 1].relation.label;
    for (std::size_t j = k - 1; j-- > 0;) out += " of the " + hops[j].relation.label;
    out += " of " + hops[0].head.label;
    return out;
}

void check_renderable(const ReasoningInstance& chain) {
    if (auto v = validate_instance(chain); !v.empty()) throw RenderError("cannot render chain: " + v.front());
    try {
        (void)chain_to_graph(chain);
    } catch (const ChainError& e) {
        throw RenderError(std::string("cannot render chain: ") + e.what());
    }
}

// Relation-keyed groups in first-appearance order, each holding (head, tail)
// entries in hop order. Identical repeated facts collapse.
using RelationGroups = std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>;

RelationGroups group_by_relation(const ReasoningInstance& chain) {
    RelationGroups groups;
    for (const auto& hop : chain.hops) {
        auto g = std::find_if(groups.begin(), groups.end(),
                              [&](const auto& entry) { return entry.first == hop.relation.label; });
        if (g == groups.end()) {
            groups.emplace_back(hop.relation.label, std::vector<std::pair<std::string, std::string>>{});
            g = std::prev(groups.end());
        }
        auto& entries = g->second;
        const auto e = std::find_if(entries.begin(), entries.end(),
                                    [&](const auto& kv) { return kv.first == hop.head.label; });
        if (e != entries.end()) {
            if (e->second != hop.tail.label)
                throw RenderError("relation '" + hop.relation.label + "' maps '" + hop.head.label +
                                  "' to two different tails");
            continue;
        }
        entries.emplace_back(hop.head.label, hop.tail.label);
    }
    return groups;
}

std::string render_nl(const ReasoningInstance& chain) {
    std::string out = render_hop_sentences(chain);
    if (chain.hops.size() >= 2)
        out += " " + composed_subject(chain.hops, chain.hops.size()) + " is " + chain.answer().label + ".";
    return out;
}

std::string render_json(const ReasoningInstance& chain) {
    const auto groups = group_by_relation(chain);
    std::string out = "{\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out += "    " + text::json_quote(groups[g].first) + ": {\n";
        const auto& entries = groups[g].second;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            out += "        " + text::json_quote(entries[i].first) + ": " + text::json_quote(entries[i].second);
            out += i + 1 < entries.size() ? ",\n" : "\n";
        }
        out += g + 1 < groups.size() ? "    },\n" : "    }\n";
    }
    out += "}";
    return out;
}

std::string render_python_static(const ReasoningInstance& chain) {
    const auto groups = group_by_relation(chain);
    const auto n = chain.hops.size();
    std::string out = "# Step 1. Define relationships with explicit types\nrelationships = {\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& rel = groups[g].first;
        out += "    " + text::py_quote(rel) + ": {\n";
        const auto& entries = groups[g].second;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& [head, tail] = entries[i];
            out += "        " + text::py_quote(head) + ": " + text::py_quote(tail);
            if (i + 1 < entries.size()) out += ",";
            out += "  # " + head + " is related to " + tail + " via relationship " + rel + "\n";
        }
        out += g + 1 < groups.size() ? "    },\n" : "    }\n";
    }
    out += "}\n\n# Define entities and relationships\n";
    out += "e1 = " + text::py_quote(chain.start().label) + "\n";
    for (std::size_t i = 0; i < n; ++i)
        out += var('r', i + 1) + " = " + text::py_quote(chain.hops[i].relation.label) + "\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = var('r', i + 1), e = var('e', i + 1), next = var('e', i + 2);
        out += "\n# Step " + std::to_string(i + 2) + ". (" + r + ", " + e + ") -> " + next + "\n";
        out += next + " = relationships[" + r + "][" + e + "]\n";
    }
    std::string phrase;
    for (std::size_t i = n; i >= 1; --i) phrase += "{" + var('r', i) + "} of ";
    out += "\n# Output the result\nprint(f\"" + phrase + "{e1} is {" + var('e', n + 1) + "}\")\n";
    out += "\n# when you run the code, it will output:\n";
    out += "# " + composed_subject(chain.hops, n) + " is " + chain.answer().label;
    return out;
}

std::string pad_to_comment(std::string code) {
    const auto width = std::max(kInferCommentColumn, code.size() + 2);
    code.resize(width, ' ');
    return code;
}

std::string render_python_dynamic(const ReasoningInstance& chain) {
    const auto& hops = chain.hops;
    const auto n = hops.size();
    std::string out(kKnowledgeBaseClass);
    out += "\n# Example usage:\n# Create a knowledge base instance.\nkb = KnowledgeBase()\n";
    out += "\n# Step 2. Define entities and relationships\n";
    out += "e1 = " + text::py_quote(chain.start().label) + "\n";
    for (std::size_t i = 0; i < n; ++i) {
        out += var('r', i + 1) + " = " + text::py_quote(hops[i].relation.label) + "\n";
        out += var('e', i + 2) + " = " + text::py_quote(hops[i].tail.label) + "\n";
    }
    out += "\n# Add entities and relationships to the knowledge base.\n";
    for (std::size_t i = 0; i < n; ++i)
        out += "kb.add_fact(" + var('e', i + 1) + ", " + var('r', i + 1) + ", " + var('e', i + 2) + ")\n";

    out += "\n# Step 3. Perform inference.\n";
    std::vector<std::string> print_lines;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& hop = hops[i];
        const auto result = "result" + std::to_string(i + 1);
        out += pad_to_comment(result + " = kb.infer(" + var('e', i + 1) + ", " + var('r', i + 1) + ")");
        out += "# Should return " + hop.tail.label + ", (" + hop.head.label + ", " + hop.relation.label + ") -> " +
               hop.tail.label + "\n";
        print_lines.push_back("print(" + result + ")  # Output: " +
                              hop.tail.label + " is related to " + hop.head.label + " through " + hop.relation.label);
    }
    if (n >= 2) {
        const auto result = "result" + std::to_string(n + 1);
        std::string args = "e1";
        std::string path;
        std::string through;
        for (std::size_t i = 0; i < n; ++i) {
            args += ", " + var('r', i + 1);
            if (i) path += ", ";
            path += "(" + hops[i].head.label + ", " + hops[i].relation.label + ") -> " + hops[i].tail.label;
            if (i == 0) through = hops[i].relation.label;
            else if (i + 1 == n) through += " and " + hops[i].relation.label;
            else through += ", " + hops[i].relation.label;
        }
        out += pad_to_comment(result + " = kb.infer(" + args + ")");
        out += "# Should return " + chain.answer().label + ", " + path + "\n";
        print_lines.push_back("print(" + result + ")  # Output: " + chain.answer().label + " is related to " +
                              chain.start().label + " through " + through);
    }
    out += "\n# Output the result\n";
    for (std::size_t i = 0; i < print_lines.size(); ++i) {
        out += print_lines[i];
        if (i + 1 < print_lines.size()) out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// natural language

bool is_sentence_end(std::string_view s, std::size_t pos) {
    return pos >= s.size() || s[pos] == ' ' || s[pos] == '\n' || s[pos] == '\t' || s[pos] == '\r';
}

// Backtracking parser for the canonical "The r of h is t." sentence sequence.
// "The place of birth of X" splits several ways. Splits leaving an
// uppercase-free relation go first (longest first), then the rest
// (shortest first). Positions are offsets of " of " in s.
std::vector<std::size_t> relation_splits(std::string_view s) {
    std::vector<std::size_t> lower, other;
    for (const auto of : text::find_all(s, " of ")) {
        if (of == 0) continue;
        const auto rel = s.substr(0, of);
        const bool has_upper = std::any_of(rel.begin(), rel.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
        (has_upper ? other : lower).push_back(of);
    }
    std::reverse(lower.begin(), lower.end());
    lower.insert(lower.end(), other.begin(), other.end());
    return lower;
}

class CanonicalNlParser {
public:
    explicit CanonicalNlParser(std::string_view s) : s_(s) {}

    bool run() { return parse_from(0); }

    std::vector<Triplet> hops;
    std::optional<Entity> final_answer;
    bool composed_seen = false;

private:
    std::string_view s_;
    std::size_t budget_ = 100000;

    std::size_t skip_space(std::size_t p) const {
        while (p < s_.size() && (s_[p] == ' ' || s_[p] == '\n' || s_[p] == '\t' || s_[p] == '\r')) ++p;
        return p;
    }

    // Tail candidates starting at p: each "." followed by a sentence break,
    // then the bare end of text. Shortest first.
    std::vector<std::pair<std::size_t, std::size_t>> tail_spans(std::size_t p) const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (auto dot = s_.find('.', p); dot != std::string_view::npos; dot = s_.find('.', dot + 1)) {
            if (dot > p && is_sentence_end(s_, dot + 1)) out.emplace_back(dot, dot + 1);
        }
        const auto last = s_.find_last_not_of(" \n\t\r");
        if (last != std::string_view::npos && last >= p && s_[last] != '.') out.emplace_back(last + 1, last + 1);
        return out;
    }

    bool try_composed(std::size_t p) {
        if (hops.size() < 2 || composed_seen) return false;
        const auto subject = composed_subject(hops, hops.size()) + " is ";
        if (!text::starts_with_icase(s_.substr(p), subject)) return false;
        // the phrase after "The" must match exactly; only the article's case is loose
        if (s_.substr(p + 1, subject.size() - 1) != std::string_view(subject).substr(1)) return false;
        const auto t0 = p + subject.size();
        for (const auto& [tend, next] : tail_spans(t0)) {
            const auto tail = s_.substr(t0, tend - t0);
            if (tail != hops.back().tail.label && tail != "_") continue;
            composed_seen = true;
            if (tail != "_") final_answer = Entity{std::string(tail)};
            if (parse_from(next)) return true;
            composed_seen = false;
            final_answer.reset();
        }
        return false;
    }

    bool try_hop(std::size_t rel_start) {
        for (const auto of : relation_splits(s_.substr(rel_start))) {
            const auto rel = s_.substr(rel_start, of);
            const auto h0 = rel_start + of + 4;
            std::vector<std::size_t> head_ends;
            if (!hops.empty()) {
                const auto& prev = hops.back().tail.label;
                if (s_.substr(h0, prev.size()) == prev && s_.substr(h0 + prev.size(), 4) == " is ")
                    head_ends.push_back(h0 + prev.size());
            } else {
                for (const auto is : text::find_all(s_.substr(h0), " is "))
                    if (is > 0) head_ends.push_back(h0 + is);
            }
            for (const auto hend : head_ends) {
                const auto head = s_.substr(h0, hend - h0);
                const auto t0 = hend + 4;
                for (const auto& [tend, next] : tail_spans(t0)) {
                    if (budget_ == 0) return false;
                    --budget_;
                    const auto tail = s_.substr(t0, tend - t0);
                    if (!text::is_valid_label(tail) || tail == "_") continue;
                    hops.emplace_back(std::string(head), std::string(rel), std::string(tail));
                    if (parse_from(next)) return true;
                    hops.pop_back();
                }
            }
        }
        return false;
    }

    bool parse_from(std::size_t pos) {
        if (budget_ == 0) return false;
        --budget_;
        const auto p = skip_space(pos);
        if (p >= s_.size()) return !hops.empty();
        if (!text::starts_with_icase(s_.substr(p), "the ")) return false;
        if (try_composed(p)) return true;
        if (composed_seen) return false;  // the composed statement closes the body
        return try_hop(p + 4);
    }
};

ParseResult parse_nl(std::string_view body) {
    ParseResult out;
    if (text::trim(body).empty()) {
        out.diagnostic = "empty body";
        return out;
    }
    CanonicalNlParser parser(body);
    if (parser.run()) {
        out.triplets = std::move(parser.hops);
        out.final_answer = parser.final_answer;
        if (!out.final_answer && out.triplets.size() == 1 && !parser.composed_seen)
            out.final_answer = out.triplets.front().tail;
        return out;
    }
    out.triplets = scan_nl_sentences(body);
    out.diagnostic = out.triplets.empty() ? "no 'The <relation> of <head> is <tail>' sentence found"
                                          : "body is not in canonical sentence form; used tolerant scan";
    return out;
}

// ---------------------------------------------------------------------------
// json

std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i;
    }
    return std::nullopt;
}

std::optional<nlohmann::ordered_json> parse_json_object(std::string_view body) {
    auto doc = nlohmann::ordered_json::parse(body, nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) return doc;
    for (auto open = body.find('{'); open != std::string_view::npos; open = body.find('{', open + 1)) {
        const auto close = matching_brace(body, open);
        if (!close) continue;
        auto inner = nlohmann::ordered_json::parse(body.substr(open, *close - open + 1), nullptr, false);
        if (!inner.is_discarded() && inner.is_object()) return inner;
    }
    return std::nullopt;
}

ParseResult parse_json_body(std::string_view body) {
    ParseResult out;
    const auto doc = parse_json_object(body);
    if (!doc) {
        out.diagnostic = "no JSON object found";
        return out;
    }
    for (const auto& [rel, inner] : doc->items()) {
        if (!inner.is_object()) continue;
        for (const auto& [head, tail] : inner.items()) {
            if (!tail.is_string()) continue;
            Triplet t(head, rel, tail.get<std::string>());
            if (t.valid()) out.triplets.push_back(std::move(t));
        }
    }
    if (out.triplets.empty() && !doc->empty()) out.diagnostic = "JSON object has no relation -> {head: tail} entries";
    out.triplets = order_as_chain(std::move(out.triplets));
    return out;
}

// ---------------------------------------------------------------------------
// python

bool is_punct(const PyToken& t, char c) { return t.kind == PyToken::Kind::Punct && t.text.size() == 1 && t.text[0] == c; }
bool is_ident(const PyToken& t, std::string_view name) {
    return t.kind == PyToken::Kind::Identifier && t.text == name;
}

// `name = 'literal'` statements, applied in program order.
std::map<std::string, std::string> collect_bindings(const std::vector<PyToken>& toks, std::size_t upto) {
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i + 2 < toks.size() && i + 2 < upto; ++i) {
        if (toks[i].kind == PyToken::Kind::Identifier && is_punct(toks[i + 1], '=') &&
            toks[i + 2].kind == PyToken::Kind::String &&
            (i + 3 >= toks.size() || toks[i + 3].line != toks[i + 2].line || !is_punct(toks[i + 3], '['))) {
            if (i > 0 && (is_punct(toks[i - 1], '.') || is_punct(toks[i - 1], '=') || is_punct(toks[i - 1], '!') ||
                          is_punct(toks[i - 1], '<') || is_punct(toks[i - 1], '>')))
                continue;
            out[toks[i].text] = toks[i + 2].text;
        }
    }
    return out;
}

std::optional<std::string> resolve(const PyToken& t, const std::map<std::string, std::string>& bindings) {
    if (t.kind == PyToken::Kind::String) return t.text;
    if (t.kind == PyToken::Kind::Identifier) {
        if (const auto it = bindings.find(t.text); it != bindings.end()) return it->second;
    }
    return std::nullopt;
}

// Parses `{ 'k': <value>, ... }` starting at toks[i] == '{'. Values are
// strings or nested dicts; anything else is skipped.
struct PyDict {
    std::vector<std::pair<std::string, std::string>> strings;
    std::vector<std::pair<std::string, PyDict>> dicts;
};

std::optional<PyDict> parse_py_dict(const std::vector<PyToken>& toks, std::size_t& i, int depth = 0) {
    if (depth > 4 || i >= toks.size() || !is_punct(toks[i], '{')) return std::nullopt;
    ++i;
    PyDict out;
    while (i < toks.size()) {
        if (is_punct(toks[i], '}')) {
            ++i;
            return out;
        }
        if (is_punct(toks[i], ',')) {
            ++i;
            continue;
        }
        if (toks[i].kind != PyToken::Kind::String || i + 2 >= toks.size() || !is_punct(toks[i + 1], ':'))
            return std::nullopt;
        auto key = toks[i].text;
        i += 2;
        if (toks[i].kind == PyToken::Kind::String) {
            out.strings.emplace_back(std::move(key), toks[i].text);
            ++i;
        } else if (is_punct(toks[i], '{')) {
            auto inner = parse_py_dict(toks, i, depth + 1);
            if (!inner) return std::nullopt;
            out.dicts.emplace_back(std::move(key), std::move(*inner));
        } else {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

ParseResult parse_python_static(std::string_view body) {
    ParseResult out;
    const auto toks = detail::tokenize_python(body);
    std::optional<PyDict> dict;
    for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
        if (toks[i].kind == PyToken::Kind::Identifier && is_punct(toks[i + 1], '=') && is_punct(toks[i + 2], '{')) {
            std::size_t j = i + 2;
            auto candidate = parse_py_dict(toks, j);
            if (candidate && !candidate->dicts.empty()) {
                dict = std::move(candidate);
                if (toks[i].text == "relationships") break;
            }
        }
    }
    if (!dict) {
        out.diagnostic = "no relationships dictionary literal found";
        return out;
    }
    for (const auto& [rel, inner] : dict->dicts)
        for (const auto& [head, tail] : inner.strings) {
            Triplet t(head, rel, tail);
            if (t.valid()) out.triplets.push_back(std::move(t));
        }
    out.triplets = order_as_chain(std::move(out.triplets));

    // Simulate the chained lookups: e1 and r1..rn bindings after the literal.
    const auto bindings = collect_bindings(toks, toks.size());
    if (const auto e1 = bindings.find("e1"); e1 != bindings.end()) {
        KnowledgeGraph kg;
        for (const auto& t : out.triplets) kg.add_fact(t);
        std::vector<Relation> rels;
        for (std::size_t k = 1;; ++k) {
            const auto r = bindings.find(var('r', k));
            if (r == bindings.end()) break;
            rels.emplace_back(r->second);
        }
        if (!rels.empty()) out.final_answer = kg.infer(Entity{e1->second}, rels);
    }
    return out;
}

ParseResult parse_python_dynamic(std::string_view body) {
    ParseResult out;
    const auto toks = detail::tokenize_python(body);
    std::map<std::string, std::string> bindings;
    std::vector<std::pair<std::string, std::vector<Relation>>> infer_calls;
    std::size_t unresolved = 0;

    const auto read_args = [&](std::size_t& i) {
        // toks[i] is '('
        std::vector<std::optional<std::string>> args;
        ++i;
        while (i < toks.size() && !is_punct(toks[i], ')')) {
            if (!is_punct(toks[i], ',')) args.push_back(resolve(toks[i], bindings));
            ++i;
        }
        return args;
    };

    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.kind == PyToken::Kind::Identifier && i + 2 < toks.size() && is_punct(toks[i + 1], '=') &&
            toks[i + 2].kind == PyToken::Kind::String && (i == 0 || !is_punct(toks[i - 1], '.'))) {
            bindings[t.text] = toks[i + 2].text;
            i += 2;
            continue;
        }
        if (i > 0 && is_punct(toks[i - 1], '.') && i + 1 < toks.size() && is_punct(toks[i + 1], '(')) {
            if (is_ident(t, "add_fact")) {
                std::size_t j = i + 1;
                const auto args = read_args(j);
                if (args.size() == 3 && args[0] && args[1] && args[2]) {
                    Triplet fact(*args[0], *args[1], *args[2]);
                    if (fact.valid()) out.triplets.push_back(std::move(fact));
                } else {
                    ++unresolved;
                }
                i = j;
            } else if (is_ident(t, "infer")) {
                std::size_t j = i + 1;
                const auto args = read_args(j);
                if (args.size() >= 2 && std::all_of(args.begin(), args.end(), [](const auto& a) { return a.has_value(); })) {
                    std::vector<Relation> rels;
                    for (std::size_t k = 1; k < args.size(); ++k) rels.emplace_back(*args[k]);
                    infer_calls.emplace_back(*args[0], std::move(rels));
                }
                i = j;
            }
        }
    }
    if (out.triplets.empty()) {
        out.diagnostic = unresolved ? "add_fact calls found but arguments could not be resolved" : "no add_fact calls found";
        return out;
    }
    if (unresolved) out.diagnostic = std::to_string(unresolved) + " add_fact call(s) had unresolved arguments";

    KnowledgeGraph kg;
    for (const auto& f : out.triplets) kg.add_fact(f);
    const std::pair<std::string, std::vector<Relation>>* longest = nullptr;
    for (const auto& call : infer_calls)
        if (!longest || call.second.size() >= longest->second.size()) longest = &call;
    if (longest) out.final_answer = kg.infer(Entity{longest->first}, longest->second);
    return out;
}

}  // namespace

std::string_view to_string(RepresentationTag tag) {
    switch (tag) {
        case RepresentationTag::natural_language: return "natural_language";
        case RepresentationTag::json: return "json";
        case RepresentationTag::python_static: return "python_static";
        case RepresentationTag::python_dynamic: return "python_dynamic";
    }
    return "natural_language";
}

std::optional<RepresentationTag> parse_representation(std::string_view name) {
    if (name == "natural_language" || name == "nl") return RepresentationTag::natural_language;
    if (name == "json") return RepresentationTag::json;
    if (name == "python_static" || name == "py-static") return RepresentationTag::python_static;
    if (name == "python_dynamic" || name == "py-dynamic") return RepresentationTag::python_dynamic;
    return std::nullopt;
}

std::string_view envelope_body_key(RepresentationTag tag) {
    switch (tag) {
        case RepresentationTag::natural_language: return "Explanation";
        case RepresentationTag::json: return "JSON structure";
        case RepresentationTag::python_static:
        case RepresentationTag::python_dynamic: return "Python code snippet";
    }
    return "Explanation";
}

std::string render_hop_sentences(const ReasoningInstance& chain) {
    std::string out;
    for (const auto& hop : chain.hops) {
        if (!out.empty()) out += " ";
        out += "The " + hop.relation.label + " of " + hop.head.label + " is " + hop.tail.label + ".";
    }
    return out;
}

RenderedExample render(const ReasoningInstance& chain, RepresentationTag tag) {
    check_renderable(chain);
    RenderedExample out{tag, {}, chain.answer(), {}};
    switch (tag) {
        case RepresentationTag::natural_language: out.body = render_nl(chain); break;
        case RepresentationTag::json: out.body = render_json(chain); break;
        case RepresentationTag::python_static: out.body = render_python_static(chain); break;
        case RepresentationTag::python_dynamic: out.body = render_python_dynamic(chain); break;
    }
    out.envelope = wrap_answer_envelope(out.body, tag, out.answer);
    return out;
}

ParseResult parse(RepresentationTag tag, std::string_view body) {
    try {
        switch (tag) {
            case RepresentationTag::natural_language: return parse_nl(body);
            case RepresentationTag::json: return parse_json_body(body);
            case RepresentationTag::python_static: return parse_python_static(body);
            case RepresentationTag::python_dynamic: return parse_python_dynamic(body);
        }
    } catch (const std::exception& e) {
        return ParseResult{{}, std::nullopt, std::string("parse failure: ") + e.what()};
    }
    return ParseResult{{}, std::nullopt, "unknown representation"};
}

std::vector<Triplet> scan_nl_sentences(std::string_view text_in) {
    std::vector<Triplet> out;
    std::set<Triplet> seen;
    const auto consider = [&](std::string_view clause) {
        const auto is_at = clause.rfind(" is ");
        if (is_at == std::string_view::npos) return;
        const auto splits = relation_splits(clause.substr(0, is_at));
        if (splits.empty()) return;
        const auto of = splits.front();
        const auto rest = clause.substr(of + 4);
        const auto is = is_at - of - 4;
        if (is == 0) return;
        auto tail = text::trim(rest.substr(is + 4));
        while (!tail.empty() && std::string_view(".!?,;:").find(tail.back()) != std::string_view::npos)
            tail.remove_suffix(1);
        Triplet t(std::string(text::trim(rest.substr(0, is))), std::string(text::trim(clause.substr(0, of))),
                  std::string(text::trim(tail)));
        if (t.valid() && t.tail.label != "_" && seen.insert(t).second) out.push_back(std::move(t));
    };
    for (const auto& sentence : text::split_sentences(text_in)) {
        std::string_view s = sentence;
        for (std::size_t i = 0; i + 4 <= s.size(); ++i) {
            const bool word_start = i == 0 || s[i - 1] == ' ' || s[i - 1] == '"' || s[i - 1] == '\'';
            if (word_start && text::starts_with_icase(s.substr(i), "the ")) consider(s.substr(i + 4));
        }
        if (!text::starts_with_icase(s, "the ")) consider(s);
    }
    return out;
}

std::string wrap_answer_envelope(std::string_view body, RepresentationTag tag, const Entity& answer) {
    return "{\"Answer\": " + text::json_quote(answer.label) + ", " + text::json_quote(envelope_body_key(tag)) + ": " +
           text::json_quote(body) + "}";
}

std::optional<Envelope> find_envelope(std::string_view s) {
    std::size_t attempts = 0;
    for (auto open = s.find('{'); open != std::string_view::npos && attempts < 256; open = s.find('{', open + 1)) {
        const auto close = matching_brace(s, open);
        if (!close) continue;
        ++attempts;
        const auto doc = nlohmann::ordered_json::parse(s.substr(open, *close - open + 1), nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) continue;
        const auto answer = doc.find("Answer");
        if (answer == doc.end()) continue;
        Envelope env;
        env.answer = answer->is_string() ? answer->get<std::string>() : answer->dump();
        for (const auto& [key, value] : doc.items()) {
            if (key == "Answer") continue;
            env.body_key = key;
            env.body = value.is_string() ? value.get<std::string>() : value.dump(4);
            break;
        }
        return env;
    }
    return std::nullopt;
}

std::vector<Triplet> order_as_chain(std::vector<Triplet> triplets) {
    const auto n = triplets.size();
    if (n <= 1 || n > 12) return triplets;
    std::vector<std::size_t> order;
    std::vector<bool> used(n, false);
    std::function<bool()> extend = [&]() -> bool {
        if (order.size() == n) return true;
        const auto& tail = triplets[order.back()].tail;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j] || triplets[j].head != tail) continue;
            used[j] = true;
            order.push_back(j);
            if (extend()) return true;
            order.pop_back();
            used[j] = false;
        }
        return false;
    };
    // Prefer starts whose head is no other triplet's tail.
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < n; ++i) {
        const bool is_tail = std::any_of(triplets.begin(), triplets.end(),
                                         [&](const Triplet& o) { return &o != &triplets[i] && o.tail == triplets[i].head; });
        if (!is_tail) starts.push_back(i);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (std::find(starts.begin(), starts.end(), i) == starts.end()) starts.push_back(i);
    for (const auto s : starts) {
        order = {s};
        std::fill(used.begin(), used.end(), false);
        used[s] = true;
        if (extend()) {
            std::vector<Triplet> out;
            out.reserve(n);
            for (const auto k : order) out.push_back(std::move(triplets[k]));
            return out;
        }
    }
    return triplets;
}

}  // namespace kgr
