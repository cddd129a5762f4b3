#pragma once
// Textual encodings of a reasoning chain: natural-language sentences, a
// relation-keyed JSON map, and two Python programs (a static dictionary
// lookup and a dynamic KnowledgeBase class). Each encoding has a matching
// parser that recovers triplets from rendered or model-generated text.

#include "kgreason/kg_core.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kgr {

enum class RepresentationTag { natural_language, json, python_static, python_dynamic };

inline constexpr std::array<RepresentationTag, 4> kAllRepresentations = {
    RepresentationTag::natural_language, RepresentationTag::json, RepresentationTag::python_static,
    RepresentationTag::python_dynamic};

// Canonical names: "natural_language", "json", "python_static", "python_dynamic".
std::string_view to_string(RepresentationTag tag);
// Accepts canonical names and the short CLI forms nl, json, py-static, py-dynamic.
std::optional<RepresentationTag> parse_representation(std::string_view name);

// Key under which the body sits in the answer envelope.
std::string_view envelope_body_key(RepresentationTag tag);

struct RenderedExample {
    RepresentationTag tag;
    std::string body;
    Entity answer;
    std::string envelope;
};

class RenderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

RenderedExample render(const ReasoningInstance& chain, RepresentationTag tag);

// Hop sentences only ("The r of h is t." per hop), used as with-context input.
std::string render_hop_sentences(const ReasoningInstance& chain);

struct ParseResult {
    std::vector<Triplet> triplets;
    std::optional<Entity> final_answer;
    std::string diagnostic;  // empty on success
};

// Never throws; unparseable text yields no triplets and a diagnostic.
ParseResult parse(RepresentationTag tag, std::string_view body);

// Tolerant sentence scan for free-form model text: every "the R of H is T"
// clause found anywhere becomes a candidate triplet.
std::vector<Triplet> scan_nl_sentences(std::string_view text);

std::string wrap_answer_envelope(std::string_view body, RepresentationTag tag, const Entity& answer);

struct Envelope {
    std::string answer;
    std::string body_key;
    std::string body;
};

// First well-formed {"Answer": ...} object in text, if any.
std::optional<Envelope> find_envelope(std::string_view text);

// Reorders triplets into a bridge-connected chain when that is possible;
// otherwise returns them unchanged.
std::vector<Triplet> order_as_chain(std::vector<Triplet> triplets);

}  // namespace kgr
