#include "kgreason/prompt.hpp"

#include <random>
#include <stdexcept>
#include <vector>

namespace kgr {

namespace {

std::string_view instruction_object(std::optional<RepresentationTag> tag) {
    if (!tag) return "explanation";
    switch (*tag) {
        case RepresentationTag::natural_language: return "explanation";
        case RepresentationTag::json: return "JSON structure";
        case RepresentationTag::python_static:
        case RepresentationTag::python_dynamic: return "python code";
    }
    return "explanation";
}

std::string statement_instruction(std::optional<RepresentationTag> tag) {
    return "provide answer and generate " + std::string(instruction_object(tag)) + " for completing the statement";
}

std::string question_instruction(std::optional<RepresentationTag> tag) {
    return "generate " + std::string(instruction_object(tag)) + " and provide answer to the question";
}

// "Given the incomplete statement: <q> , <instr>" / "Given the question: <q> <instr>"
std::string query_block(const std::string& query, DatasetStyle style, std::optional<RepresentationTag> tag) {
    if (style == DatasetStyle::statement)
        return "Given the incomplete statement: " + query + " , " + statement_instruction(tag);
    return "Given the question: " + query + " " + question_instruction(tag);
}

}  // namespace

std::string_view to_string(DatasetStyle style) {
    return style == DatasetStyle::statement ? "statement" : "question";
}

std::string_view to_string(PromptMode mode) {
    switch (mode) {
        case PromptMode::zero_shot: return "zero_shot";
        case PromptMode::one_shot: return "one_shot";
        case PromptMode::with_context: return "with_context";
    }
    return "zero_shot";
}

std::optional<DatasetStyle> parse_style(std::string_view name) {
    if (name == "statement") return DatasetStyle::statement;
    if (name == "question") return DatasetStyle::question;
    return std::nullopt;
}

std::optional<PromptMode> parse_mode(std::string_view name) {
    if (name == "zero" || name == "zero_shot") return PromptMode::zero_shot;
    if (name == "one" || name == "one_shot") return PromptMode::one_shot;
    if (name == "context" || name == "with_context") return PromptMode::with_context;
    return std::nullopt;
}

std::string build_query(const ReasoningInstance& chain, DatasetStyle style, QueryOptions options) {
    std::string phrase;
    for (std::size_t i = chain.hops.size(); i-- > 0;) {
        if (options.articled) phrase += (i + 1 == chain.hops.size() ? "The " : "the ");
        phrase += chain.hops[i].relation.label + " of ";
    }
    phrase += chain.start().label;
    if (style == DatasetStyle::statement) return phrase + " is _";
    if (options.articled) phrase[0] = 't';
    return "What is " + phrase + " ?";
}

PromptBundle build_prompt(const ReasoningInstance& chain, const PromptRequest& request) {
    PromptBundle out{request.mode, request.style, request.representation, std::nullopt, request.context,
                     build_query(chain, request.style, request.query), {}};
    switch (request.mode) {
        case PromptMode::zero_shot:
            out.full_prompt = query_block(out.query_text, request.style, request.representation);
            break;
        case PromptMode::one_shot: {
            if (!request.representation) throw std::invalid_argument("one_shot prompt requires a representation");
            if (!request.demonstration) throw std::invalid_argument("one_shot prompt requires a demonstration");
            out.demonstration = render(*request.demonstration, *request.representation);
            const auto demo_query = build_query(*request.demonstration, request.style, request.query);
            const auto header = request.style == DatasetStyle::statement
                                    ? "Given the incomplete statement: " + demo_query + " ,"
                                    : "Given the question: " + demo_query;
            out.full_prompt = header + "\n" + out.demonstration->envelope + "\n" +
                              query_block(out.query_text, request.style, request.representation);
            break;
        }
        case PromptMode::with_context:
            if (!request.context) throw std::invalid_argument("with_context prompt requires a context");
            if (request.style == DatasetStyle::statement) {
                out.full_prompt = "Given context: " + *request.context + " and the uncompleted statement: " +
                                  out.query_text + " , " + statement_instruction(request.representation);
            } else {
                out.full_prompt = "Given context: " + *request.context + " and the question: " + out.query_text + " " +
                                  question_instruction(request.representation);
            }
            break;
    }
    return out;
}

DemonstrationPick pick_demonstration(std::span<const ReasoningInstance> pool, const ReasoningInstance& query,
                                     std::uint64_t seed) {
    if (pool.empty()) throw std::invalid_argument("demonstration pool is empty");
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& c = pool[i];
        if (c.hops.empty()) continue;
        if (c.start() == query.start() || c.answer() == query.answer()) continue;
        eligible.push_back(i);
    }
    if (eligible.empty()) {
        return {&pool.front(), true,
                "no demonstration shares neither start entity nor answer with the query; using the first pool entry"};
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    return {&pool[eligible[pick(rng)]], false, {}};
}

}  // namespace kgr
