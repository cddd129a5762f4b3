#pragma once
// Prompt construction for multi-hop queries: zero-shot, one-shot with a
// rendered demonstration, and with-context prompts, in statement or
// question style.

#include "kgreason/kg_core.hpp"
#include "kgreason/representation.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace kgr {

enum class DatasetStyle { statement, question };
enum class PromptMode { zero_shot, one_shot, with_context };

std::string_view to_string(DatasetStyle style);
std::string_view to_string(PromptMode mode);
// Accepts canonical names plus the CLI forms zero, one, context.
std::optional<DatasetStyle> parse_style(std::string_view name);
std::optional<PromptMode> parse_mode(std::string_view name);

struct QueryOptions {
    // "The spouse of the composer of X is _" instead of "spouse of composer of X is _".
    bool articled = false;
};

// statement: "r_n of ... of r_1 of e1 is _"
// question:  "What is r_n of ... of r_1 of e1 ?"
std::string build_query(const ReasoningInstance& chain, DatasetStyle style, QueryOptions options = {});

struct PromptBundle {
    PromptMode mode;
    DatasetStyle style;
    std::optional<RepresentationTag> representation;
    std::optional<RenderedExample> demonstration;
    std::optional<std::string> context;
    std::string query_text;
    std::string full_prompt;
};

struct PromptRequest {
    PromptMode mode = PromptMode::zero_shot;
    DatasetStyle style = DatasetStyle::statement;
    // Selects the instruction wording; required for one_shot.
    std::optional<RepresentationTag> representation;
    // The demonstration chain for one_shot; rendered in `representation`.
    std::optional<ReasoningInstance> demonstration;
    std::optional<std::string> context;
    QueryOptions query;
};

// Throws std::invalid_argument when a mode-specific field is missing.
PromptBundle build_prompt(const ReasoningInstance& chain, const PromptRequest& request);

struct DemonstrationPick {
    const ReasoningInstance* instance = nullptr;
    bool fallback = false;
    std::string warning;
};

// Seeded uniform choice among pool entries that share neither the start
// entity nor the final answer with query. Falls back to pool.front().
DemonstrationPick pick_demonstration(std::span<const ReasoningInstance> pool, const ReasoningInstance& query,
                                     std::uint64_t seed);

}  // namespace kgr
