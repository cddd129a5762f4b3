#pragma once
// Small string helpers shared across modules.

#include <string>
#include <string_view>
#include <vector>

namespace kgr::text {

std::string_view trim(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

// True when s is a usable entity/relation label: non-empty after trimming
// and free of control characters.
bool is_valid_label(std::string_view s);

bool is_valid_utf8(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// All start offsets of needle in hay, ascending.
std::vector<std::size_t> find_all(std::string_view hay, std::string_view needle);

// Single-quoted Python string literal.
std::string py_quote(std::string_view s);

// Double-quoted JSON string literal (UTF-8 passed through).
std::string json_quote(std::string_view s);

// Splits prose into sentences at . ! ? or newline when followed by
// whitespace and a capital letter (or end of text). Short capitalised
// tokens such as "St." or "J." are treated as abbreviations.
std::vector<std::string> split_sentences(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace kgr::text
