#pragma once
// Minimal tokenizer for the subset of Python that the code-style
// representations use: identifiers, string literals, punctuation.
// Comments and whitespace are dropped, numbers become Other tokens.

#include <string>
#include <string_view>
#include <vector>

namespace kgr::detail {

struct PyToken {
    enum class Kind { Identifier, String, Punct, Other };
    Kind kind;
    std::string text;  // decoded value for strings
    std::size_t line = 0;
};

// Never throws. An unterminated string ends at end of line.
std::vector<PyToken> tokenize_python(std::string_view src);

}  // namespace kgr::detail
