#include "python_lexer.hpp"

#include <cctype>

namespace kgr::detail {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

// Reads a quoted literal starting at src[i] (the opening quote).
std::string read_string(std::string_view src, std::size_t& i, bool raw) {
    const char quote = src[i];
    const bool triple = i + 2 < src.size() && src[i + 1] == quote && src[i + 2] == quote;
    i += triple ? 3 : 1;
    std::string out;
    while (i < src.size()) {
        const char c = src[i];
        if (triple) {
            if (c == quote && i + 2 < src.size() && src[i + 1] == quote && src[i + 2] == quote) {
                i += 3;
                return out;
            }
        } else if (c == quote) {
            ++i;
            return out;
        } else if (c == '\n') {
            return out;
        }
        if (c == '\\' && i + 1 < src.size()) {
            const char n = src[i + 1];
            if (raw) {
                out.push_back(c);
                out.push_back(n);
            } else {
                switch (n) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'r': out.push_back('\r'); break;
                    case '\n': break;
                    default: out.push_back(n); break;
                }
            }
            i += 2;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

}  // namespace

std::vector<PyToken> tokenize_python(std::string_view src) {
    std::vector<PyToken> out;
    std::size_t i = 0;
    std::size_t line = 1;
    while (i < src.size()) {
        const auto c = static_cast<unsigned char>(src[i]);
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(c)) {
            ++i;
        } else if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
        } else if (c == '\'' || c == '"') {
            const auto at = line;
            out.push_back({PyToken::Kind::String, read_string(src, i, false), at});
        } else if (is_ident_start(c)) {
            const auto start = i;
            while (i < src.size() && is_ident_char(static_cast<unsigned char>(src[i]))) ++i;
            std::string word(src.substr(start, i - start));
            // string prefixes: r'', f'', b'', rb'' ...
            if (i < src.size() && (src[i] == '\'' || src[i] == '"') && word.size() <= 2) {
                bool prefix = true;
                bool raw = false;
                for (char p : word) {
                    const char lp = static_cast<char>(std::tolower(static_cast<unsigned char>(p)));
                    if (lp == 'r') raw = true;
                    else if (lp != 'f' && lp != 'b' && lp != 'u') prefix = false;
                }
                if (prefix) {
                    out.push_back({PyToken::Kind::String, read_string(src, i, raw), line});
                    continue;
                }
            }
            out.push_back({PyToken::Kind::Identifier, std::move(word), line});
        } else if (std::isdigit(c)) {
            const auto start = i;
            while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
            out.push_back({PyToken::Kind::Other, std::string(src.substr(start, i - start)), line});
        } else {
            out.push_back({PyToken::Kind::Punct, std::string(1, static_cast<char>(c)), line});
            ++i;
        }
    }
    return out;
}

}  // namespace kgr::detail
