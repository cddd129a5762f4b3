#include "kgreason/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>

namespace kgr::text {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

bool is_valid_label(std::string_view s) {
    if (trim(s).empty()) return false;
    for (unsigned char c : s) {
        if (c < 0x20 || c == 0x7f) return false;
    }
    return is_valid_utf8(s);
}

bool is_valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
            (extra == 3 && cp < 0x10000) || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += extra + 1;
    }
    return true;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::size_t> find_all(std::string_view hay, std::string_view needle) {
    std::vector<std::size_t> out;
    if (needle.empty()) return out;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1))
        out.push_back(pos);
    return out;
}

std::string py_quote(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('\'');
    for (char c : s) {
        if (c == '\\' || c == '\'') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string json_quote(std::string_view s) {
    return nlohmann::json(std::string(s)).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace kgr::text

namespace kgr::text {

namespace {

constexpr std::array<std::string_view, 16> kAbbreviations = {"Dr", "Mr", "Mrs", "Ms", "St", "Jr", "Sr", "Prof",
                                                              "Gen", "Col", "Lt", "Mt", "Ft", "No", "vs", "Co"};

// Titles like "Dr." and initials like "J." do not end a sentence.
bool is_abbreviation(std::string_view before) {
    const auto sp = before.find_last_of(" \t\n(");
    const auto tok = sp == std::string_view::npos ? before : before.substr(sp + 1);
    if (tok.size() == 1) return std::isupper(static_cast<unsigned char>(tok.front())) != 0;
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), tok) != kAbbreviations.end();
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    const auto emit = [&](std::size_t end) {
        const auto piece = trim(s.substr(start, end - start));
        if (!piece.empty()) out.emplace_back(piece);
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '\n') {
            emit(i);
            start = i + 1;
            continue;
        }
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
        const bool at_end = j >= s.size() || s[j] == '\n';
        const bool next_capital = j > i + 1 && j < s.size() &&
                                  (std::isupper(static_cast<unsigned char>(s[j])) || starts_with_icase(s.substr(j), "the "));
        if (!at_end && !next_capital) continue;
        if (c == '.' && !at_end && is_abbreviation(s.substr(start, i - start))) continue;
        emit(i + 1);
        start = i + 1;
    }
    emit(s.size());
    return out;
}

}  // namespace kgr::text
