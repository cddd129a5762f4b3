#include "kgreason/evaluator.hpp"

#include "kgreason/text.hpp"

#include <nlohmann/json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <set>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace kgr {

namespace {

constexpr std::array<std::string_view, 9> kQuoteMarks = {"\"", "'", "`", "“", "”", "‘", "’",
                                                        "«", "»"};

bool strip_one_quote_pair(std::string& s) {
    for (const auto open : kQuoteMarks) {
        if (!s.starts_with(open)) continue;
        for (const auto close : kQuoteMarks) {
            if (s.size() >= open.size() + close.size() && s.ends_with(close)) {
                s = s.substr(open.size(), s.size() - open.size() - close.size());
                return true;
            }
        }
    }
    return false;
}

bool strip_terminal_punct(std::string& s) {
    bool changed = false;
    while (!s.empty() && std::string_view(".?!,;:").find(s.back()) != std::string_view::npos) {
        s.pop_back();
        changed = true;
    }
    return changed;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool pending = false;
    for (const char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

std::string casefold_nfkc(std::string_view s) {
    UErrorCode status = U_ZERO_ERROR;
    const auto* norm = icu::Normalizer2::getNFKCCasefoldInstance(status);
    if (U_FAILURE(status)) return std::string(s);
    const auto in = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    const auto folded = norm->normalize(in, status);
    if (U_FAILURE(status)) return std::string(s);
    std::string out;
    folded.toUTF8String(out);
    return out;
}

// Normalized text of a whole completion for substring matching.
std::string normalize_prose(std::string_view s) { return collapse_whitespace(casefold_nfkc(s)); }

bool word_boundary_after(std::string_view hay, std::size_t end) {
    if (end >= hay.size()) return true;
    const auto c = static_cast<unsigned char>(hay[end]);
    return !(std::isalnum(c) || c >= 0x80);
}

// "of <head> is <tail>" somewhere in the normalized completion.
bool states_hop(std::string_view prose, const std::string& head, const std::string& tail) {
    if (head.empty() || tail.empty()) return false;
    const auto needle = "of " + head + " is " + tail;
    for (const auto pos : text::find_all(prose, needle)) {
        if (word_boundary_after(prose, pos + needle.size())) return true;
    }
    return false;
}

}  // namespace

std::string_view to_string(FailureClass f) { return f == FailureClass::transport ? "transport" : "unparseable"; }

std::string normalize_answer(std::string_view s) {
    std::string out = collapse_whitespace(casefold_nfkc(text::trim(s)));
    for (bool changed = true; changed;) {
        changed = strip_terminal_punct(out);
        changed = strip_one_quote_pair(out) || changed;
        const auto trimmed = text::trim(out);
        if (trimmed.size() != out.size()) {
            out = std::string(trimmed);
            changed = true;
        }
    }
    return out;
}

std::optional<std::string> extract_answer(std::string_view completion, RepresentationTag) {
    if (const auto env = find_envelope(completion)) {
        const auto answer = text::trim(env->answer);
        if (!answer.empty()) return std::string(answer);
        return std::nullopt;
    }
    const auto sentences = text::split_sentences(completion);
    if (sentences.empty()) return std::nullopt;
    const std::string_view last = sentences.back();
    const auto is = last.rfind(" is ");
    if (is == std::string_view::npos) return std::nullopt;
    std::string answer(text::trim(last.substr(is + 4)));
    strip_terminal_punct(answer);
    answer = std::string(text::trim(answer));
    if (answer.empty() || answer == "_") return std::nullopt;
    return answer;
}

std::vector<bool> judge_hops(std::string_view completion, const ReasoningInstance& gold,
                             RepresentationTag representation) {
    std::vector<bool> out(gold.hops.size(), false);
    if (text::trim(completion).empty()) return out;

    const auto env = find_envelope(completion);
    const std::string body = env ? env->body : std::string(completion);

    std::set<std::pair<std::string, std::string>> stated;
    const auto add = [&](const std::vector<Triplet>& ts) {
        for (const auto& t : ts) stated.emplace(normalize_answer(t.head.label), normalize_answer(t.tail.label));
    };
    add(parse(representation, body).triplets);
    for (const auto tag : kAllRepresentations)
        if (tag != representation) add(parse(tag, body).triplets);
    add(scan_nl_sentences(completion));
    if (env) add(scan_nl_sentences(body));

    const auto prose = normalize_prose(body);
    const auto prose_all = env ? normalize_prose(completion) : prose;
    for (std::size_t i = 0; i < gold.hops.size(); ++i) {
        const auto head = normalize_answer(gold.hops[i].head.label);
        const auto tail = normalize_answer(gold.hops[i].tail.label);
        out[i] = stated.contains({head, tail}) || states_hop(prose, head, tail) || states_hop(prose_all, head, tail);
    }
    return out;
}

EvalRecord judge_completion(std::string instance_id, const ReasoningInstance& gold, const CompletionResult& result,
                            RepresentationTag representation) {
    EvalRecord r;
    r.instance_id = std::move(instance_id);
    r.gold = gold;
    r.hop_correct.assign(gold.hops.size(), false);
    if (!result.ok() || !result.text) {
        r.failure_class = FailureClass::transport;
        r.error = result.error.empty() ? std::string(to_string(result.status)) : result.error;
        return r;
    }
    r.completion = *result.text;
    r.extracted_answer = extract_answer(*result.text, representation);
    if (!r.extracted_answer) r.failure_class = FailureClass::unparseable;
    r.final_correct = r.extracted_answer && !gold.hops.empty() &&
                      normalize_answer(*r.extracted_answer) == normalize_answer(gold.answer().label);
    r.hop_correct = judge_hops(*result.text, gold, representation);
    return r;
}

std::vector<EvalRecord> judge_all_serial(const std::vector<JudgeInput>& inputs, RepresentationTag representation) {
    std::vector<EvalRecord> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) out.push_back(judge_completion(in.instance_id, in.gold, in.result, representation));
    return out;
}

std::vector<EvalRecord> judge_all(const std::vector<JudgeInput>& inputs, RepresentationTag representation) {
    const auto n = static_cast<std::int64_t>(inputs.size());
    std::vector<EvalRecord> out(inputs.size());
    std::vector<std::exception_ptr> errors(inputs.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 32)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = judge_completion(inputs[k].instance_id, inputs[k].gold, inputs[k].result, representation);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::optional<double> conditional_accuracy(std::size_t final_incorrect, std::size_t final_correct) {
    const auto denom = final_incorrect + final_correct;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(final_correct) / static_cast<double>(denom);
}

std::vector<ConditionRow> condition_rows_for(std::size_t n) {
    static constexpr std::array<std::string_view, 10> kOrdinal = {"1st", "2nd", "3rd", "4th", "5th",
                                                                  "6th", "7th", "8th", "9th", "10th"};
    const auto ordinal = [](std::size_t i) {
        return i < kOrdinal.size() ? std::string(kOrdinal[i]) : std::to_string(i + 1) + "th";
    };
    std::vector<ConditionRow> rows;
    if (n == 0) return rows;
    if (n == 1) {
        rows.push_back({"1st hop correct", {0}, 0, 0, std::nullopt});
        return rows;
    }
    if (n == 2) {
        rows.push_back({"1st & 2nd hop correct", {0, 1}, 0, 0, std::nullopt});
        return rows;
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        rows.push_back({ordinal(i) + " & " + ordinal(i + 1) + " hop correct", {i, i + 1}, 0, 0, std::nullopt});
    ConditionRow all{n == 3 ? "all three hops correct" : "all " + std::to_string(n) + " hops correct", {}, 0, 0,
                     std::nullopt};
    for (std::size_t i = 0; i < n; ++i) all.hops.push_back(i);
    rows.push_back(std::move(all));
    return rows;
}

MetricsReport compute_metrics(const std::vector<EvalRecord>& records) {
    MetricsReport report;
    for (const auto& r : records) {
        if (report.hop_count == 0) report.hop_count = r.gold.hops.size();
        else if (r.gold.hops.size() != report.hop_count)
            throw std::invalid_argument("records mix " + std::to_string(report.hop_count) + "-hop and " +
                                        std::to_string(r.gold.hops.size()) + "-hop instances");
    }
    report.rows = condition_rows_for(report.hop_count);
    for (const auto& r : records) {
        if (r.failure_class == FailureClass::transport) {
            ++report.transport_failures;
            continue;
        }
        ++report.total;
        if (r.failure_class == FailureClass::unparseable) ++report.unparseable;
        if (r.final_correct) ++report.final_correct;
        for (auto& row : report.rows) {
            const bool holds = std::all_of(row.hops.begin(), row.hops.end(),
                                           [&](std::size_t h) { return h < r.hop_correct.size() && r.hop_correct[h]; });
            if (!holds) continue;
            if (r.final_correct) ++row.final_correct;
            else ++row.final_incorrect;
        }
    }
    for (auto& row : report.rows) row.accuracy = conditional_accuracy(row.final_incorrect, row.final_correct);
    if (report.total > 0)
        report.overall_accuracy = static_cast<double>(report.final_correct) / static_cast<double>(report.total);
    return report;
}

std::string format_percent(std::optional<double> ratio) {
    if (!ratio) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", *ratio * 100.0);
    return buf;
}

std::string emit_report(const MetricsReport& report, ReportFormat format) {
    if (format == ReportFormat::machine) {
        nlohmann::ordered_json j;
        j["total"] = report.total;
        j["final_correct"] = report.final_correct;
        j["transport_failures"] = report.transport_failures;
        j["unparseable"] = report.unparseable;
        j["hop_count"] = report.hop_count;
        j["overall_accuracy"] = report.overall_accuracy ? nlohmann::ordered_json(*report.overall_accuracy) : nlohmann::ordered_json(nullptr);
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : report.rows) {
            nlohmann::ordered_json jr;
            jr["label"] = row.label;
            jr["hops"] = row.hops;
            jr["final_incorrect"] = row.final_incorrect;
            jr["final_correct"] = row.final_correct;
            jr["accuracy"] = row.accuracy ? nlohmann::ordered_json(*row.accuracy) : nlohmann::ordered_json(nullptr);
            rows.push_back(std::move(jr));
        }
        j["conditions"] = std::move(rows);
        return j.dump() + "\n";
    }

    // Three header lines, one value line:
    // each condition contributes "final incorrect / final correct / final accuracy".
    std::vector<std::array<std::string, 4>> columns;  // header1, header2, header3, value
    columns.push_back({"Records", "", "", std::to_string(report.total)});
    columns.push_back({"Accuracy", "", "", format_percent(report.overall_accuracy)});
    for (const auto& row : report.rows) {
        columns.push_back({row.label, "", "final incorrect", std::to_string(row.final_incorrect)});
        columns.push_back({row.label, "", "final correct", std::to_string(row.final_correct)});
        columns.push_back({row.label, "", "final accuracy", format_percent(row.accuracy)});
    }
    // split "1st & 2nd hop correct" over two header lines
    for (auto& c : columns) {
        const auto amp = c[0].find(" & ");
        if (amp != std::string::npos) {
            c[1] = c[0].substr(amp + 3);
            c[0] = c[0].substr(0, amp) + " &";
        }
    }
    std::vector<std::size_t> width;
    for (const auto& c : columns)
        width.push_back(std::max({c[0].size(), c[1].size(), c[2].size(), c[3].size()}));
    std::string out;
    for (std::size_t line = 0; line < 4; ++line) {
        if (line == 1 && std::all_of(columns.begin(), columns.end(), [](const auto& c) { return c[1].empty(); }))
            continue;
        std::string text_line;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) text_line += "  ";
            text_line += columns[i][line] + std::string(width[i] - columns[i][line].size(), ' ');
        }
        while (!text_line.empty() && text_line.back() == ' ') text_line.pop_back();
        out += text_line + "\n";
    }
    out += "Transport failures: " + std::to_string(report.transport_failures) + "\n";
    out += "Unparseable completions: " + std::to_string(report.unparseable) + "\n";
    return out;
}

MetricsReport parse_machine_report(std::string_view line) {
    const auto j = nlohmann::json::parse(line);
    MetricsReport r;
    r.total = j.at("total").get<std::size_t>();
    r.final_correct = j.at("final_correct").get<std::size_t>();
    r.transport_failures = j.at("transport_failures").get<std::size_t>();
    r.unparseable = j.at("unparseable").get<std::size_t>();
    r.hop_count = j.at("hop_count").get<std::size_t>();
    if (!j.at("overall_accuracy").is_null()) r.overall_accuracy = j["overall_accuracy"].get<double>();
    for (const auto& jr : j.at("conditions")) {
        ConditionRow row;
        row.label = jr.at("label").get<std::string>();
        row.hops = jr.at("hops").get<std::vector<std::size_t>>();
        row.final_incorrect = jr.at("final_incorrect").get<std::size_t>();
        row.final_correct = jr.at("final_correct").get<std::size_t>();
        if (!jr.at("accuracy").is_null()) row.accuracy = jr["accuracy"].get<double>();
        r.rows.push_back(std::move(row));
    }
    return r;
}

std::string eval_record_to_json(const EvalRecord& r) {
    nlohmann::ordered_json j;
    j["instance_id"] = r.instance_id;
    auto hops = nlohmann::ordered_json::array();
    for (const auto& h : r.gold.hops) hops.push_back({h.head.label, h.relation.label, h.tail.label});
    j["hops"] = std::move(hops);
    j["completion"] = r.completion ? nlohmann::ordered_json(*r.completion) : nlohmann::ordered_json(nullptr);
    j["extracted_answer"] = r.extracted_answer ? nlohmann::ordered_json(*r.extracted_answer) : nlohmann::ordered_json(nullptr);
    j["final_correct"] = r.final_correct;
    j["hop_correct"] = r.hop_correct;
    j["failure_class"] = r.failure_class ? nlohmann::ordered_json(std::string(to_string(*r.failure_class))) : nlohmann::ordered_json(nullptr);
    if (!r.error.empty()) j["error"] = r.error;
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::optional<EvalRecord> eval_record_from_json(std::string_view line) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        EvalRecord r;
        r.instance_id = j.at("instance_id").get<std::string>();
        for (const auto& h : j.at("hops"))
            r.gold.hops.emplace_back(h.at(0).get<std::string>(), h.at(1).get<std::string>(), h.at(2).get<std::string>());
        r.gold.source_id = r.instance_id;
        if (!j.at("completion").is_null()) r.completion = j["completion"].get<std::string>();
        if (!j.at("extracted_answer").is_null()) r.extracted_answer = j["extracted_answer"].get<std::string>();
        r.final_correct = j.at("final_correct").get<bool>();
        r.hop_correct = j.at("hop_correct").get<std::vector<bool>>();
        if (!j.at("failure_class").is_null())
            r.failure_class = j["failure_class"] == "transport" ? FailureClass::transport : FailureClass::unparseable;
        r.error = j.value("error", std::string{});
        return r;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

}  // namespace kgr
