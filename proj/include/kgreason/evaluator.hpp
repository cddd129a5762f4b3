#pragma once
// Judging model completions against gold chains and aggregating the
// per-hop conditional accuracies.

#include "kgreason/gateway.hpp"
#include "kgreason/kg_core.hpp"
#include "kgreason/representation.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgr {

enum class FailureClass { transport, unparseable };

std::string_view to_string(FailureClass f);

struct EvalRecord {
    std::string instance_id;
    ReasoningInstance gold;
    std::optional<std::string> completion;  // absent on transport failure
    std::optional<std::string> extracted_answer;
    bool final_correct = false;
    std::vector<bool> hop_correct;
    std::optional<FailureClass> failure_class;
    std::string error;

    friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

// NFKC case-folded, trimmed, terminal punctuation and surrounding quotes
// stripped, inner whitespace collapsed to single spaces.
std::string normalize_answer(std::string_view s);

// Answer from the first {"Answer": ...} envelope; otherwise the "is X"
// clause of the last sentence.
std::optional<std::string> extract_answer(std::string_view completion, RepresentationTag representation);

// hop i is correct when the completion states a triplet whose normalized
// head and tail equal gold hop i's; relation wording is ignored.
std::vector<bool> judge_hops(std::string_view completion, const ReasoningInstance& gold,
                             RepresentationTag representation);

EvalRecord judge_completion(std::string instance_id, const ReasoningInstance& gold, const CompletionResult& result,
                            RepresentationTag representation);

struct JudgeInput {
    std::string instance_id;
    ReasoningInstance gold;
    CompletionResult result;
};

// OpenMP kernel over records; output order follows input order.
std::vector<EvalRecord> judge_all(const std::vector<JudgeInput>& inputs, RepresentationTag representation);
std::vector<EvalRecord> judge_all_serial(const std::vector<JudgeInput>& inputs, RepresentationTag representation);

struct ConditionRow {
    std::string label;              // e.g. "1st & 2nd hop correct"
    std::vector<std::size_t> hops;  // zero-based hop indices that must be correct
    std::size_t final_incorrect = 0;
    std::size_t final_correct = 0;
    std::optional<double> accuracy;  // undefined when the condition never holds

    friend bool operator==(const ConditionRow&, const ConditionRow&) = default;
};

struct MetricsReport {
    std::size_t total = 0;  // judged records, transport failures excluded
    std::size_t final_correct = 0;
    std::size_t transport_failures = 0;
    std::size_t unparseable = 0;
    std::size_t hop_count = 0;
    std::optional<double> overall_accuracy;
    std::vector<ConditionRow> rows;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Conditions for n hops: n == 1 -> first hop; n == 2 -> both hops;
// n >= 3 -> each consecutive pair, then all hops.
std::vector<ConditionRow> condition_rows_for(std::size_t hop_count);

// Throws std::invalid_argument when records disagree on hop count.
MetricsReport compute_metrics(const std::vector<EvalRecord>& records);

// Ratio helper shared with the report: correct / (correct + incorrect).
std::optional<double> conditional_accuracy(std::size_t final_incorrect, std::size_t final_correct);

enum class ReportFormat { text_table, machine };

std::string emit_report(const MetricsReport& report, ReportFormat format);
// Inverse of the machine format.
MetricsReport parse_machine_report(std::string_view line);

std::string eval_record_to_json(const EvalRecord& r);
std::optional<EvalRecord> eval_record_from_json(std::string_view line);

// "76.3%" style, or "-" when undefined.
std::string format_percent(std::optional<double> ratio);

}  // namespace kgr
