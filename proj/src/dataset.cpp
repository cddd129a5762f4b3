#include "kgreason/dataset.hpp"

#include "kgreason/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace kgr {

namespace {

constexpr std::array<std::string_view, 6> kRequiredColumns = {"id", "e1", "r1", "e2", "r2", "e3"};

using RawRow = std::map<std::string, std::string, std::less<>>;

std::optional<std::string> field(const RawRow& row, std::string_view name) {
    const auto it = row.find(name);
    if (it == row.end()) return std::nullopt;
    const auto v = text::trim(it->second);
    if (v.empty()) return std::nullopt;
    return std::string(v);
}

// Builds a record from named fields or explains what is missing.
std::variant<SourceRecord, std::string> record_from_row(const RawRow& row) {
    SourceRecord rec;
    for (const auto name : kRequiredColumns) {
        if (!field(row, name)) return "missing " + std::string(name);
    }
    rec.id = *field(row, "id");
    rec.e1 = Entity{*field(row, "e1")};
    rec.r1 = Relation{*field(row, "r1")};
    rec.e2 = Entity{*field(row, "e2")};
    rec.r2 = Relation{*field(row, "r2")};
    rec.e3 = Entity{*field(row, "e3")};
    const auto r3 = field(row, "r3");
    const auto e4 = field(row, "e4");
    if (r3.has_value() != e4.has_value()) return std::string(r3 ? "r3 present without e4" : "e4 present without r3");
    if (r3) {
        rec.r3 = Relation{*r3};
        rec.e4 = Entity{*e4};
    }
    if (auto ctx = field(row, "context")) rec.context = std::move(*ctx);
    if (auto problems = validate_record(rec); !problems.empty()) return problems.front();
    return rec;
}

struct Ingestor {
    IngestResult result;
    KnowledgeGraph facts;
    std::unordered_set<std::string> ids;
    std::size_t data_rows = 0;

    void reject(std::size_t line, std::string reason, bool conflict = false) {
        result.rejects.push_back({line, std::move(reason), conflict});
        if (conflict) ++result.conflict_rows;
        else ++result.invalid_rows;
    }

    void accept_row(std::size_t line, const RawRow& row) {
        ++data_rows;
        auto built = record_from_row(row);
        if (auto* why = std::get_if<std::string>(&built)) {
            reject(line, *why);
            return;
        }
        auto& rec = std::get<SourceRecord>(built);
        if (ids.contains(rec.id)) {
            reject(line, "duplicate id '" + rec.id + "'");
            return;
        }
        // A row conflicts when one of its facts maps an existing (head, relation)
        // key to a different tail, either against earlier rows or within itself.
        const auto chain = rec.to_instance();
        KnowledgeGraph local;
        for (const auto& hop : chain.hops) {
            const auto known = facts.lookup(hop.head, hop.relation);
            const bool clash_global = known && *known != hop.tail;
            const bool clash_local = local.add_fact(hop).replaced;
            if (clash_global || clash_local) {
                reject(line,
                       "conflicting fact (" + hop.head.label + ", " + hop.relation.label + ") -> '" + hop.tail.label +
                           "' vs '" + (clash_global ? known->label : std::string("another hop")) + "'",
                       true);
                return;
            }
        }
        for (const auto& hop : chain.hops) facts.add_fact(hop);
        ids.insert(rec.id);
        result.records.push_back(std::move(rec));
    }

    IngestResult finish() {
        if (data_rows > 0 && result.invalid_rows * 2 > data_rows) {
            throw IngestError(std::to_string(result.invalid_rows) + " of " + std::to_string(data_rows) +
                              " rows are invalid; first problem at line " +
                              std::to_string(result.rejects.front().line) + ": " + result.rejects.front().reason);
        }
        return std::move(result);
    }
};

IngestResult ingest_tsv(std::string_view content) {
    Ingestor in;
    std::istringstream stream{std::string(content)};
    std::string line;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (header.empty()) {
            if (text::trim(line).empty()) continue;
            for (auto& col : text::split(line, '\t')) header.emplace_back(text::trim(col));
            if (!header.empty() && header.front().starts_with("\xEF\xBB\xBF")) header.front().erase(0, 3);
            for (const auto name : kRequiredColumns) {
                if (std::find(header.begin(), header.end(), name) == header.end())
                    throw IngestError("TSV header lacks required column '" + std::string(name) + "'");
            }
            continue;
        }
        if (text::trim(line).empty()) continue;
        const auto cells = text::split(line, '\t');
        RawRow row;
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
        in.accept_row(line_no, row);
    }
    return in.finish();  // an empty file is an empty record set
}

IngestResult ingest_json_lines(std::string_view content) {
    Ingestor in;
    std::istringstream stream{std::string(content)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            ++in.data_rows;
            in.reject(line_no, "not a JSON object");
            continue;
        }
        RawRow row;
        for (const auto& [key, value] : doc.items()) {
            if (value.is_string()) row[key] = value.get<std::string>();
            else if (value.is_number()) row[key] = value.dump();
        }
        in.accept_row(line_no, row);
    }
    return in.finish();
}

std::string tsv_cell(std::string_view s) {
    std::string out(s);
    std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    return out;
}

std::string with_thousands(std::size_t v) {
    auto digits = std::to_string(v);
    for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3) digits.insert(static_cast<std::size_t>(i), ",");
    return digits;
}

std::string row_key(const SourceRecord& r) {
    std::string key = r.e1.label + '\x1f' + r.r1.label + '\x1f' + r.e2.label + '\x1f' + r.r2.label + '\x1f' + r.e3.label;
    if (r.is_three_hop()) key += '\x1f' + r.r3->label + '\x1f' + r.e4->label;
    return key;
}

std::string pair_key(std::string_view a, std::string_view b) {
    std::string key(a);
    key += '\x1f';
    key += b;
    return key;
}

FinetuneRecord make_finetune(const ReasoningInstance& chain, RepresentationTag rep, DatasetStyle style) {
    PromptRequest req;
    req.mode = PromptMode::zero_shot;
    req.style = style;
    req.representation = rep;
    auto prompt = build_prompt(chain, req);
    auto rendered = render(chain, rep);
    return {std::move(prompt.full_prompt), std::move(rendered.envelope), static_cast<int>(chain.hop_count()), rep};
}

void corpus_entries(const SourceRecord& rec, RepresentationTag rep, DatasetStyle style, FinetuneRecord& one_hop,
                    FinetuneRecord& two_hop) {
    if (rec.is_three_hop()) throw CorpusError(rec.id, "record '" + rec.id + "' is not a two-hop record");
    try {
        const auto chain = rec.to_instance();
        ReasoningInstance first{{chain.hops.front()}, rec.id};
        one_hop = make_finetune(first, rep, style);
        two_hop = make_finetune(chain, rep, style);
    } catch (const std::exception& e) {
        throw CorpusError(rec.id, "record '" + rec.id + "': " + e.what());
    }
}

}  // namespace

ReasoningInstance SourceRecord::to_instance() const {
    ReasoningInstance out;
    out.source_id = id;
    out.hops.emplace_back(e1, r1, e2);
    out.hops.emplace_back(e2, r2, e3);
    if (is_three_hop()) out.hops.emplace_back(e3, *r3, *e4);
    return out;
}

std::vector<std::string> validate_record(const SourceRecord& r) {
    std::vector<std::string> out;
    if (text::trim(r.id).empty()) out.emplace_back("empty id");
    if (r.r3.has_value() != r.e4.has_value()) out.emplace_back("r3 and e4 must be both present or both absent");
    for (auto& v : validate_instance(r.to_instance())) out.push_back(std::move(v));
    return out;
}

std::optional<RecordFormat> parse_record_format(std::string_view name) {
    if (name == "tsv") return RecordFormat::tsv;
    if (name == "json_lines" || name == "jsonl") return RecordFormat::json_lines;
    return std::nullopt;
}

RecordFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".tsv" ? RecordFormat::tsv : RecordFormat::json_lines;
}

IngestResult ingest_text(std::string_view content, RecordFormat format) {
    return format == RecordFormat::tsv ? ingest_tsv(content) : ingest_json_lines(content);
}

IngestResult ingest(const std::filesystem::path& path, RecordFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_text(buf.str(), format);
}

std::string serialize_records(const std::vector<SourceRecord>& records, RecordFormat format) {
    std::string out;
    if (format == RecordFormat::tsv) {
        const bool three = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.is_three_hop(); });
        const bool ctx = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.context.has_value(); });
        out = "id\te1\tr1\te2\tr2\te3";
        if (three) out += "\tr3\te4";
        if (ctx) out += "\tcontext";
        out += "\n";
        for (const auto& r : records) {
            out += tsv_cell(r.id) + "\t" + tsv_cell(r.e1.label) + "\t" + tsv_cell(r.r1.label) + "\t" +
                   tsv_cell(r.e2.label) + "\t" + tsv_cell(r.r2.label) + "\t" + tsv_cell(r.e3.label);
            if (three) out += "\t" + (r.r3 ? tsv_cell(r.r3->label) : "") + "\t" + (r.e4 ? tsv_cell(r.e4->label) : "");
            if (ctx) out += "\t" + tsv_cell(r.context.value_or(""));
            out += "\n";
        }
        return out;
    }
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["e1"] = r.e1.label;
        j["r1"] = r.r1.label;
        j["e2"] = r.e2.label;
        j["r2"] = r.r2.label;
        j["e3"] = r.e3.label;
        if (r.r3) j["r3"] = r.r3->label;
        if (r.e4) j["e4"] = r.e4->label;
        if (r.context) j["context"] = *r.context;
        out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    }
    return out;
}

void write_records(const std::filesystem::path& path, const std::vector<SourceRecord>& records, RecordFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << serialize_records(records, format);
}

void SplitSpec::validate() const {
    if (num_partitions < 1) throw std::invalid_argument("number of partitions must be positive");
    if (train_partition_index < 0 || train_partition_index >= num_partitions)
        throw std::invalid_argument("train partition index out of range");
    if (test_partition_index < 0 || test_partition_index >= num_partitions)
        throw std::invalid_argument("test partition index out of range");
    if (train_partition_index == test_partition_index)
        throw std::invalid_argument("train and test partitions must differ");
}

PartitionResult partition_by_bridge(const std::vector<SourceRecord>& records, const SplitSpec& spec) {
    spec.validate();
    if (records.empty()) throw std::invalid_argument("cannot partition an empty record list");

    std::map<std::string, std::size_t> group_size;
    for (const auto& r : records) ++group_size[r.e2.label];
    std::vector<std::pair<std::string, std::size_t>> groups(group_size.begin(), group_size.end());
    // map order already gives label ascending; stable sort keeps it as the tiebreak
    std::stable_sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    PartitionResult out;
    const auto n = static_cast<std::size_t>(spec.num_partitions);
    for (std::size_t k = 0; k < groups.size(); ++k) out.partition_map[groups[k].first] = static_cast<int>(k % n);
    out.partitions.resize(n);
    for (const auto& r : records) out.partitions[static_cast<std::size_t>(out.partition_map.at(r.e2.label))].push_back(r);
    out.train = out.partitions[static_cast<std::size_t>(spec.train_partition_index)];
    out.test = out.partitions[static_cast<std::size_t>(spec.test_partition_index)];
    return out;
}

std::vector<SourceRecord> cap_relation_pairs(const std::vector<SourceRecord>& records, std::size_t cap,
                                             std::uint64_t seed) {
    if (cap == 0) throw std::invalid_argument("cap must be at least 1");
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_pair;
    for (std::size_t i = 0; i < records.size(); ++i) by_pair[{records[i].r1.label, records[i].r2.label}].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<bool> keep(records.size(), false);
    for (const auto& [pair, idx] : by_pair) {
        if (idx.size() <= cap) {
            for (const auto i : idx) keep[i] = true;
            continue;
        }
        std::vector<std::size_t> chosen;
        chosen.reserve(cap);
        std::sample(idx.begin(), idx.end(), std::back_inserter(chosen), cap, rng);
        for (const auto i : chosen) keep[i] = true;
    }
    std::vector<SourceRecord> out;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (keep[i]) out.push_back(records[i]);
    return out;
}

std::vector<SourceRecord> extend_to_three_hops(const std::vector<SourceRecord>& two_hop,
                                               const std::vector<Triplet>& extra_facts,
                                               const std::set<std::string>& e3_whitelist) {
    // smallest (r3, e4) per head
    std::unordered_map<std::string, std::pair<std::string, std::string>> best;
    for (const auto& f : extra_facts) {
        if (!f.valid()) continue;
        auto candidate = std::make_pair(f.relation.label, f.tail.label);
        auto [it, inserted] = best.try_emplace(f.head.label, candidate);
        if (!inserted && candidate < it->second) it->second = std::move(candidate);
    }
    std::vector<SourceRecord> out;
    for (const auto& rec : two_hop) {
        if (rec.is_three_hop() || !e3_whitelist.contains(rec.e3.label)) continue;
        const auto hit = best.find(rec.e3.label);
        if (hit == best.end()) continue;
        SourceRecord ext = rec;
        ext.r3 = Relation{hit->second.first};
        ext.e4 = Entity{hit->second.second};
        if (!validate_record(ext).empty()) continue;
        try {
            (void)chain_to_graph(ext.to_instance());
        } catch (const ChainError&) {
            continue;
        }
        out.push_back(std::move(ext));
    }
    return out;
}

OverlapStats compute_overlap_stats(const std::vector<SourceRecord>& train, const std::vector<SourceRecord>& test) {
    OverlapStats s;
    s.train_size = train.size();
    s.test_size = test.size();
    const auto hops = [](const std::vector<SourceRecord>& rs) {
        std::size_t h = 0;
        for (const auto& r : rs) h = std::max<std::size_t>(h, r.is_three_hop() ? 3 : 2);
        return h;
    };
    s.train_hops = hops(train);
    s.test_hops = hops(test);

    std::unordered_set<std::string> train_rows, train_bridges, train_pairs;
    for (const auto& r : train) {
        train_rows.insert(row_key(r));
        train_bridges.insert(r.e2.label);
        train_pairs.insert(pair_key(r.r1.label, r.r2.label));
    }
    std::unordered_set<std::string> test_bridges, test_pairs;
    for (const auto& r : test) {
        test_bridges.insert(r.e2.label);
        test_pairs.insert(pair_key(r.r1.label, r.r2.label));
        if (train_rows.contains(row_key(r))) ++s.row_overlap;
        if (train_pairs.contains(pair_key(r.r1.label, r.r2.label))) ++s.rows_covered_by_shared_pairs;
    }
    s.bridge_entities_train = train_bridges.size();
    s.bridge_entities_test = test_bridges.size();
    s.relation_pairs_train = train_pairs.size();
    s.relation_pairs_test = test_pairs.size();
    for (const auto& b : test_bridges) s.bridge_overlap += train_bridges.contains(b) ? 1 : 0;
    for (const auto& p : test_pairs) s.relation_pair_overlap += train_pairs.contains(p) ? 1 : 0;

    if (std::any_of(test.begin(), test.end(), [](const auto& r) { return r.is_three_hop(); })) {
        OverlapStats::ThreeHop th;
        std::unordered_set<std::string> test_e3, test_r2r3;
        for (const auto& r : test) {
            test_e3.insert(r.e3.label);
            if (r.is_three_hop()) test_r2r3.insert(pair_key(r.r2.label, r.r3->label));
        }
        th.test_e3 = test_e3.size();
        for (const auto& e : test_e3) th.train_e2_test_e3_overlap += train_bridges.contains(e) ? 1 : 0;
        th.test_r2r3_pairs = test_r2r3.size();
        for (const auto& p : test_r2r3) th.r2r3_in_train_r1r2 += train_pairs.contains(p) ? 1 : 0;
        s.three_hop = th;
    }
    return s;
}

std::string format_stats_table(const OverlapStats& s) {
    std::vector<std::array<std::string, 4>> rows;
    rows.push_back({"", "Train", "Test", "Intersection"});
    rows.push_back({"Number of Hops", std::to_string(s.train_hops), std::to_string(s.test_hops),
                    std::to_string(s.train_hops == s.test_hops ? s.train_hops : 0)});
    rows.push_back({"Dataset Size", with_thousands(s.train_size), with_thousands(s.test_size),
                    with_thousands(s.row_overlap)});
    rows.push_back({"Bridge Entities (e2)", with_thousands(s.bridge_entities_train),
                    with_thousands(s.bridge_entities_test), with_thousands(s.bridge_overlap)});
    rows.push_back({"Relations (r1, r2)", with_thousands(s.relation_pairs_train), with_thousands(s.relation_pairs_test),
                    with_thousands(s.relation_pair_overlap)});
    rows.push_back({"No. of row with (r1, r2)", with_thousands(s.train_size), with_thousands(s.test_size),
                    with_thousands(s.rows_covered_by_shared_pairs)});
    if (s.three_hop) {
        rows.push_back({"Train e2 vs Test e3", with_thousands(s.bridge_entities_train),
                        with_thousands(s.three_hop->test_e3), with_thousands(s.three_hop->train_e2_test_e3_overlap)});
        rows.push_back({"Relations (r2, r3)", with_thousands(s.relation_pairs_train) + "*",
                        with_thousands(s.three_hop->test_r2r3_pairs), with_thousands(s.three_hop->r2r3_in_train_r1r2)});
    }
    std::array<std::size_t, 4> width{};
    for (const auto& row : rows)
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
    std::string out;
    for (const auto& row : rows) {
        std::string line = row[0] + std::string(width[0] - row[0].size(), ' ');
        for (std::size_t c = 1; c < 4; ++c) line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
        out += line + "\n";
    }
    if (s.three_hop) out += "* (r1, r2) pairs of the train side\n";
    return out;
}

std::string stats_to_json(const OverlapStats& s) {
    nlohmann::ordered_json j;
    j["train_hops"] = s.train_hops;
    j["test_hops"] = s.test_hops;
    j["train_size"] = s.train_size;
    j["test_size"] = s.test_size;
    j["row_overlap"] = s.row_overlap;
    j["bridge_entities_train"] = s.bridge_entities_train;
    j["bridge_entities_test"] = s.bridge_entities_test;
    j["bridge_overlap"] = s.bridge_overlap;
    j["relation_pairs_train"] = s.relation_pairs_train;
    j["relation_pairs_test"] = s.relation_pairs_test;
    j["relation_pair_overlap"] = s.relation_pair_overlap;
    j["rows_covered_by_shared_pairs"] = s.rows_covered_by_shared_pairs;
    if (s.three_hop) {
        j["test_e3"] = s.three_hop->test_e3;
        j["train_e2_test_e3_overlap"] = s.three_hop->train_e2_test_e3_overlap;
        j["test_r2r3_pairs"] = s.three_hop->test_r2r3_pairs;
        j["r2r3_in_train_r1r2"] = s.three_hop->r2r3_in_train_r1r2;
    }
    return j.dump();
}

std::vector<FinetuneRecord> build_finetune_corpus_serial(const std::vector<SourceRecord>& records,
                                                         RepresentationTag representation, DatasetStyle style) {
    std::vector<FinetuneRecord> out(records.size() * 2);
    for (std::size_t i = 0; i < records.size(); ++i)
        corpus_entries(records[i], representation, style, out[2 * i], out[2 * i + 1]);
    return out;
}

std::vector<FinetuneRecord> build_finetune_corpus(const std::vector<SourceRecord>& records,
                                                  RepresentationTag representation, DatasetStyle style) {
    const auto n = static_cast<std::int64_t>(records.size());
    std::vector<FinetuneRecord> out(records.size() * 2);
    std::vector<std::exception_ptr> errors(records.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 64)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            corpus_entries(records[k], representation, style, out[2 * k], out[2 * k + 1]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::string finetune_record_to_json(const FinetuneRecord& r) {
    nlohmann::ordered_json j;
    j["prompt"] = r.prompt;
    j["response"] = r.response;
    j["hops"] = r.hops;
    j["representation"] = std::string(to_string(r.representation));
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

bool response_round_trips(const FinetuneRecord& r) {
    const auto env = find_envelope(r.response);
    if (!env || env->answer.empty() || env->body_key != envelope_body_key(r.representation)) return false;
    const auto parsed = parse(r.representation, env->body);
    return static_cast<int>(parsed.triplets.size()) == r.hops && parsed.diagnostic.empty();
}

}  // namespace kgr
