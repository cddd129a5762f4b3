#pragma once
// Dataset pipeline: ingestion of two/three-hop source rows, partitioning by
// bridge entity, per-relation-pair capping, third-hop extension, overlap
// statistics and fine-tuning corpus assembly.

#include "kgreason/kg_core.hpp"
#include "kgreason/prompt.hpp"
#include "kgreason/representation.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgr {

struct SourceRecord {
    std::string id;
    Entity e1;
    Relation r1;
    Entity e2;
    Relation r2;
    Entity e3;
    std::optional<Relation> r3;
    std::optional<Entity> e4;
    // Free-text passage shipped with some datasets; used as prompt context.
    std::optional<std::string> context;

    bool is_three_hop() const { return r3.has_value() && e4.has_value(); }
    ReasoningInstance to_instance() const;

    friend bool operator==(const SourceRecord&, const SourceRecord&) = default;
};

// Empty when the record is well formed.
std::vector<std::string> validate_record(const SourceRecord& r);

enum class RecordFormat { tsv, json_lines };

std::optional<RecordFormat> parse_record_format(std::string_view name);
// ".tsv" -> tsv, anything else -> json_lines.
RecordFormat format_for_path(const std::filesystem::path& path);

struct RowReject {
    std::size_t line = 0;  // 1-based line in the input file
    std::string reason;
    bool conflict = false;
};

struct IngestResult {
    std::vector<SourceRecord> records;
    std::vector<RowReject> rejects;
    std::size_t invalid_rows = 0;
    std::size_t conflict_rows = 0;
};

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws IngestError for unreadable files, malformed headers, or when more
// than half of the data rows are invalid.
IngestResult ingest(const std::filesystem::path& path, RecordFormat format);
IngestResult ingest_text(std::string_view content, RecordFormat format);

std::string serialize_records(const std::vector<SourceRecord>& records, RecordFormat format);
void write_records(const std::filesystem::path& path, const std::vector<SourceRecord>& records, RecordFormat format);

struct SplitSpec {
    int num_partitions = 8;
    int train_partition_index = 2;
    int test_partition_index = 4;

    // Throws std::invalid_argument when an index is out of range or train == test.
    void validate() const;
};

struct PartitionResult {
    std::vector<SourceRecord> train;
    std::vector<SourceRecord> test;
    std::map<std::string, int> partition_map;  // bridge entity label -> partition
    std::vector<std::vector<SourceRecord>> partitions;
};

// Groups by e2, orders groups by size descending then label ascending and
// deals them round-robin. Records keep their input order inside a partition.
PartitionResult partition_by_bridge(const std::vector<SourceRecord>& records, const SplitSpec& spec);

// At most `cap` records per (r1, r2) pair, chosen by seeded sampling without
// replacement. Kept records stay in input order.
std::vector<SourceRecord> cap_relation_pairs(const std::vector<SourceRecord>& records, std::size_t cap,
                                             std::uint64_t seed);

// Appends a third hop (e3, r3, e4) from extra_facts to each two-hop record
// whose e3 is whitelisted; among candidates the smallest (r3, e4) wins.
std::vector<SourceRecord> extend_to_three_hops(const std::vector<SourceRecord>& two_hop,
                                               const std::vector<Triplet>& extra_facts,
                                               const std::set<std::string>& e3_whitelist);

struct OverlapStats {
    std::size_t train_hops = 0;
    std::size_t test_hops = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t row_overlap = 0;  // test rows identical to some train row
    std::size_t bridge_entities_train = 0;
    std::size_t bridge_entities_test = 0;
    std::size_t bridge_overlap = 0;
    std::size_t relation_pairs_train = 0;
    std::size_t relation_pairs_test = 0;
    std::size_t relation_pair_overlap = 0;
    std::size_t rows_covered_by_shared_pairs = 0;

    // Filled when the test side holds three-hop records.
    struct ThreeHop {
        std::size_t test_e3 = 0;
        std::size_t train_e2_test_e3_overlap = 0;
        std::size_t test_r2r3_pairs = 0;
        std::size_t r2r3_in_train_r1r2 = 0;
    };
    std::optional<ThreeHop> three_hop;
};

OverlapStats compute_overlap_stats(const std::vector<SourceRecord>& train, const std::vector<SourceRecord>& test);

std::string format_stats_table(const OverlapStats& stats);
std::string stats_to_json(const OverlapStats& stats);

struct FinetuneRecord {
    std::string prompt;
    std::string response;
    int hops = 0;
    RepresentationTag representation = RepresentationTag::natural_language;
};

class CorpusError : public std::runtime_error {
public:
    CorpusError(std::string record_id, const std::string& what)
        : std::runtime_error(what), record_id_(std::move(record_id)) {}
    const std::string& record_id() const { return record_id_; }

private:
    std::string record_id_;
};

// Two entries per record: a one-hop example built from (e1, r1, e2) and the
// two-hop example. Prompts are zero-shot, responses are answer envelopes.
// Runs the per-record work in parallel; output order follows input order.
std::vector<FinetuneRecord> build_finetune_corpus(const std::vector<SourceRecord>& records,
                                                  RepresentationTag representation, DatasetStyle style);
// Single-threaded reference with identical output.
std::vector<FinetuneRecord> build_finetune_corpus_serial(const std::vector<SourceRecord>& records,
                                                         RepresentationTag representation, DatasetStyle style);

std::string finetune_record_to_json(const FinetuneRecord& r);

// True when the response envelope's body parses back to at least one
// triplet under its representation.
bool response_round_trips(const FinetuneRecord& r);

}  // namespace kgr
