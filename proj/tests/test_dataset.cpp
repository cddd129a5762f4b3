#include "doctest.h"
#include "support.hpp"

#include "kgreason/dataset.hpp"

#include <algorithm>
#include <map>

using namespace kgr;

namespace {

SourceRecord rec(std::string id, std::string e1, std::string r1, std::string e2, std::string r2, std::string e3) {
    SourceRecord r;
    r.id = std::move(id);
    r.e1 = Entity{std::move(e1)};
    r.r1 = Relation{std::move(r1)};
    r.e2 = Entity{std::move(e2)};
    r.r2 = Relation{std::move(r2)};
    r.e3 = Entity{std::move(e3)};
    return r;
}

std::multiset<std::string> ids(const std::vector<SourceRecord>& rs) {
    std::multiset<std::string> out;
    for (const auto& r : rs) out.insert(r.id);
    return out;
}

}  // namespace

TEST_CASE("ingest TSV") {
    const std::string ok = "id\te1\tr1\te2\tr2\te3\n"
                           "1\tIt Goes Like It Goes\tcomposer\tDavid Shire\tspouse\tDidi Conn\n"
                           "2\tJaws\tcomposer\tJohn Williams\tspouse\tSamantha Winslow\n"
                           "3\tPsycho\tdirector\tAlfred Hitchcock\tspouse\tAlma Reville\n";
    auto res = ingest_text(ok, RecordFormat::tsv);
    CHECK(res.records.size() == 3);
    CHECK(res.rejects.empty());
    CHECK(res.records[0].e3.label == "Didi Conn");

    const std::string missing = "id\te1\tr1\te2\tr2\te3\n"
                                "1\ta\tr\tb\ts\tc\n"
                                "2\td\tr\te\ts\t\n"
                                "3\tf\tr\tg\ts\th\n";
    res = ingest_text(missing, RecordFormat::tsv);
    CHECK(res.records.size() == 2);
    REQUIRE(res.rejects.size() == 1);
    CHECK(res.rejects[0].line == 3);
    CHECK(res.invalid_rows == 1);

    const std::string conflict = "id\te1\tr1\te2\tr2\te3\n"
                                 "1\ta\tr\tb\ts\tc\n"
                                 "2\ta\tr\tx\ts\ty\n";
    res = ingest_text(conflict, RecordFormat::tsv);
    CHECK(res.records.size() == 1);
    CHECK(res.conflict_rows == 1);
    REQUIRE(res.rejects.size() == 1);
    CHECK(res.rejects[0].conflict);
    CHECK(res.rejects[0].line == 3);
    // cross-check with the fact store's replacement flag
    KnowledgeGraph kg;
    kg.add_fact(Triplet("a", "r", "b"));
    CHECK(kg.add_fact(Triplet("a", "r", "x")).replaced);

    CHECK_THROWS_AS(ingest_text("id\te1\n1\ta\n", RecordFormat::tsv), IngestError);
    CHECK_THROWS_AS(ingest_text("id\te1\tr1\te2\tr2\te3\n1\ta\n2\tb\n3\tc\td\te\tf\tg\n", RecordFormat::tsv), IngestError);
    CHECK(ingest_text("", RecordFormat::tsv).records.empty());
    CHECK_THROWS_AS(ingest("/nonexistent/file.tsv", RecordFormat::tsv), IngestError);
}

TEST_CASE("ingest JSON lines, three-hop rows and duplicates") {
    const std::string lines =
        R"({"id": "a", "e1": "x", "r1": "p", "e2": "y", "r2": "q", "e3": "z", "r3": "s", "e4": "w"})" "\n"
        R"({"id": 7, "e1": "m", "r1": "p", "e2": "n", "r2": "q", "e3": "o", "context": "m is near n."})" "\n"
        R"({"id": "a", "e1": "u", "r1": "p", "e2": "v", "r2": "q", "e3": "t"})" "\n"
        R"({"id": "b", "e1": "u2", "r1": "p", "e2": "v2", "r2": "q", "e3": "t2", "r3": "s"})" "\n"
        "not json\n"
        R"({"id": "c", "e1": "u3", "r1": "p", "e2": "v3", "r2": "q", "e3": "t3"})" "\n"
        R"({"id": "d", "e1": "u4", "r1": "p", "e2": "v4", "r2": "q", "e3": "t4"})" "\n";
    const auto res = ingest_text(lines, RecordFormat::json_lines);
    REQUIRE(res.records.size() == 4);
    CHECK(res.records[0].is_three_hop());
    CHECK(res.records[1].id == "7");
    CHECK(res.records[1].context == "m is near n.");
    CHECK(res.invalid_rows == 3);
}

TEST_CASE("records survive a write/read cycle in both formats") {
    std::mt19937_64 rng(2);
    auto records = kgt::random_records(rng, 40, 10, 5);
    records[3].context = "some passage";
    records[5].r3 = Relation{"r3"};
    records[5].e4 = Entity{"end"};
    for (const auto fmt : {RecordFormat::tsv, RecordFormat::json_lines}) {
        const auto back = ingest_text(serialize_records(records, fmt), fmt);
        CHECK(back.records == records);
    }
}

TEST_CASE("partition by bridge: worked examples") {
    std::vector<SourceRecord> eight;
    for (int b = 0; b < 8; ++b)
        for (int k = 0; k < 3; ++k) {
            const auto id = std::to_string(b) + "-" + std::to_string(k);
            eight.push_back(rec(id, "s" + id, "r", "B" + std::to_string(b), "q", "o" + id));
        }
    const auto even = partition_by_bridge(eight, SplitSpec{8, 2, 4});
    for (const auto& p : even.partitions) CHECK(p.size() == 3);

    // frequencies 5,4,3,2,1 over two partitions
    std::vector<SourceRecord> skew;
    const std::pair<std::string, int> groups[] = {{"E", 1}, {"B", 4}, {"D", 2}, {"A", 5}, {"C", 3}};
    int n = 0;
    for (const auto& [label, count] : groups)
        for (int k = 0; k < count; ++k, ++n)
            skew.push_back(rec(std::to_string(n), "s" + std::to_string(n), "r", label, "q", "o" + std::to_string(n)));
    const auto two = partition_by_bridge(skew, SplitSpec{2, 0, 1});
    CHECK(two.partition_map.at("A") == 0);
    CHECK(two.partition_map.at("B") == 1);
    CHECK(two.partition_map.at("C") == 0);
    CHECK(two.partition_map.at("D") == 1);
    CHECK(two.partition_map.at("E") == 0);
    CHECK(two.train.size() == 9);
    CHECK(two.test.size() == 6);

    CHECK_THROWS_AS(partition_by_bridge({}, SplitSpec{}), std::invalid_argument);
    CHECK_THROWS_AS(partition_by_bridge(skew, SplitSpec{1, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(partition_by_bridge(skew, SplitSpec{8, 2, 8}), std::invalid_argument);
}

TEST_CASE("partition properties on random inputs") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto records = kgt::random_records(rng, 1 + rng() % 300, 1 + rng() % 60, 1 + rng() % 10);
        const int parts = 2 + static_cast<int>(rng() % 9);
        const auto res = partition_by_bridge(records, SplitSpec{parts, 0, 1});
        std::map<std::string, std::set<int>> seen_in;
        std::map<std::string, std::size_t> group;
        std::vector<SourceRecord> all;
        for (int k = 0; k < parts; ++k)
            for (const auto& r : res.partitions[static_cast<std::size_t>(k)]) {
                seen_in[r.e2.label].insert(k);
                all.push_back(r);
            }
        for (const auto& r : records) ++group[r.e2.label];
        for (const auto& [b, where] : seen_in) CHECK(where.size() == 1);
        CHECK(ids(all) == ids(records));
        std::size_t lo = SIZE_MAX, hi = 0, biggest = 0;
        for (const auto& p : res.partitions) {
            lo = std::min(lo, p.size());
            hi = std::max(hi, p.size());
        }
        for (const auto& [b, c] : group) biggest = std::max(biggest, c);
        CHECK(hi - lo <= biggest);
    }
}

TEST_CASE("cap per relation pair") {
    std::vector<SourceRecord> rs;
    for (int i = 0; i < 700; ++i) rs.push_back(rec("p" + std::to_string(i), "s" + std::to_string(i), "r1", "b", "r2", "o"));
    for (int i = 0; i < 3; ++i) rs.push_back(rec("q" + std::to_string(i), "t" + std::to_string(i), "x", "b", "y", "o"));
    const auto a = cap_relation_pairs(rs, 500, 42);
    const auto b = cap_relation_pairs(rs, 500, 42);
    CHECK(a == b);
    CHECK(std::count_if(a.begin(), a.end(), [](const auto& r) { return r.r1.label == "r1"; }) == 500);
    CHECK(std::count_if(a.begin(), a.end(), [](const auto& r) { return r.r1.label == "x"; }) == 3);
    CHECK(cap_relation_pairs(rs, 500, 43) != a);
    CHECK_THROWS_AS(cap_relation_pairs(rs, 0, 1), std::invalid_argument);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto in = kgt::random_records(rng, 500, 50, 6);
        const std::size_t cap = 1 + rng() % 120;
        const auto out = cap_relation_pairs(in, cap, rng());
        std::map<std::string, std::size_t> per_pair;
        for (const auto& r : out) ++per_pair[r.r1.label + "|" + r.r2.label];
        for (const auto& [p, c] : per_pair) CHECK(c <= cap);
        const auto in_ids = ids(in);
        for (const auto& id : ids(out)) CHECK(in_ids.contains(id));
    }
}

TEST_CASE("third-hop extension") {
    const std::vector<SourceRecord> two = {rec("1", "a", "r1", "b", "r2", "c"), rec("2", "d", "r1", "e", "r2", "f"),
                                           rec("3", "g", "r1", "h", "r2", "i")};
    const std::vector<Triplet> facts = {Triplet("c", "z", "c9"), Triplet("c", "m", "c2"), Triplet("c", "m", "c1"),
                                        Triplet("i", "n", "i1")};
    const auto out = extend_to_three_hops(two, facts, {"c", "f"});
    REQUIRE(out.size() == 1);
    CHECK(out[0].id == "1");
    CHECK(out[0].r3 == Relation{"m"});
    CHECK(out[0].e4 == Entity{"c1"});
    CHECK(extend_to_three_hops(two, facts, {"c", "f", "i"}).size() == 2);
    CHECK(extend_to_three_hops(two, facts, {}).empty());
}

TEST_CASE("overlap statistics") {
    const auto f = kgt::table1_fixture();
    const auto s = compute_overlap_stats(f.train, f.test);
    CHECK(s.train_size == 10262);
    CHECK(s.test_size == 10255);
    CHECK(s.row_overlap == 0);
    CHECK(s.bridge_entities_train == 324);
    CHECK(s.bridge_entities_test == 880);
    CHECK(s.bridge_overlap == 0);
    CHECK(s.relation_pairs_train == 191);
    CHECK(s.relation_pairs_test == 207);
    CHECK(s.relation_pair_overlap == 167);
    CHECK(s.rows_covered_by_shared_pairs == 10130);
    const auto table = format_stats_table(s);
    CHECK(table.find("Relations (r1, r2)") != std::string::npos);
    CHECK(table.find("10,130") != std::string::npos);

    const auto self = compute_overlap_stats(f.train, f.train);
    CHECK(self.bridge_overlap == self.bridge_entities_train);
    CHECK(self.relation_pair_overlap == self.relation_pairs_train);
    CHECK(self.row_overlap == f.train.size());

    const auto empty = compute_overlap_stats(f.train, {});
    CHECK(empty.test_size == 0);
    CHECK(empty.bridge_entities_test == 0);
    CHECK(empty.relation_pair_overlap == 0);

    const std::vector<SourceRecord> x = {rec("1", "a", "p", "b", "q", "c")};
    const std::vector<SourceRecord> y = {rec("2", "d", "s", "e", "t", "f")};
    const auto disjoint = compute_overlap_stats(x, y);
    CHECK(disjoint.bridge_overlap == 0);
    CHECK(disjoint.relation_pair_overlap == 0);
    CHECK(disjoint.rows_covered_by_shared_pairs == 0);
}

TEST_CASE("three-hop statistics rows") {
    const std::vector<SourceRecord> train = {rec("1", "a", "p", "b", "q", "c"), rec("2", "d", "q", "e", "s", "f")};
    auto t = rec("3", "g", "p", "h", "q", "b");
    t.r3 = Relation{"s"};
    t.e4 = Entity{"k"};
    const auto s = compute_overlap_stats(train, {t});
    REQUIRE(s.three_hop);
    CHECK(s.three_hop->test_e3 == 1);
    CHECK(s.three_hop->train_e2_test_e3_overlap == 1);
    CHECK(s.three_hop->test_r2r3_pairs == 1);
    CHECK(s.three_hop->r2r3_in_train_r1r2 == 1);
    const auto table = format_stats_table(s);
    CHECK(table.find("Train e2 vs Test e3") != std::string::npos);
    CHECK(table.find("Relations (r2, r3)") != std::string::npos);
}

TEST_CASE("fine-tuning corpus") {
    const std::vector<SourceRecord> one = {rec("1", "It Goes Like It Goes", "composer", "David Shire", "spouse", "Didi Conn")};
    const auto nl = build_finetune_corpus(one, RepresentationTag::natural_language, DatasetStyle::statement);
    REQUIRE(nl.size() == 2);
    CHECK(nl[0].hops == 1);
    CHECK(nl[1].hops == 2);
    CHECK(nl[0].prompt.find("composer of It Goes Like It Goes is _") != std::string::npos);
    CHECK(nl[0].response.find("\"Answer\": \"David Shire\"") != std::string::npos);

    const auto py = build_finetune_corpus(one, RepresentationTag::python_dynamic, DatasetStyle::question);
    const auto env = find_envelope(py[1].response);
    REQUIRE(env);
    CHECK(env->body.find("class KnowledgeBase:") != std::string::npos);
    CHECK(env->body.find("e1 = 'It Goes Like It Goes'") != std::string::npos);
    CHECK(env->body.find("result3 = kb.infer(e1, r1, r2)") != std::string::npos);

    const auto f = kgt::table1_fixture();
    const auto corpus = build_finetune_corpus(f.train, RepresentationTag::json, DatasetStyle::statement);
    CHECK(corpus.size() == 2 * 10262);

    std::mt19937_64 rng(4);
    const auto sample = kgt::random_records(rng, 300, 40, 8);
    for (const auto rep : kAllRepresentations) {
        const auto par = build_finetune_corpus(sample, rep, DatasetStyle::statement);
        const auto ser = build_finetune_corpus_serial(sample, rep, DatasetStyle::statement);
        REQUIRE(par.size() == ser.size());
        for (std::size_t i = 0; i < par.size(); ++i) {
            CHECK(par[i].prompt == ser[i].prompt);
            CHECK(par[i].response == ser[i].response);
            CHECK(response_round_trips(par[i]));
        }
    }

    auto three = one;
    three[0].r3 = Relation{"x"};
    three[0].e4 = Entity{"y"};
    try {
        build_finetune_corpus(three, RepresentationTag::json, DatasetStyle::statement);
        FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
        CHECK(e.record_id() == "1");
    }
}
