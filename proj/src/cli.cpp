#include "kgreason/cli.hpp"

#include "kgreason/dataset.hpp"
#include "kgreason/evaluator.hpp"
#include "kgreason/gateway.hpp"
#include "kgreason/prompt.hpp"
#include "kgreason/representation.hpp"
#include "kgreason/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace kgr::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string input;
    std::string output;
    std::string train;
    std::string test;
    std::string facts;
    std::string whitelist;
    std::string config_file;
    std::string kind = "prompts";
    std::vector<std::string> reps;
    std::string style = "statement";
    std::string mode = "zero";
    std::uint64_t seed = 0;
    bool seed_given = false;
    SplitSpec split;
    std::size_t cap = 500;
    bool articled = false;
    bool json = false;

    std::string endpoint;
    std::string model;
    double temperature = 0.0;
    int max_tokens = 512;
    int concurrency = 4;
    int retries = 3;
    bool oracle = false;
    double fault_rate = 0.0;
    bool force = false;
    bool resume = false;
    std::size_t limit = 0;  // stop after this many new completions; 0 = all
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

void refuse_overwrite(const fs::path& p, bool force) {
    if (!force && fs::exists(p)) throw UsageError(p.string() + " exists; pass --force to overwrite");
}

std::vector<SourceRecord> load_records(const fs::path& p, std::ostream& err) {
    auto res = ingest(p, format_for_path(p));
    for (const auto& r : res.rejects)
        err << p.string() << ":" << r.line << ": skipped: " << r.reason << "\n";
    return std::move(res.records);
}

RepresentationTag rep_from(const std::string& name) {
    const auto t = parse_representation(name);
    if (!t) throw UsageError("unknown representation '" + name + "'");
    return *t;
}

std::vector<RepresentationTag> reps_from(const Options& o) {
    std::vector<RepresentationTag> out;
    for (const auto& r : o.reps) out.push_back(rep_from(r));
    return out;
}

DatasetStyle style_from(const std::string& name) {
    const auto s = parse_style(name);
    if (!s) throw UsageError("unknown style '" + name + "'");
    return *s;
}

PromptMode mode_from(const std::string& name) {
    const auto m = parse_mode(name);
    if (!m) throw UsageError("unknown mode '" + name + "'");
    return *m;
}

std::string ext_of(const fs::path& p) { return p.extension() == ".tsv" ? ".tsv" : ".jsonl"; }

nlohmann::ordered_json hops_json(const ReasoningInstance& chain) {
    auto hops = nlohmann::ordered_json::array();
    for (const auto& h : chain.hops) hops.push_back({h.head.label, h.relation.label, h.tail.label});
    return hops;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace); }

int cmd_partition(const Options& o, std::ostream& out, std::ostream& err) {
    o.split.validate();
    const fs::path input = o.input;
    const fs::path dir = o.output;
    const auto ext = ext_of(input);
    const auto fmt = format_for_path(input);
    refuse_overwrite(dir / ("train" + ext), o.force);
    refuse_overwrite(dir / ("test" + ext), o.force);
    refuse_overwrite(dir / "partition_map.json", o.force);

    const auto records = load_records(input, err);
    const auto result = partition_by_bridge(records, o.split);
    fs::create_directories(dir);
    for (std::size_t k = 0; k < result.partitions.size(); ++k) {
        write_records(dir / ("partition_" + std::to_string(k) + ext), result.partitions[k], fmt);
        out << "partition " << k << ": " << result.partitions[k].size() << " records\n";
    }
    write_records(dir / ("train" + ext), result.train, fmt);
    write_records(dir / ("test" + ext), result.test, fmt);
    nlohmann::ordered_json map = nlohmann::ordered_json::object();
    for (const auto& [bridge, k] : result.partition_map) map[bridge] = k;
    write_file(dir / "partition_map.json", map.dump(2) + "\n");
    out << "train (partition " << o.split.train_partition_index << "): " << result.train.size() << " records\n";
    out << "test (partition " << o.split.test_partition_index << "): " << result.test.size() << " records\n";
    return 0;
}

int cmd_stats(const Options& o, std::ostream& out, std::ostream& err) {
    const auto train = load_records(o.train, err);
    const auto test = load_records(o.test, err);
    const auto stats = compute_overlap_stats(train, test);
    const auto text = o.json ? stats_to_json(stats) + "\n" : format_stats_table(stats);
    if (!o.output.empty()) {
        refuse_overwrite(o.output, o.force);
        write_file(o.output, text);
    }
    out << text;
    return 0;
}

std::vector<Triplet> load_facts(const fs::path& p) {
    std::vector<Triplet> facts;
    const auto content = read_file(p);
    std::size_t line_no = 0;
    for (const auto& line : text::split(content, '\n')) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t.front() == '[' || t.front() == '{') {
            const auto j = nlohmann::json::parse(t, nullptr, false);
            if (j.is_array() && j.size() == 3) {
                facts.emplace_back(j[0].get<std::string>(), j[1].get<std::string>(), j[2].get<std::string>());
                continue;
            }
            if (j.is_object() && j.contains("head") && j.contains("relation") && j.contains("tail")) {
                facts.emplace_back(j["head"].get<std::string>(), j["relation"].get<std::string>(),
                                   j["tail"].get<std::string>());
                continue;
            }
            throw std::runtime_error(p.string() + ":" + std::to_string(line_no) + ": malformed fact");
        }
        const auto cells = text::split(t, '\t');
        if (cells.size() != 3) throw std::runtime_error(p.string() + ":" + std::to_string(line_no) + ": expected head<TAB>relation<TAB>tail");
        facts.emplace_back(std::string(text::trim(cells[0])), std::string(text::trim(cells[1])),
                           std::string(text::trim(cells[2])));
    }
    return facts;
}

int cmd_extend3(const Options& o, std::ostream& out, std::ostream& err) {
    refuse_overwrite(o.output, o.force);
    const auto records = load_records(o.input, err);
    const auto facts = load_facts(o.facts);
    std::set<std::string> whitelist;
    for (const auto& line : text::split(read_file(o.whitelist), '\n')) {
        const auto t = text::trim(line);
        if (!t.empty()) whitelist.emplace(t);
    }
    const auto extended = extend_to_three_hops(records, facts, whitelist);
    write_records(o.output, extended, format_for_path(o.output));
    out << "extended " << extended.size() << " of " << records.size() << " records\n";
    return 0;
}

int cmd_cap(const Options& o, std::ostream& out, std::ostream& err) {
    if (!o.seed_given) throw UsageError("cap samples records; --seed is required");
    refuse_overwrite(o.output, o.force);
    const auto records = load_records(o.input, err);
    const auto kept = cap_relation_pairs(records, o.cap, o.seed);
    write_records(o.output, kept, format_for_path(o.output));
    out << "kept " << kept.size() << " of " << records.size() << " records\n";
    return 0;
}

std::uint64_t mix_seed(std::uint64_t seed, std::size_t index) {
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// One prompt per record for the given settings; one-shot demonstrations come
// from the other records of the same file.
std::vector<nlohmann::ordered_json> make_prompts(const std::vector<SourceRecord>& records, RepresentationTag rep,
                                                 DatasetStyle style, PromptMode mode, bool articled,
                                                 std::uint64_t seed, std::ostream& err) {
    std::vector<ReasoningInstance> pool;
    pool.reserve(records.size());
    for (const auto& r : records) pool.push_back(r.to_instance());
    std::vector<nlohmann::ordered_json> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& chain = pool[i];
        PromptRequest req;
        req.mode = mode;
        req.style = style;
        req.representation = rep;
        req.query.articled = articled;
        if (mode == PromptMode::one_shot) {
            const auto pick = pick_demonstration(pool, chain, mix_seed(seed, i));
            if (pick.fallback) err << "warning: " << records[i].id << ": " << pick.warning << "\n";
            req.demonstration = *pick.instance;
        } else if (mode == PromptMode::with_context) {
            req.context = records[i].context ? *records[i].context : render_hop_sentences(chain);
        }
        PromptBundle bundle;
        try {
            bundle = build_prompt(chain, req);
        } catch (const std::exception& e) {
            throw CorpusError(records[i].id, "record " + records[i].id + ": " + e.what());
        }
        nlohmann::ordered_json j;
        j["instance_id"] = records[i].id;
        j["representation"] = std::string(to_string(rep));
        j["mode"] = std::string(to_string(mode));
        j["style"] = std::string(to_string(style));
        j["hops"] = hops_json(chain);
        j["prompt"] = bundle.full_prompt;
        out.push_back(std::move(j));
    }
    return out;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto reps = reps_from(o);
    if (reps.empty()) throw UsageError("--rep is required");
    const auto style = style_from(o.style);
    const auto mode = mode_from(o.mode);
    if (o.kind != "prompts" && o.kind != "corpus") throw UsageError("--kind must be prompts or corpus");
    if (o.kind == "prompts" && mode == PromptMode::one_shot && !o.seed_given)
        throw UsageError("one-shot prompts sample demonstrations; --seed is required");
    const fs::path dir = o.output;
    const auto name_for = [&](RepresentationTag rep) {
        return o.kind + "_" + std::string(to_string(rep)) + "_" + std::string(to_string(style)) +
               (o.kind == "prompts" ? "_" + std::string(to_string(mode)) : std::string{}) + ".jsonl";
    };
    for (const auto rep : reps) refuse_overwrite(dir / name_for(rep), o.force);

    const auto records = load_records(o.input, err);
    fs::create_directories(dir);
    for (const auto rep : reps) {
        std::string content;
        if (o.kind == "corpus") {
            for (const auto& r : build_finetune_corpus(records, rep, style)) content += finetune_record_to_json(r) + "\n";
        } else {
            for (const auto& j : make_prompts(records, rep, style, mode, o.articled, o.seed, err)) content += dump(j) + "\n";
        }
        const auto path = dir / name_for(rep);
        write_file(path, content);
        out << "wrote " << path.string() << "\n";
    }
    return 0;
}

struct EvalItem {
    std::string instance_id;
    ReasoningInstance gold;
    std::string prompt;
    RepresentationTag rep;
};

std::vector<EvalItem> load_eval_items(const Options& o, std::ostream& err) {
    const fs::path input = o.input;
    const auto content = read_file(input);
    const std::string first_line(text::trim(std::string_view(content).substr(0, content.find('\n'))));
    const auto first = nlohmann::json::parse(first_line, nullptr, false);
    std::vector<EvalItem> items;
    if (first.is_object() && first.contains("prompt")) {
        std::size_t line_no = 0;
        for (const auto& line : text::split(content, '\n')) {
            ++line_no;
            if (text::trim(line).empty()) continue;
            const auto j = nlohmann::json::parse(line, nullptr, false);
            try {
                if (j.is_discarded()) throw std::runtime_error("not JSON");
                EvalItem it;
                it.instance_id = j.at("instance_id").get<std::string>();
                for (const auto& h : j.at("hops"))
                    it.gold.hops.emplace_back(h.at(0).get<std::string>(), h.at(1).get<std::string>(),
                                              h.at(2).get<std::string>());
                it.gold.source_id = it.instance_id;
                it.prompt = j.at("prompt").get<std::string>();
                it.rep = o.reps.empty() ? rep_from(j.value("representation", std::string("nl"))) : rep_from(o.reps.front());
                items.push_back(std::move(it));
            } catch (const std::exception& e) {
                throw std::runtime_error(input.string() + ":" + std::to_string(line_no) + ": bad prompt line: " + e.what());
            }
        }
        return items;
    }
    const auto records = load_records(input, err);
    const auto rep = o.reps.empty() ? RepresentationTag::natural_language : rep_from(o.reps.front());
    const auto mode = mode_from(o.mode);
    if (mode == PromptMode::one_shot && !o.seed_given)
        throw UsageError("one-shot prompts sample demonstrations; --seed is required");
    const auto prompts = make_prompts(records, rep, style_from(o.style), mode, o.articled, o.seed, err);
    for (std::size_t i = 0; i < records.size(); ++i)
        items.push_back({records[i].id, records[i].to_instance(), prompts[i]["prompt"].get<std::string>(), rep});
    return items;
}

// Reads the existing record log. A trailing partial line (interrupted write)
// is cut off.
std::vector<EvalRecord> load_record_log(const fs::path& p) {
    std::vector<EvalRecord> out;
    if (!fs::exists(p)) return out;
    const auto content = read_file(p);
    std::size_t good_end = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        if (nl == std::string::npos) break;
        const auto line = std::string_view(content).substr(pos, nl - pos);
        if (!text::trim(line).empty()) {
            auto r = eval_record_from_json(line);
            if (!r) break;
            out.push_back(std::move(*r));
        }
        pos = nl + 1;
        good_end = pos;
    }
    if (good_end < content.size()) fs::resize_file(p, good_end);
    return out;
}

std::string report_text(const std::vector<EvalRecord>& records, ReportFormat fmt) {
    std::map<std::size_t, std::vector<EvalRecord>> by_hops;
    for (const auto& r : records) by_hops[r.gold.hop_count()].push_back(r);
    std::string text;
    for (const auto& [n, group] : by_hops) {
        const auto report = compute_metrics(group);
        if (fmt == ReportFormat::machine) {
            text += emit_report(report, fmt);
        } else {
            if (by_hops.size() > 1) text += std::to_string(n) + "-hop records\n";
            text += emit_report(report, fmt);
            if (!text.ends_with('\n')) text += '\n';
        }
    }
    return text;
}

std::unique_ptr<CompletionBackend> make_backend(const Options& o, const std::vector<EvalItem>& items,
                                                std::optional<RepresentationTag> rep_override) {
    if (o.oracle || o.fault_rate > 0.0) {
        KnowledgeGraph kg;
        if (!o.facts.empty())
            for (const auto& f : load_facts(o.facts)) kg.add_fact(f);
        for (const auto& it : items)
            for (const auto& h : it.gold.hops) kg.add_fact(h);
        if (o.fault_rate > 0.0) {
            if (!o.seed_given) throw UsageError("--oracle-fault-rate needs --seed");
            return std::make_unique<FaultInjectingOracle>(std::move(kg), o.fault_rate, o.seed, rep_override);
        }
        return std::make_unique<OracleBackend>(std::move(kg), rep_override);
    }
    auto cfg = endpoint_config_from_env(o.endpoint);
    if (o.model.empty()) throw ConfigError("no model configured");
    cfg.retry.max_retries = o.retries;
    return std::make_unique<OpenAIChatBackend>(std::move(cfg));
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
    if (!o.oracle && o.fault_rate <= 0.0 && o.endpoint.empty())
        throw UsageError("select a backend: --oracle or --endpoint");
    const fs::path dir = o.output;
    const auto log_path = dir / "records.jsonl";
    if (o.resume && o.force) throw UsageError("--resume and --force are mutually exclusive");
    if (!o.resume) refuse_overwrite(log_path, o.force);

    err << "config: backend=" << (o.oracle || o.fault_rate > 0.0 ? "oracle" : "endpoint")
        << " endpoint=" << (o.endpoint.empty() ? "-" : o.endpoint) << " model=" << (o.model.empty() ? "-" : o.model)
        << " temperature=" << o.temperature << " max_tokens=" << o.max_tokens << " concurrency=" << o.concurrency
        << " retries=" << o.retries << " seed=" << o.seed;
    if (o.fault_rate > 0.0) err << " fault_rate=" << o.fault_rate;
    err << "\n";

    const auto items = load_eval_items(o, err);
    const std::optional<RepresentationTag> rep_override =
        o.reps.empty() ? std::nullopt : std::optional(rep_from(o.reps.front()));
    auto backend = make_backend(o, items, rep_override);

    fs::create_directories(dir);
    std::vector<EvalRecord> done;
    if (o.resume) {
        done = load_record_log(log_path);
    } else {
        write_file(log_path, "");
    }
    std::set<std::string> seen;
    for (const auto& r : done) seen.insert(r.instance_id);

    std::vector<const EvalItem*> todo;
    std::set<std::string> queued;
    for (const auto& it : items)
        if (!seen.contains(it.instance_id) && queued.insert(it.instance_id).second) todo.push_back(&it);
    if (o.limit > 0 && todo.size() > o.limit) todo.resize(o.limit);
    if (o.resume) err << "resume: " << seen.size() << " done, " << todo.size() << " to run\n";

    DecodeConfig decode{o.temperature, o.max_tokens, o.model};
    std::ofstream log(log_path, std::ios::binary | std::ios::app);
    if (!log) throw std::runtime_error("cannot append to " + log_path.string());
    const std::size_t chunk = static_cast<std::size_t>(std::max(64, o.concurrency * 8));
    for (std::size_t begin = 0; begin < todo.size(); begin += chunk) {
        const auto end = std::min(todo.size(), begin + chunk);
        std::vector<std::string> prompts;
        for (auto i = begin; i < end; ++i) prompts.push_back(todo[i]->prompt);
        auto results = complete_batch(*backend, prompts, decode, o.concurrency);
        // one judging pass per representation present in the chunk
        std::map<RepresentationTag, std::vector<std::size_t>> by_rep;
        for (auto i = begin; i < end; ++i) by_rep[todo[i]->rep].push_back(i - begin);
        std::vector<EvalRecord> judged(end - begin);
        for (const auto& [rep, idx] : by_rep) {
            std::vector<JudgeInput> inputs;
            for (const auto k : idx) inputs.push_back({todo[begin + k]->instance_id, todo[begin + k]->gold, results[k]});
            auto recs = judge_all(inputs, rep);
            for (std::size_t m = 0; m < idx.size(); ++m) judged[idx[m]] = std::move(recs[m]);
        }
        for (auto& r : judged) {
            log << eval_record_to_json(r) << "\n";
            done.push_back(std::move(r));
        }
        log.flush();
    }
    log.close();

    const auto table = report_text(done, ReportFormat::text_table);
    write_file(dir / "report.txt", table);
    write_file(dir / "report.json", report_text(done, ReportFormat::machine));
    out << table;
    return 0;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
    const fs::path input = o.input;
    const auto content = read_file(input);
    std::vector<EvalRecord> records;
    std::size_t line_no = 0;
    for (const auto& line : text::split(content, '\n')) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto r = eval_record_from_json(line);
        if (!r) throw std::runtime_error(input.string() + ":" + std::to_string(line_no) + ": not an evaluation record");
        records.push_back(std::move(*r));
    }
    out << report_text(records, o.json ? ReportFormat::machine : ReportFormat::text_table);
    return 0;
}

// Lowest precedence first: environment, then the config file. Flags parsed
// by CLI11 afterwards override both.
void apply_environment(Options& o) {
    if (const char* e = std::getenv("KGREASON_ENDPOINT"); e && *e) o.endpoint = e;
    if (const char* m = std::getenv("KGREASON_MODEL"); m && *m) o.model = m;
}

void apply_config_file(Options& o, const std::string& path) {
    const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError(path + ": expected a JSON object");
    static const std::set<std::string> known = {"endpoint", "model", "temperature", "max_tokens", "concurrency",
                                                "retries"};
    for (const auto& [k, v] : j.items())
        if (!known.contains(k)) throw ConfigError(path + ": unknown key '" + k + "'");
    try {
        o.endpoint = j.value("endpoint", o.endpoint);
        o.model = j.value("model", o.model);
        o.temperature = j.value("temperature", o.temperature);
        o.max_tokens = j.value("max_tokens", o.max_tokens);
        o.concurrency = j.value("concurrency", o.concurrency);
        o.retries = j.value("retries", o.retries);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string find_config_flag(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].starts_with("--config=")) return args[i].substr(9);
    }
    return {};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    try {
        apply_environment(o);
        if (const auto cfg = find_config_flag(args); !cfg.empty()) apply_config_file(o, cfg);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"kgreason: multi-hop knowledge-graph reasoning datasets, prompts and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.name("kgreason");
    app.add_option("--config", o.config_file, "JSON file with endpoint, model, temperature, max_tokens, concurrency, retries");

    auto* partition = app.add_subcommand("partition", "split records into bridge-disjoint partitions");
    partition->add_option("--input", o.input)->required();
    partition->add_option("--output", o.output, "output directory")->required();
    partition->add_option("--partitions", o.split.num_partitions)->capture_default_str();
    partition->add_option("--train-idx", o.split.train_partition_index)->capture_default_str();
    partition->add_option("--test-idx", o.split.test_partition_index)->capture_default_str();
    partition->add_flag("--force", o.force);

    auto* stats = app.add_subcommand("stats", "overlap statistics between a train and a test file");
    stats->add_option("--train", o.train)->required();
    stats->add_option("--test", o.test)->required();
    stats->add_option("--output", o.output);
    stats->add_flag("--json", o.json);
    stats->add_flag("--force", o.force);

    auto* extend3 = app.add_subcommand("extend3", "append a third hop from a fact file");
    extend3->add_option("--input", o.input)->required();
    extend3->add_option("--facts", o.facts, "TSV head/relation/tail or JSON lines")->required();
    extend3->add_option("--whitelist", o.whitelist, "allowed e3 labels, one per line")->required();
    extend3->add_option("--output", o.output)->required();
    extend3->add_flag("--force", o.force);

    auto* cap = app.add_subcommand("cap", "limit records per (r1, r2) pair");
    cap->add_option("--input", o.input)->required();
    cap->add_option("--output", o.output)->required();
    cap->add_option("--cap", o.cap)->capture_default_str();
    cap->add_option("--seed", o.seed);
    cap->add_flag("--force", o.force);

    const auto rep_names = std::vector<std::string>{"nl", "json", "py-static", "py-dynamic", "natural_language",
                                                    "python_static", "python_dynamic"};
    auto* generate = app.add_subcommand("generate", "write prompt files or fine-tuning corpora");
    generate->add_option("--input", o.input)->required();
    generate->add_option("--output", o.output, "output directory")->required();
    generate->add_option("--kind", o.kind)->check(CLI::IsMember({"prompts", "corpus"}))->capture_default_str();
    generate->add_option("--rep", o.reps, "representation; repeatable")->check(CLI::IsMember(rep_names))->required();
    generate->add_option("--style", o.style)->check(CLI::IsMember({"statement", "question"}))->capture_default_str();
    generate->add_option("--mode", o.mode)->check(CLI::IsMember({"zero", "one", "context"}))->capture_default_str();
    generate->add_option("--seed", o.seed);
    generate->add_flag("--articled", o.articled, "use 'The r2 of the r1 of e1' query wording");
    generate->add_flag("--force", o.force);

    auto* evaluate = app.add_subcommand("evaluate", "run completions, judge them and report");
    evaluate->add_option("--input", o.input, "prompt file from generate, or a record file")->required();
    evaluate->add_option("--output", o.output, "run directory")->required();
    evaluate->add_option("--rep", o.reps)->check(CLI::IsMember(rep_names));
    evaluate->add_option("--style", o.style)->check(CLI::IsMember({"statement", "question"}));
    evaluate->add_option("--mode", o.mode)->check(CLI::IsMember({"zero", "one", "context"}));
    evaluate->add_option("--seed", o.seed);
    evaluate->add_option("--endpoint", o.endpoint);
    evaluate->add_option("--model", o.model);
    evaluate->add_option("--temperature", o.temperature);
    evaluate->add_option("--max-tokens", o.max_tokens);
    evaluate->add_option("--concurrency", o.concurrency)->check(CLI::PositiveNumber);
    evaluate->add_option("--retries", o.retries)->check(CLI::NonNegativeNumber);
    evaluate->add_option("--facts", o.facts, "extra facts for the oracle");
    evaluate->add_flag("--oracle", o.oracle, "answer by graph traversal instead of a model");
    evaluate->add_option("--oracle-fault-rate", o.fault_rate)->check(CLI::Range(0.0, 1.0));
    evaluate->add_option("--limit", o.limit, "stop after this many new completions");
    evaluate->add_flag("--articled", o.articled);
    evaluate->add_flag("--force", o.force);
    evaluate->add_flag("--resume", o.resume);

    auto* report = app.add_subcommand("report", "metrics table from an evaluation record log");
    report->add_option("--input", o.input)->required();
    report->add_flag("--json", o.json, "one machine-readable line per hop count");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    for (const auto* sub : {cap, generate, evaluate})
        if (sub->parsed() && sub->count("--seed") > 0) o.seed_given = true;

    try {
        if (partition->parsed()) return cmd_partition(o, out, err);
        if (stats->parsed()) return cmd_stats(o, out, err);
        if (extend3->parsed()) return cmd_extend3(o, out, err);
        if (cap->parsed()) return cmd_cap(o, out, err);
        if (generate->parsed()) return cmd_generate(o, out, err);
        if (evaluate->parsed()) return cmd_evaluate(o, out, err);
        if (report->parsed()) return cmd_report(o, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const CorpusError& e) {
        err << "error: record " << e.record_id() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace kgr::cli
