#include "support.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

namespace kgt {

namespace fs = std::filesystem;

std::string fixture_path(std::string_view name) { return std::string(KGR_FIXTURE_DIR) + "/" + std::string(name); }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string read_fixture(std::string_view name) { return read_text(fixture_path(name)); }

void write_text(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string canon(std::string_view text) {
    std::string s(text);
    for (std::size_t p; (p = s.find("{{}}")) != std::string::npos;) s.replace(p, 4, "{}");
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (true) {
        const auto nl = s.find('\n', start);
        auto line = s.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
        lines.push_back(std::move(line));
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    std::size_t indent = std::string::npos;
    for (const auto& l : lines)
        if (!l.empty()) indent = std::min(indent, l.find_first_not_of(' '));
    if (indent == std::string::npos) indent = 0;
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        if (!lines[i].empty()) out += lines[i].substr(indent);
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

namespace {

constexpr std::array<std::string_view, 16> kSyllables = {"ka", "lo", "mi", "ren", "tas", "vo", "zu", "bel",
                                                          "dor", "fen", "gri", "hal", "jo", "nex", "pra", "quo"};
constexpr std::array<std::string_view, 12> kTricky = {"O'Neil", "\"Q\"", "back\\slash", "{braces}", "Zoë",
                                                      "Müller", "São", "it's", "a,b", "x-y", "#hash", "Ångström"};

}  // namespace

std::string random_label(std::mt19937_64& rng, bool tricky) {
    std::uniform_int_distribution<int> words(1, 4), syl(1, 3), pick(0, kSyllables.size() - 1),
        trick(0, kTricky.size() - 1), coin(0, 3);
    std::string out;
    const int w = words(rng);
    for (int i = 0; i < w; ++i) {
        if (i) out += ' ';
        if (tricky && i > 0 && coin(rng) == 0) {
            out += kTricky[trick(rng)];
            continue;
        }
        std::string word;
        const int s = syl(rng);
        for (int j = 0; j < s; ++j) word += kSyllables[pick(rng)];
        word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        out += word;
    }
    std::uniform_int_distribution<int> num(0, 999);
    out += " " + std::to_string(num(rng));
    return out;
}

ReasoningInstance random_chain(std::mt19937_64& rng, std::size_t n, bool tricky) {
    std::vector<Entity> entities;
    while (entities.size() < n + 1) {
        Entity e{random_label(rng, tricky)};
        if (std::find(entities.begin(), entities.end(), e) == entities.end()) entities.push_back(std::move(e));
    }
    ReasoningInstance chain;
    std::uniform_int_distribution<int> rel(0, 5);
    static constexpr std::array<std::string_view, 6> kRelations = {"composer", "spouse", "country of citizenship",
                                                                   "place of birth", "director", "mother"};
    for (std::size_t i = 0; i < n; ++i) {
        std::string r(kRelations[rel(rng)]);
        if (tricky && rel(rng) == 0) r += "'s";
        chain.hops.emplace_back(entities[i], Relation{r}, entities[i + 1]);
    }
    return chain;
}

std::optional<Entity> brute_force_walk(const std::vector<Triplet>& facts, const Entity& start,
                                       const std::vector<Relation>& relations) {
    Entity current = start;
    for (const auto& r : relations) {
        const Triplet* hit = nullptr;
        for (const auto& f : facts)
            if (f.head.label == current.label && f.relation.label == r.label) hit = &f;
        if (hit == nullptr) return std::nullopt;
        current = hit->tail;
    }
    return current;
}

namespace {

SourceRecord make_record(std::string id, std::string e1, std::string r1, std::string e2, std::string r2) {
    SourceRecord r;
    r.id = std::move(id);
    r.e1 = Entity{std::move(e1)};
    r.r1 = Relation{std::move(r1)};
    r.e2 = Entity{std::move(e2)};
    r.r2 = Relation{std::move(r2)};
    r.e3 = Entity{"Object of " + r.e2.label + " via " + r.r2.label};
    return r;
}

}  // namespace

std::vector<SourceRecord> random_records(std::mt19937_64& rng, std::size_t n, std::size_t bridges, std::size_t pairs) {
    std::uniform_int_distribution<std::size_t> b(0, std::max<std::size_t>(bridges, 1) - 1),
        p(0, std::max<std::size_t>(pairs, 1) - 1);
    std::vector<SourceRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = p(rng);
        out.push_back(make_record("r" + std::to_string(i), "Subject " + std::to_string(i), "ra" + std::to_string(k),
                                  "Bridge " + std::to_string(b(rng)), "rb" + std::to_string(k)));
    }
    return out;
}

SplitFixture table1_fixture() {
    SplitFixture f;
    for (std::size_t i = 0; i < 10262; ++i) {
        const auto k = std::to_string(i % 191);
        f.train.push_back(make_record("train-" + std::to_string(i), "Train subject " + std::to_string(i), "ra" + k,
                                      "Train bridge " + std::to_string(i % 324), "rb" + k));
    }
    for (std::size_t i = 0; i < 10255; ++i) {
        const auto k = std::to_string(i < 10130 ? i % 167 : 191 + (i - 10130) % 40);
        f.test.push_back(make_record("test-" + std::to_string(i), "Test subject " + std::to_string(i), "ra" + k,
                                     "Test bridge " + std::to_string(i % 880), "rb" + k));
    }
    return f;
}

std::vector<SourceRecord> dataset1_shaped(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SourceRecord> out;
    // Zipf-like bridge popularity: bridge j appears about 400/(j+1) times.
    std::size_t id = 0;
    for (std::size_t j = 0; j < 1200; ++j) {
        const auto count = std::max<std::size_t>(1, 400 / (j + 1));
        for (std::size_t c = 0; c < count; ++c) {
            const auto k = std::to_string(rng() % 200);
            out.push_back(make_record("d1-" + std::to_string(id), "Subject " + std::to_string(id), "ra" + k,
                                      "Bridge " + std::to_string(j), "rb" + k));
            ++id;
        }
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

bool python_available() {
    static const bool ok = std::system("python3 -c 'pass' > /dev/null 2>&1") == 0;
    return ok;
}

TempDir::TempDir() {
    std::string templ = (fs::temp_directory_path() / "kgreason-test-XXXXXX").string();
    if (mkdtemp(templ.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

namespace {

PyRun capture(const std::string& command) {
    PyRun out;
    FILE* pipe = popen(command.c_str(), "r");
    if (pipe == nullptr) return out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.output.append(buf.data(), n);
    const int st = pclose(pipe);
    out.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return out;
}

}  // namespace

PyRun run_python(const std::string& code) {
    TempDir dir;
    const auto script = dir.file("snippet.py");
    write_text(script, code);
    return capture("python3 '" + script + "' 2>&1");
}

std::vector<std::string> python_syntax_errors(const std::vector<std::string>& sources) {
    TempDir dir;
    nlohmann::json all = sources;
    write_text(dir.file("sources.json"), all.dump());
    write_text(dir.file("check.py"),
               "import ast, json, sys\n"
               "for src in json.load(open(sys.argv[1], encoding='utf-8')):\n"
               "    try:\n"
               "        ast.parse(src)\n"
               "        print(json.dumps(''))\n"
               "    except SyntaxError as e:\n"
               "        print(json.dumps(str(e) or 'syntax error'))\n");
    const auto run = capture("python3 '" + dir.file("check.py") + "' '" + dir.file("sources.json") + "' 2>&1");
    std::vector<std::string> out;
    std::istringstream lines(run.output);
    for (std::string line; std::getline(lines, line);) {
        const auto j = nlohmann::json::parse(line, nullptr, false);
        out.push_back(j.is_string() ? j.get<std::string>() : "checker: " + line);
    }
    if (run.status != 0 || out.size() != sources.size()) {
        out.assign(sources.size(), "syntax checker failed: " + run.output.substr(0, 400));
    }
    return out;
}

}  // namespace kgt
