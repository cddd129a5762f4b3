#pragma once
// Shared fixtures and independent oracles for the test binaries.

#include "kgreason/dataset.hpp"
#include "kgreason/kg_core.hpp"

#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace kgt {

using kgr::Entity;
using kgr::ReasoningInstance;
using kgr::Relation;
using kgr::SourceRecord;
using kgr::Triplet;

std::string fixture_path(std::string_view name);
std::string read_text(const std::string& path);
std::string read_fixture(std::string_view name);

// Whitespace canon for golden comparisons: "{{}}" template escapes undone,
// common indentation removed, trailing blanks on each line and trailing
// newlines dropped.
std::string canon(std::string_view text);

// Entity-like label; `tricky` mixes in quotes, backslashes, braces and
// non-ASCII letters. Labels start with a capitalised word and never contain
// " of ", " is " or ". ".
std::string random_label(std::mt19937_64& rng, bool tricky);

// n-hop chain over pairwise distinct entity labels.
ReasoningInstance random_chain(std::mt19937_64& rng, std::size_t n, bool tricky = true);

// Independent edge walk over a fact list; later facts shadow earlier ones
// with the same (head, relation), like a dictionary assignment.
std::optional<Entity> brute_force_walk(const std::vector<Triplet>& facts, const Entity& start,
                                       const std::vector<Relation>& relations);

// Two-hop records where each (e1, r1) and (e2, r2) key is unique.
std::vector<SourceRecord> random_records(std::mt19937_64& rng, std::size_t n, std::size_t bridges,
                                         std::size_t pairs);

// Train/test sets shaped like the reference two-hop split
// statistics: 10,262 / 10,255 rows, 324 / 880 bridges, 191 / 207 relation
// pairs with 167 shared, 10,130 test rows on shared pairs.
struct SplitFixture {
    std::vector<SourceRecord> train;
    std::vector<SourceRecord> test;
};
SplitFixture table1_fixture();

// Eight-partition source with a skewed bridge-frequency profile.
std::vector<SourceRecord> dataset1_shaped(std::uint64_t seed);

struct PyRun {
    int status = -1;
    std::string output;
};
bool python_available();
// Runs `code` as a script; stdout and stderr are captured together.
PyRun run_python(const std::string& code);
// Syntax check of many sources with one interpreter process; element i is
// empty on success, otherwise the error message.
std::vector<std::string> python_syntax_errors(const std::vector<std::string>& sources);

// Process-unique scratch directory, removed by the destructor.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::string& path() const { return path_; }
    std::string file(std::string_view name) const { return path_ + "/" + std::string(name); }

private:
    std::string path_;
};

void write_text(const std::string& path, std::string_view content);

}  // namespace kgt
