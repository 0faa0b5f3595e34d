#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "modchain/dataset.hpp"

namespace modchain {

struct CompletionRecord {
  std::string id;
  std::string completion;
};

// JSONL {"id": ..., "completion": ...}; throws DuplicateId on repeated ids.
std::vector<CompletionRecord> load_completions(const std::filesystem::path& path);
void write_completions(std::span<const CompletionRecord> completions,
                       const std::filesystem::path& path);

struct ScoredRow {
  std::string id;
  int op = 0;
  int reward = 0;
  bool missing = false;  // dataset record had no completion; scored 0
};

struct ScoreFileResult {
  std::vector<ScoredRow> rows;          // one per dataset record, dataset order
  std::vector<std::string> unknown_ids; // completion ids absent from the dataset
  long long missing = 0;
};

// Outcome scoring of a completion file against a dataset. Missing completions
// score 0 and are flagged; unknown ids are collected, not fatal.
ScoreFileResult score_file(const Dataset& dataset,
                           std::span<const CompletionRecord> completions);

enum class Grouping { PerOp, OpMod2, OpMod4, Overall };

std::string to_string(Grouping g);
Grouping grouping_from_string(const std::string& s);

struct EvalRow {
  std::string label;
  long long n = 0;
  long long correct = 0;
  double pass_at_1 = 0.0;  // correct / n (0 when n = 0)
};

struct EvalTable {
  Grouping grouping = Grouping::PerOp;
  std::vector<EvalRow> rows;
  double chance_level = 1.0 / kModulus;
};

// per_op: one row per op value, ascending. op_mod_2 / op_mod_4: one row per
// residue class, including empty ones. overall: a single pooled row.
EvalTable aggregate(std::span<const ScoredRow> scored, Grouping grouping);

// "group,n,pass1" CSV with a header line.
std::string to_csv(const EvalTable& table);

// Uniform "Answer: N." guesses, one per dataset record; the chance-level
// baseline.
std::vector<CompletionRecord> random_baseline(const Dataset& dataset, std::uint64_t seed);

// Ground-truth traces echoed back as completions; scores 1.0 everywhere.
std::vector<CompletionRecord> oracle_baseline(const Dataset& dataset);

}  // namespace modchain
