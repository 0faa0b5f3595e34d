#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "modchain/arith.hpp"
#include "modchain/vocab.hpp"

namespace modchain {

struct GenConfig {
  int op = 8;
  // Initial and distractor values; the paper draws both from {1,2,3,4}.
  int init_min = 1, init_max = 4;
  // Operand constants. Multiplication starts at 2 so no step is a no-op.
  int add_min = 1, add_max = 4;
  int mul_min = 2, mul_max = 4;
  // Distractor count is drawn from {1 .. min(op-1, max_distractors, room)},
  // where room is whatever the vocabulary can still name.
  int max_distractors = 1 << 20;
  // When set, build_split never reuses a parameter name across the whole
  // split (caps usable problem count by vocabulary size).
  bool global_unique_names = false;
  const Vocabulary* vocabulary = nullptr;  // null -> builtin_vocabulary()

  const Vocabulary& vocab() const {
    return vocabulary ? *vocabulary : builtin_vocabulary();
  }
};

struct ChainLink {
  std::string name;  // parameter defined by this step
  OpStep step;
};

struct Distractor {
  std::string name;
  Residue value;
};

// A fully materialized chain problem. Statement indices used by
// sentence_order: 0 is the start assignment, 1..op are the chain links in
// order, op+1 .. op+|distractors| are the distractor assignments.
struct ProblemInstance {
  std::uint64_t seed = 0;
  int op = 0;
  Residue initial_value;
  std::string start_param;
  std::vector<ChainLink> chain;
  std::vector<Distractor> distractors;
  std::vector<int> sentence_order;  // output position -> statement index

  const std::string& target_param() const { return chain.back().name; }
  int statement_count() const {
    return op + 1 + static_cast<int>(distractors.size());
  }
  std::vector<OpStep> steps() const;

  // Checks the structural invariants (distinct names, valid permutation,
  // op >= 1); throws InvalidConfig with a description otherwise.
  void validate() const;
};

struct OracleSolution {
  // (param, value) for the start parameter and every chain parameter, in
  // chain order; answer duplicates the last entry.
  std::vector<std::pair<std::string, Residue>> values;
  Residue answer;
};

// Deterministic: identical (config, seed) gives a bit-identical instance.
ProblemInstance generate_problem(const GenConfig& config, std::uint64_t seed);

// Same, but never picks names whose vocabulary index is in `taken`; indices
// used by the new instance are added to it.
ProblemInstance generate_problem(const GenConfig& config, std::uint64_t seed,
                                 std::unordered_set<int>& taken);

std::string render_question(const ProblemInstance& p);

OracleSolution solve(const ProblemInstance& p);

// SHA-256 hex of the rendered question; equal texts give equal digests.
std::string canonical_hash(const ProblemInstance& p);

}  // namespace modchain
