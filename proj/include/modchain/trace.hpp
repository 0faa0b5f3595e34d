#pragma once

#include <span>
#include <string>
#include <vector>

#include "modchain/problem.hpp"
#include "modchain/rng.hpp"

namespace modchain {

enum class CotKind { Explicit, Composed, Implicit };
enum class CotOrder { Forward, Backward, Hierarchical };

struct CotSpec {
  CotKind kind = CotKind::Explicit;
  int g = 1;                        // operations folded into one step
  CotOrder order = CotOrder::Forward;
  int chunk = 2;                    // hierarchical chunk size

  // Throws GranularityMismatch / NotPowerOfTwo / InvalidSpec when this spec
  // cannot emit a trace for a chain of the given length. Backward and
  // hierarchical orders exist only at explicit granularity.
  void validate(int op) const;
};

std::string to_string(CotKind kind);
std::string to_string(CotOrder order);
CotKind cot_kind_from_string(const std::string& s);
CotOrder cot_order_from_string(const std::string& s);

// Two-letter variable label per chain position; index 0 is the start
// parameter. Labels are distinct within one map.
using LabelMap = std::vector<std::string>;

// Uniform draws from the 676 two-letter labels, redrawing collisions.
LabelMap allocate_labels(int op, SplitMix64& rng);

struct Trace {
  std::vector<std::string> clauses;  // full sentences, trailing period included
  std::string answer_line;           // "Answer: N."
  LabelMap labels;

  // Flat serialization: clauses and the answer line joined by single spaces.
  std::string text() const;
};

Trace emit_explicit(const ProblemInstance& p, const LabelMap& labels);
Trace emit_composed(const ProblemInstance& p, int g, const LabelMap& labels);
Trace emit_implicit(const ProblemInstance& p, int g, const LabelMap& labels);
Trace emit_backward(const ProblemInstance& p, const LabelMap& labels);
Trace emit_hierarchical(const ProblemInstance& p, int chunk_size, const LabelMap& labels);

// Dispatcher over CotSpec; draws labels from label_rng.
Trace emit_trace(const ProblemInstance& p, const CotSpec& spec, SplitMix64& label_rng);

// Left-to-right operation string starting from `initial`. Before a "* c" the
// accumulated prefix is parenthesized iff it contains a top-level + or -, so
// reading the output under standard precedence reproduces the sequential
// result.
std::string render_seq_expr(const std::string& initial, std::span<const OpStep> steps);

}  // namespace modchain
