#pragma once

#include <string>
#include <vector>

#include "modchain/problem.hpp"
#include "modchain/trace.hpp"

namespace modchain {

// Frozen end-to-end vectors: a hand-encoded 8-op reference problem with the
// expected rendering of every trace variant, plus a 25-op problem with four
// captured model completions that exercise the verifier's tolerance for
// label reuse and mixed step sizes.

const ProblemInstance& reference_problem();
const std::string& reference_question();

// Labels used by the reference traces: forward-family (explicit, composed,
// implicit) and the symbolic family (backward, hierarchical).
const LabelMap& reference_forward_labels();
const LabelMap& reference_symbolic_labels();

struct ReferenceTrace {
  std::string name;      // "explicit", "composed_g2", ...
  CotSpec spec;
  std::string expected;  // exact serialized trace
};
const std::vector<ReferenceTrace>& reference_traces();

const ProblemInstance& long_reference_problem();  // 25 ops, answer 12
// Captured completions for the long problem; all have reward 1. The
// *_implicit ones anchor every even position plus a final single step.
struct ReferenceCompletion {
  std::string name;
  std::string text;
  bool regular_anchors;  // g=2 body with one trailing g=1 step
};
const std::vector<ReferenceCompletion>& long_reference_completions();

struct CheckResult {
  std::string name;
  bool ok = false;
  std::string message;  // failure detail, empty when ok
};

// Golden vectors plus a small randomized round-trip sweep (property_n
// instances). All green on a healthy build.
std::vector<CheckResult> run_selfcheck(int property_n);

}  // namespace modchain
