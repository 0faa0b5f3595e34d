#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modchain/problem.hpp"

namespace modchain {

enum class Verdict { Correct, WrongValue, UnknownParam, Malformed };

std::string to_string(Verdict v);

struct ClauseVerdict {
  int clause_index = 0;
  std::string param;  // empty when the clause names nothing resolvable
  std::optional<int> claimed;
  std::optional<int> oracle;
  Verdict verdict = Verdict::Malformed;
};

struct TraceReport {
  int reward = 0;
  std::optional<int> extracted_answer;
  std::vector<ClauseVerdict> clause_verdicts;
  std::optional<int> first_error;     // minimal index with a non-correct verdict
  std::map<int, int> granularity_profile;  // gap between correct anchors -> count
};

// Integer N from the last "Answer: N" occurrence. Out-of-range N (negative or
// >= 23) cannot be a well-formed answer and yields nullopt rather than being
// reduced.
std::optional<int> extract_answer(std::string_view completion);

// Outcome reward: 1 iff the extracted answer equals the oracle answer. Total
// on arbitrary input.
int score(const ProblemInstance& p, std::string_view completion);
int score_against_key(Residue answer_key, std::string_view completion);

// Step-level diagnostics; never throws on malformed completions. The grammar
// accepted here is documented in doc/trace_grammar.md.
TraceReport verify_trace(const ProblemInstance& p, std::string_view completion);

std::map<int, long long> profile_histogram(std::span<const TraceReport> reports);

// Standard-precedence mod-23 evaluation of clause expressions such as
// "(JK * 3 + 1) * 2" or "12(QO * 4) - 11" (number-label juxtaposition is a
// product). Unknown variables or syntax errors yield nullopt. Also serves as
// an independent check on emitted expressions.
using VarLookup = std::function<std::optional<Residue>(std::string_view)>;
std::optional<Residue> eval_expression(std::string_view expr, const VarLookup& lookup);

}  // namespace modchain
