#include <doctest.h>

#include <string>
#include <vector>

#include "modchain/selfcheck.hpp"
#include "modchain/verify.hpp"

using namespace modchain;

namespace {

const std::string& trace_text(const std::string& name) {
  for (const ReferenceTrace& rt : reference_traces()) {
    if (rt.name == name) return rt.expected;
  }
  throw std::logic_error("no such reference trace: " + name);
}

std::string printable_junk(SplitMix64& rng, std::size_t len) {
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    out += static_cast<char>(' ' + rng.bounded(95));
  }
  // Keep the reserved answer marker out of random padding.
  for (std::size_t at; (at = out.find("Answer")) != std::string::npos;) out[at] = 'B';
  return out;
}

}  // namespace

TEST_CASE("extract_answer") {
  CHECK(extract_answer(trace_text("explicit")) == 18);
  CHECK(!extract_answer("no answer here"));
  CHECK(extract_answer("Answer: 3. blah blah. Answer: 12.") == 12);
  CHECK(extract_answer("Answer:7") == 7);
  CHECK(extract_answer("Answer:   0.") == 0);
  CHECK(!extract_answer("Answer: 23."));
  CHECK(!extract_answer("Answer: -1."));
  CHECK(!extract_answer("Answer: 99999999999999999999999."));
  CHECK(!extract_answer("Answer: twelve."));
  // The last pattern occurrence decides, even if an earlier one was in range.
  CHECK(!extract_answer("Answer: 3. Answer: 50."));
}

TEST_CASE("score on reference vectors") {
  const ProblemInstance& p = reference_problem();
  CHECK(score(p, trace_text("explicit")) == 1);
  CHECK(score(p, "Answer: 17.") == 0);
  CHECK(score(p, "") == 0);

  const ProblemInstance& longp = long_reference_problem();
  for (const ReferenceCompletion& rc : long_reference_completions()) {
    CAPTURE(rc.name);
    CHECK(score(longp, rc.text) == 1);
  }
}

TEST_CASE("verify_trace accepts every reference trace") {
  const ProblemInstance& p = reference_problem();
  for (const ReferenceTrace& rt : reference_traces()) {
    CAPTURE(rt.name);
    const TraceReport report = verify_trace(p, rt.expected);
    CHECK(report.reward == 1);
    CHECK(!report.first_error);
    CHECK(report.extracted_answer == 18);
    for (const ClauseVerdict& cv : report.clause_verdicts) {
      CHECK(cv.verdict == Verdict::Correct);
    }
  }
}

TEST_CASE("granularity profiles of reference traces") {
  const ProblemInstance& p = reference_problem();
  {
    const TraceReport r = verify_trace(p, trace_text("composed_g2"));
    CHECK(r.granularity_profile == std::map<int, int>{{2, 4}});
  }
  {
    const TraceReport r = verify_trace(p, trace_text("explicit"));
    CHECK(r.granularity_profile == std::map<int, int>{{1, 8}});
  }
  {
    const TraceReport r = verify_trace(p, trace_text("implicit_g4"));
    CHECK(r.granularity_profile == std::map<int, int>{{4, 2}});
  }
}

TEST_CASE("mixed-step completions profile as a g=2 body plus one single step") {
  const ProblemInstance& p = long_reference_problem();
  for (const ReferenceCompletion& rc : long_reference_completions()) {
    if (!rc.regular_anchors) continue;
    CAPTURE(rc.name);
    const TraceReport report = verify_trace(p, rc.text);
    CHECK(!report.first_error);
    CHECK(report.granularity_profile == std::map<int, int>{{1, 1}, {2, 12}});
  }
}

TEST_CASE("the loose completion still scores but reports its odd clause") {
  const ProblemInstance& p = long_reference_problem();
  for (const ReferenceCompletion& rc : long_reference_completions()) {
    if (rc.regular_anchors) continue;
    const TraceReport report = verify_trace(p, rc.text);
    CHECK(report.reward == 1);  // reward is final-answer only
    CHECK(report.first_error.has_value());
  }
}

TEST_CASE("corrupting one clause value pins first_error; reward is unaffected") {
  const ProblemInstance& p = reference_problem();
  std::string text = trace_text("explicit");
  // "... VK = FP * 4 = 3 * 4 = 12." -> claim 13 instead.
  const std::size_t at = text.find("3 * 4 = 12");
  REQUIRE(at != std::string::npos);
  text.replace(at, 10, "3 * 4 = 13");
  const TraceReport report = verify_trace(p, text);
  CHECK(report.reward == 1);
  REQUIRE(report.first_error.has_value());
  CHECK(*report.first_error == 2);
  CHECK(report.clause_verdicts[2].verdict == Verdict::WrongValue);
  CHECK(report.clause_verdicts[2].param == "cats");
  CHECK(report.clause_verdicts[2].claimed == 13);
  CHECK(report.clause_verdicts[2].oracle == 12);
}

TEST_CASE("mutating any answer digit flips the reward") {
  const ProblemInstance& p = reference_problem();
  const std::string& text = trace_text("composed_g2");
  const std::size_t at = text.rfind("Answer: 18.");
  REQUIRE(at != std::string::npos);
  for (char digit : {'0', '1', '3', '7'}) {
    for (int which : {0, 1}) {
      std::string mutated = text;
      mutated[at + 8 + static_cast<std::size_t>(which)] = digit;
      if (mutated == text) continue;
      CHECK(score(p, mutated) == 0);
    }
  }
}

TEST_CASE("score ignores arbitrary prefix and suffix text") {
  const ProblemInstance& p = reference_problem();
  SplitMix64 rng(0xf00d);
  for (int iter = 0; iter < 200; ++iter) {
    const std::string padded = printable_junk(rng, rng.bounded(120)) + " " +
                               trace_text("implicit_g2") + " " +
                               printable_junk(rng, rng.bounded(120));
    CHECK(score(p, padded) == 1);
  }
}

TEST_CASE("verifier survives arbitrary bytes") {
  const ProblemInstance& p = reference_problem();
  SplitMix64 rng(0xdead);
  for (int iter = 0; iter < 3000; ++iter) {
    std::string junk;
    const std::size_t len = rng.bounded(200);
    for (std::size_t i = 0; i < len; ++i) {
      junk += static_cast<char>(rng.bounded(256));
    }
    CHECK_NOTHROW(verify_trace(p, junk));
    CHECK_NOTHROW(score(p, junk));
  }
  // Mutated real traces, same guarantee.
  for (int iter = 0; iter < 2000; ++iter) {
    std::string text = trace_text("backward");
    const std::size_t at = rng.bounded(text.size());
    text[at] = static_cast<char>(rng.bounded(256));
    CHECK_NOTHROW(verify_trace(p, text));
  }
}

TEST_CASE("clauses naming non-chain parameters are flagged, not fatal") {
  const ProblemInstance& p = reference_problem();
  // hats is a distractor; QQ resolves to it but it is not a chain anchor.
  const std::string text =
      "Define hats as QQ; so QQ = 4. Define whelks as JK; so JK = 1. Answer: 18.";
  const TraceReport report = verify_trace(p, text);
  REQUIRE(report.clause_verdicts.size() == 2);
  CHECK(report.clause_verdicts[0].verdict == Verdict::UnknownParam);
  CHECK(report.clause_verdicts[1].verdict == Verdict::Correct);
  CHECK(report.reward == 1);
}

TEST_CASE("malformed clauses get their own verdict") {
  const ProblemInstance& p = reference_problem();
  const TraceReport report =
      verify_trace(p, "Define whelks as JK. Define celery as FP; so FP = JK * 3 = 3. Answer: 18.");
  REQUIRE(report.clause_verdicts.size() == 2);
  CHECK(report.clause_verdicts[0].verdict == Verdict::Malformed);
  CHECK(report.clause_verdicts[1].verdict == Verdict::Correct);
}

TEST_CASE("symbolic clauses are checked by substitution") {
  const ProblemInstance& p = reference_problem();
  // Correct symbolic line from the backward trace, then a corrupted offset.
  std::string good = trace_text("backward");
  const TraceReport ok = verify_trace(p, good);
  CHECK(!ok.first_error);

  const std::size_t at = good.find("SU = PY - 5 = (TD * 3) - 5");
  REQUIRE(at != std::string::npos);
  std::string bad = good;
  bad.replace(at, 11, "SU = PY - 6");
  const TraceReport report = verify_trace(p, bad);
  REQUIRE(report.first_error.has_value());
  CHECK(report.clause_verdicts[static_cast<std::size_t>(*report.first_error)].verdict ==
        Verdict::WrongValue);
}

TEST_CASE("profile_histogram sums profiles pointwise") {
  CHECK(profile_histogram({}).empty());

  const ProblemInstance& p = reference_problem();
  std::vector<TraceReport> reports;
  for (int i = 0; i < 100; ++i) {
    reports.push_back(verify_trace(p, trace_text("composed_g2")));
  }
  const auto hist = profile_histogram(reports);
  CHECK(hist == std::map<int, long long>{{2, 400}});

  reports.push_back(verify_trace(p, trace_text("explicit")));
  std::map<int, long long> recount;
  for (const TraceReport& r : reports) {
    for (const auto& [gap, count] : r.granularity_profile) recount[gap] += count;
  }
  CHECK(profile_histogram(reports) == recount);
}

TEST_CASE("eval_expression") {
  const auto env = [](std::string_view name) -> std::optional<Residue> {
    if (name == "QO") return Residue::from_int(3);
    if (name == "PE") return Residue::from_int(1);
    return std::nullopt;
  };
  CHECK(eval_expression("12(QO * 4) - 11", env) == Residue::from_int(18));
  CHECK(eval_expression("6PE - 11", env) == Residue::from_int(18));
  CHECK(eval_expression("6(1) - 11", env) == Residue::from_int(18));
  CHECK(eval_expression("(1 * 3 * 4 * 2 - 1) * 2 * 3 - 1 - 4", env) == Residue::from_int(18));
  CHECK(eval_expression("19 * 4 * 3", env) == Residue::from_int(21));
  CHECK(!eval_expression("XX + 1", env));
  CHECK(!eval_expression("1 +", env));
  CHECK(!eval_expression("(1", env));
  CHECK(!eval_expression("", env));
}
