#include "modchain/selfcheck.hpp"

#include <sstream>

#include "modchain/rng.hpp"
#include "modchain/verify.hpp"

namespace modchain {

namespace {

OpStep add(int c) { return {OpKind::Add, c}; }
OpStep sub(int c) { return {OpKind::Sub, c}; }
OpStep mul(int c) { return {OpKind::Mul, c}; }

ProblemInstance make_reference_problem() {
  ProblemInstance p;
  p.seed = 0;
  p.op = 8;
  p.initial_value = Residue::from_int(1);
  p.start_param = "whelks";
  p.chain = {
      {"celery", mul(3)}, {"cats", mul(4)},    {"harps", mul(2)},  {"chairs", sub(1)},
      {"boots", mul(2)},  {"onions", mul(3)},  {"spruces", sub(1)}, {"scarves", sub(4)},
  };
  p.distractors = {
      {"hats", Residue::from_int(4)},    {"blocks", Residue::from_int(3)},
      {"nautiluses", Residue::from_int(1)}, {"batons", Residue::from_int(2)},
      {"maples", Residue::from_int(1)},  {"opals", Residue::from_int(3)},
      {"needles", Residue::from_int(4)},
  };
  p.sentence_order = {9, 4, 3, 10, 11, 8, 1, 5, 7, 0, 12, 13, 6, 14, 15, 2};
  p.validate();
  return p;
}

ProblemInstance make_long_reference_problem() {
  ProblemInstance p;
  p.seed = 0;
  p.op = 25;
  p.initial_value = Residue::from_int(3);
  p.start_param = "whelks";
  p.chain = {
      {"harps", add(1)},     {"cats", add(4)},    {"blocks", mul(4)},  {"chairs", mul(2)},
      {"nautiluses", mul(3)}, {"onions", sub(2)},  {"spruces", mul(3)}, {"scarves", mul(2)},
      {"celery", add(2)},    {"batons", add(2)},  {"boots", mul(3)},   {"hats", add(1)},
      {"opals", sub(4)},     {"maples", add(3)},  {"needles", mul(3)}, {"violets", mul(2)},
      {"cranes", mul(3)},    {"flutes", mul(2)},  {"herons", mul(4)},  {"markers", mul(3)},
      {"otters", sub(1)},    {"aspens", mul(3)},  {"badgers", sub(2)}, {"wolves", sub(2)},
      {"tokens", add(2)},
  };
  p.distractors = {{"drums", Residue::from_int(2)}};
  p.sentence_order.resize(static_cast<std::size_t>(p.statement_count()));
  for (std::size_t i = 0; i < p.sentence_order.size(); ++i) {
    p.sentence_order[i] = static_cast<int>(i);
  }
  p.validate();
  return p;
}

const std::string kReferenceQuestion =
    "The number of hats equals 4. The number of chairs equals the number of harps minus 1. "
    "The number of harps equals the number of cats times 2. The number of blocks equals 3. "
    "The number of nautiluses equals 1. The number of scarves equals the number of spruces "
    "minus 4. The number of celery equals the number of whelks times 3. The number of boots "
    "equals the number of chairs times 2. The number of spruces equals the number of onions "
    "minus 1. The number of whelks equals 1. The number of batons equals 2. The number of "
    "maples equals 1. The number of onions equals the number of boots times 3. The number of "
    "opals equals 3. The number of needles equals 4. The number of cats equals the number of "
    "celery times 4. What is the number of scarves?";

std::vector<ReferenceTrace> make_reference_traces() {
  std::vector<ReferenceTrace> v;
  v.push_back({"explicit",
               {CotKind::Explicit, 1, CotOrder::Forward},
               "Define whelks as JK; so JK = 1. Define celery as FP; so FP = JK * 3 = 1 * 3 = 3. "
               "Define cats as VK; so VK = FP * 4 = 3 * 4 = 12. Define harps as RQ; so RQ = VK * "
               "2 = 12 * 2 = 1. Define chairs as DP; so DP = RQ - 1 = 1 - 1 = 0. Define boots as "
               "DE; so DE = DP * 2 = 0 * 2 = 0. Define onions as MP; so MP = DE * 3 = 0 * 3 = 0. "
               "Define spruces as UA; so UA = MP - 1 = 0 - 1 = 22. Define scarves as TH; so TH = "
               "UA - 4 = 22 - 4 = 18. Answer: 18."});
  v.push_back({"composed_g2",
               {CotKind::Composed, 2, CotOrder::Forward},
               "Define whelks as JK; so JK = 1. Define cats as VK; so VK = JK * 3 * 4 = 1 * 3 * 4 "
               "= 12. Define chairs as DP; so DP = VK * 2 - 1 = 12 * 2 - 1 = 0. Define onions as "
               "MP; so MP = DP * 2 * 3 = 0 * 2 * 3 = 0. Define scarves as TH; so TH = MP - 1 - 4 "
               "= 0 - 1 - 4 = 18. Answer: 18."});
  v.push_back({"composed_g4",
               {CotKind::Composed, 4, CotOrder::Forward},
               "Define whelks as JK; so JK = 1. Define chairs as DP; so DP = JK * 3 * 4 * 2 - 1 = "
               "1 * 3 * 4 * 2 - 1 = 0. Define scarves as TH; so TH = DP * 2 * 3 - 1 - 4 = 0 * 2 "
               "* 3 - 1 - 4 = 18. Answer: 18."});
  v.push_back({"composed_g8",
               {CotKind::Composed, 8, CotOrder::Forward},
               "Define whelks as JK; so JK = 1. Define scarves as TH; so TH = (JK * 3 * 4 * 2 - "
               "1) * 2 * 3 - 1 - 4 = (1 * 3 * 4 * 2 - 1) * 2 * 3 - 1 - 4 = 18. Answer: 18."});
  v.push_back({"implicit_g2",
               {CotKind::Implicit, 2, CotOrder::Forward},
               "Define whelks as JK; so JK = 1. Define cats as VK; so VK = 3 * 4 = 12. Define "
               "chairs as DP; so DP = 1 - 1 = 0. Define onions as MP; so MP = 0 * 3 = 0. Define "
               "scarves as TH; so TH = 22 - 4 = 18. Answer: 18."});
  v.push_back({"implicit_g4",
               {CotKind::Implicit, 4, CotOrder::Forward},
               "Define whelks as JK; so JK = 1. Define chairs as DP; so DP = 1 - 1 = 0. Define "
               "scarves as TH; so TH = 22 - 4 = 18. Answer: 18."});
  v.push_back({"implicit_g8",
               {CotKind::Implicit, 8, CotOrder::Forward},
               "Define whelks as JK; so JK = 1. Define scarves as TH; so TH = 22 - 4 = 18. "
               "Answer: 18."});
  v.push_back({"backward",
               {CotKind::Explicit, 1, CotOrder::Backward},
               "Define whelks as PE; so PE = 1. Define scarves as SU; so SU = LY - 4. Define "
               "spruces as LY; so SU = LY - 4 = (PY - 1) - 4 = PY - 5. Define onions as PY; so "
               "SU = PY - 5 = (TD * 3) - 5 = 3TD - 5. Define boots as TD; so SU = 3TD - 5 = 3(UD "
               "* 2) - 5 = 6UD - 5. Define chairs as UD; so SU = 6UD - 5 = 6(KF - 1) - 5 = 6KF - "
               "11. Define harps as KF; so SU = 6KF - 11 = 6(BP * 2) - 11 = 12BP - 11. Define "
               "cats as BP; so SU = 12BP - 11 = 12(QO * 4) - 11 = 2QO - 11. Define celery as QO; "
               "so SU = 2QO - 11 = 2(PE * 3) - 11 = 6PE - 11 = 6(1) - 11 = 18. Answer: 18."});
  v.push_back({"hierarchical_c2",
               {CotKind::Explicit, 1, CotOrder::Hierarchical, 2},
               "Define whelks as PE; so PE = 1. Define celery as QO; so QO = 1 * 3 = 3. Define "
               "cats as BP; so BP = QO * 4 = 3 * 4 = 12. Define harps as KF; so KF = BP * 2 = "
               "2BP. Define chairs as UD; so UD = KF - 1 = 2BP - 1. Define boots as TD; so TD = "
               "UD * 2 = 2UD. Define onions as PY; so PY = TD * 3 = 2UD * 3 = 6UD. Define "
               "spruces as LY; so LY = PY - 1. Define scarves as SU; so SU = LY - 4 = (PY - 1) - "
               "4 = PY - 5. UD = 2BP - 1 = 2 * 12 - 1 = 0. SU = PY - 5 = 6UD - 5. SU = 6UD - 5 = "
               "6 * 0 - 5 = 18. Answer: 18."});
  return v;
}

std::vector<ReferenceCompletion> make_long_reference_completions() {
  std::vector<ReferenceCompletion> v;
  v.push_back(
      {"long_composed_a",
       "Define whelks as YH; so YH = 3. Define cats as YO; so YO = YH + 1 + 4 = 3 + 1 + 4 = 8. "
       "Define chairs as ZD; so ZD = YO * 4 * 2 = 8 * 4 * 2 = 18. Define onions as YL; so YL = "
       "ZD * 3 - 2 = 18 * 3 - 2 = 6. Define scarves as YP; so YP = YL * 3 * 2 = 6 * 3 * 2 = 13. "
       "Define batons as ZQ; so ZQ = YP + 2 + 2 = 13 + 2 + 2 = 17. Define hats as ZT; so ZT = "
       "ZQ * 3 + 1 = 17 * 3 + 1 = 6. Define maples as YX; so YX = ZT - 4 + 3 = 6 - 4 + 3 = 5. "
       "Define violets as YO; so YO = YX * 3 * 2 = 5 * 3 * 2 = 7. Define flutes as YL; so YL = "
       "YO * 3 * 2 = 7 * 3 * 2 = 19. Define markers as YH; so YH = YL * 4 * 3 = 19 * 4 * 3 = "
       "21. Define aspens as YL; so YL = (YH - 1) * 3 = (21 - 1) * 3 = 14. Define wolves as YL; "
       "so YL = YL - 2 - 2 = 14 - 2 - 2 = 10. Define YL + 2 = 10 + 2 = 12. Answer: 12.",
       false});
  v.push_back(
      {"long_implicit_a",
       "Define whelks as ZD; so ZD = 3. Define cats as ZF; so ZF = 4 + 4 = 8. Define chairs as "
       "ZU; so ZU = 9 * 2 = 18. Define onions as ZL; so ZL = 8 - 2 = 6. Define scarves as ZC; "
       "so ZC = 18 * 2 = 13. Define batons as ZY; so ZY = 15 + 2 = 17. Define hats as ZN; so ZN "
       "= 5 + 1 = 6. Define maples as ZD; so ZD = 2 + 3 = 5. Define violets as ZF; so ZF = 15 * "
       "2 = 7. Define flutes as ZD; so ZD = 21 * 2 = 19. Define markers as ZD; so ZD = 7 * 3 = "
       "21. Define aspens as ZD; so ZD = 20 * 3 = 14. Define wolves as ZD; so ZD = 12 - 2 = 10. "
       "Define tokens as ZD; so ZD = 10 + 2 = 12. Answer: 12.",
       true});
  v.push_back(
      {"long_composed_b",
       "Define whelks as ZD; so ZD = 3. Define cats as ZT; so ZT = ZD + 1 + 4 = 3 + 1 + 4 = 8. "
       "Define chairs as ZQ; so ZQ = ZT * 4 * 2 = 8 * 4 * 2 = 18. Define onions as ZD; so ZD = "
       "ZQ * 3 - 2 = 18 * 3 - 2 = 6. Define scarves as ZO; so ZO = ZD * 3 * 2 = 6 * 3 * 2 = 13. "
       "Define batons as ZD; so ZD = ZO + 2 + 2 = 13 + 2 + 2 = 17. Define hats as ZT; so ZT = "
       "ZD * 3 + 1 = 17 * 3 + 1 = 6. Define maples as ZD; so ZD = ZT - 4 + 3 = 6 - 4 + 3 = 5. "
       "Define violets as ZT; so ZT = ZD * 3 * 2 = 5 * 3 * 2 = 7. Define flutes as ZD; so ZD = "
       "ZT * 3 * 2 = 7 * 3 * 2 = 19. Define markers as ZT; so ZT = ZD * 4 * 3 = 19 * 4 * 3 = "
       "21. Define aspens as ZD; so ZD = (ZT - 1) * 3 = (21 - 1) * 3 = 14. Define wolves as ZT; "
       "so ZT = ZD - 2 - 2 = 14 - 2 - 2 = 10. Define tokens as ZD; so ZD = ZT * 1 + 2 = 10 * 1 "
       "+ 2 = 12. Answer: 12.",
       true});
  v.push_back(
      {"long_implicit_b",
       "Define whelks as ZD; so ZD = 3. Define cats as ZC; so ZC = 4 + 4 = 8. Define chairs as "
       "ZK; so ZK = 9 * 2 = 18. Define onions as ZU; so ZU = 8 - 2 = 6. Define scarves as ZC; "
       "so ZC = 18 * 2 = 13. Define batons as ZD; so ZD = 15 + 2 = 17. Define hats as ZU; so ZU "
       "= 5 + 1 = 6. Define maples as ZC; so ZC = 2 + 3 = 5. Define violets as ZD; so ZD = 15 * "
       "2 = 7. Define flutes as ZD; so ZD = 21 * 2 = 19. Define markers as ZD; so ZD = 7 * 3 = "
       "21. Define aspens as ZD; so ZD = 20 * 3 = 14. Define wolves as ZD; so ZD = 12 - 2 = 10. "
       "Define tokens as ZD; so ZD = 10 + 2 = 12. Answer: 12.",
       true});
  return v;
}

Trace emit_reference(const ProblemInstance& p, const ReferenceTrace& rt) {
  const LabelMap& labels = rt.spec.order == CotOrder::Forward ? reference_forward_labels()
                                                              : reference_symbolic_labels();
  if (rt.spec.order == CotOrder::Backward) return emit_backward(p, labels);
  if (rt.spec.order == CotOrder::Hierarchical) return emit_hierarchical(p, rt.spec.chunk, labels);
  switch (rt.spec.kind) {
    case CotKind::Explicit: return emit_explicit(p, labels);
    case CotKind::Composed: return emit_composed(p, rt.spec.g, labels);
    case CotKind::Implicit: return emit_implicit(p, rt.spec.g, labels);
  }
  throw std::logic_error("bad CotKind");
}

}  // namespace

const ProblemInstance& reference_problem() {
  static const ProblemInstance p = make_reference_problem();
  return p;
}

const std::string& reference_question() { return kReferenceQuestion; }

const LabelMap& reference_forward_labels() {
  static const LabelMap labels = {"JK", "FP", "VK", "RQ", "DP", "DE", "MP", "UA", "TH"};
  return labels;
}

const LabelMap& reference_symbolic_labels() {
  static const LabelMap labels = {"PE", "QO", "BP", "KF", "UD", "TD", "PY", "LY", "SU"};
  return labels;
}

const std::vector<ReferenceTrace>& reference_traces() {
  static const std::vector<ReferenceTrace> traces = make_reference_traces();
  return traces;
}

const ProblemInstance& long_reference_problem() {
  static const ProblemInstance p = make_long_reference_problem();
  return p;
}

const std::vector<ReferenceCompletion>& long_reference_completions() {
  static const std::vector<ReferenceCompletion> completions = make_long_reference_completions();
  return completions;
}

std::vector<CheckResult> run_selfcheck(int property_n) {
  std::vector<CheckResult> results;
  const auto check = [&](const std::string& name, bool ok, const std::string& msg) {
    results.push_back({name, ok, ok ? std::string() : msg});
  };

  const ProblemInstance& ref = reference_problem();
  check("reference_question", render_question(ref) == reference_question(),
        "rendered question text diverged");
  check("reference_answer", solve(ref).answer == Residue::from_int(18), "expected answer 18");

  for (const ReferenceTrace& rt : reference_traces()) {
    std::string got;
    try {
      got = emit_reference(ref, rt).text();
    } catch (const std::exception& e) {
      check("trace_" + rt.name, false, e.what());
      continue;
    }
    if (got != rt.expected) {
      check("trace_" + rt.name, false, "emitted text diverged:\n  got: " + got);
      continue;
    }
    const TraceReport report = verify_trace(ref, got);
    check("trace_" + rt.name, report.reward == 1 && !report.first_error,
          "reference trace did not verify cleanly");
  }

  const ProblemInstance& longref = long_reference_problem();
  check("long_reference_answer", solve(longref).answer == Residue::from_int(12),
        "expected answer 12");
  for (const ReferenceCompletion& rc : long_reference_completions()) {
    const int reward = score(longref, rc.text);
    bool ok = reward == 1;
    std::string msg = ok ? "" : "expected reward 1";
    if (ok && rc.regular_anchors) {
      const TraceReport report = verify_trace(longref, rc.text);
      const auto& profile = report.granularity_profile;
      const auto ones = profile.count(1) ? profile.at(1) : 0;
      const auto twos = profile.count(2) ? profile.at(2) : 0;
      ok = !report.first_error && ones == 1 && twos == (longref.op - 1) / 2;
      if (!ok) msg = "expected a clean g=2 body with one trailing single step";
    }
    check(rc.name, ok, msg);
  }

  // Randomized round trip at small scale.
  int failures = 0;
  std::string first_failure;
  SplitMix64 seed_rng(0x5e1fc8ecULL);
  for (int i = 0; i < property_n; ++i) {
    GenConfig config;
    config.op = 2 + static_cast<int>(seed_rng.bounded(31));
    const std::uint64_t seed = seed_rng.next();
    const ProblemInstance p = generate_problem(config, seed);
    std::vector<CotSpec> specs{{CotKind::Explicit, 1, CotOrder::Forward},
                               {CotKind::Explicit, 1, CotOrder::Backward}};
    for (int g = 1; g <= p.op; ++g) {
      if (p.op % g != 0) continue;
      specs.push_back({CotKind::Composed, g, CotOrder::Forward});
      specs.push_back({CotKind::Implicit, g, CotOrder::Forward});
    }
    if ((p.op & (p.op - 1)) == 0) {
      specs.push_back({CotKind::Explicit, 1, CotOrder::Hierarchical, 2});
    }
    for (const CotSpec& spec : specs) {
      SplitMix64 label_rng(derive_seed(seed, Stream::Labels));
      const Trace trace = emit_trace(p, spec, label_rng);
      const TraceReport report = verify_trace(p, trace.text());
      if (report.reward != 1 || report.first_error) {
        ++failures;
        if (first_failure.empty()) {
          std::ostringstream os;
          os << "op=" << p.op << " seed=" << seed << " kind=" << to_string(spec.kind)
             << " g=" << spec.g << " order=" << to_string(spec.order);
          first_failure = os.str();
        }
      }
    }
  }
  check("round_trip_sweep", failures == 0,
        std::to_string(failures) + " failing round trips; first: " + first_failure);

  return results;
}

}  // namespace modchain
