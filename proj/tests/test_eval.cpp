#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "modchain/errors.hpp"
#include "modchain/eval.hpp"

using namespace modchain;

namespace {

Dataset make_dataset(std::vector<int> ops, long long per_op, std::uint64_t seed) {
  DatasetSpec spec;
  spec.split_name = "eval_unit";
  spec.op_values = std::move(ops);
  spec.samples_per_op = per_op;
  spec.base_seed = seed;
  Dataset ds;
  ds.records = build_records(spec);
  ds.spec = spec;
  return ds;
}

std::vector<ScoredRow> synthetic_rows(const std::vector<std::pair<int, int>>& op_reward) {
  std::vector<ScoredRow> rows;
  int i = 0;
  for (const auto& [op, reward] : op_reward) {
    rows.push_back({"row-" + std::to_string(i++), op, reward, false});
  }
  return rows;
}

}  // namespace

TEST_CASE("oracle completions score 1 everywhere") {
  const Dataset ds = make_dataset({2, 3}, 4, 17);
  const auto completions = oracle_baseline(ds);
  const ScoreFileResult result = score_file(ds, completions);
  CHECK(result.unknown_ids.empty());
  CHECK(result.missing == 0);
  REQUIRE(result.rows.size() == 8);
  for (const ScoredRow& row : result.rows) CHECK(row.reward == 1);
  const EvalTable overall = aggregate(result.rows, Grouping::Overall);
  CHECK(overall.rows[0].pass_at_1 == 1.0);
  CHECK(overall.chance_level == doctest::Approx(1.0 / 23.0));
}

TEST_CASE("missing completions score zero and are flagged") {
  const Dataset ds = make_dataset({2}, 5, 23);
  auto completions = oracle_baseline(ds);
  completions.erase(completions.begin(), completions.begin() + 2);
  const ScoreFileResult result = score_file(ds, completions);
  CHECK(result.missing == 2);
  CHECK(result.rows[0].missing);
  CHECK(result.rows[0].reward == 0);
  CHECK(result.rows[4].reward == 1);
}

TEST_CASE("empty completion file is not an error") {
  const Dataset ds = make_dataset({2}, 3, 29);
  const ScoreFileResult result = score_file(ds, {});
  CHECK(result.unknown_ids.empty());
  CHECK(result.missing == 3);
}

TEST_CASE("unknown ids are collected; duplicates are fatal") {
  const Dataset ds = make_dataset({2}, 3, 31);
  auto completions = oracle_baseline(ds);
  completions.push_back({"nope-1", "Answer: 0."});
  const ScoreFileResult result = score_file(ds, completions);
  CHECK(result.unknown_ids == std::vector<std::string>{"nope-1"});

  completions.push_back(completions.front());
  CHECK_THROWS_AS(score_file(ds, completions), DuplicateId);
}

TEST_CASE("completion files round-trip and reject duplicate ids") {
  const auto dir = std::filesystem::temp_directory_path() / "modchain_eval_test";
  std::filesystem::create_directories(dir);
  const std::vector<CompletionRecord> completions = {{"a", "Answer: 1."}, {"b", "x\ny"}};
  write_completions(completions, dir / "c.jsonl");
  const auto loaded = load_completions(dir / "c.jsonl");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "a");
  CHECK(loaded[1].completion == "x\ny");

  {
    std::ofstream out(dir / "dup.jsonl");
    out << R"({"id":"a","completion":"x"})" << '\n'
        << R"({"id":"a","completion":"y"})" << '\n';
  }
  CHECK_THROWS_AS(load_completions(dir / "dup.jsonl"), DuplicateId);
}

TEST_CASE("aggregate groupings") {
  // 10-op grid: one row per op.
  std::vector<std::pair<int, int>> grid;
  for (int op = 32; op <= 104; op += 8) {
    grid.emplace_back(op, 1);
    grid.emplace_back(op, 0);
  }
  const auto per_op = aggregate(synthetic_rows(grid), Grouping::PerOp);
  CHECK(per_op.rows.size() == 10);
  CHECK(per_op.rows[0].label == "op=32");
  CHECK(per_op.rows[1].label == "op=40");
  CHECK(per_op.rows[9].label == "op=104");
  for (const EvalRow& row : per_op.rows) {
    CHECK(row.n == 2);
    CHECK(row.pass_at_1 == 0.5);
  }

  const auto mod4 = aggregate(synthetic_rows({{25, 1}, {26, 0}, {27, 1}, {28, 0}}),
                              Grouping::OpMod4);
  REQUIRE(mod4.rows.size() == 4);
  for (const EvalRow& row : mod4.rows) CHECK(row.n == 1);
  CHECK(mod4.rows[1].label == "op%4=1");
  CHECK(mod4.rows[1].correct == 1);  // op=25

  const auto mod2 = aggregate(synthetic_rows({{25, 1}, {27, 0}, {29, 1}}), Grouping::OpMod2);
  REQUIRE(mod2.rows.size() == 2);
  CHECK(mod2.rows[0].n == 0);
  CHECK(mod2.rows[0].pass_at_1 == 0.0);
  CHECK(mod2.rows[1].n == 3);
}

TEST_CASE("per-op means re-average to the overall mean for equal group sizes") {
  std::vector<std::pair<int, int>> data;
  std::mt19937 rng(7);
  for (int op : {8, 16, 24, 32}) {
    for (int i = 0; i < 50; ++i) data.emplace_back(op, rng() % 3 == 0 ? 1 : 0);
  }
  const auto rows = synthetic_rows(data);
  const auto per_op = aggregate(rows, Grouping::PerOp);
  double mean = 0;
  for (const EvalRow& row : per_op.rows) mean += row.pass_at_1;
  mean /= static_cast<double>(per_op.rows.size());
  const auto overall = aggregate(rows, Grouping::Overall);
  CHECK(overall.rows[0].pass_at_1 == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("scoring is order-independent") {
  const Dataset ds = make_dataset({2, 4}, 5, 41);
  auto completions = random_baseline(ds, 5);
  const auto table_before = to_csv(aggregate(score_file(ds, completions).rows, Grouping::PerOp));
  std::reverse(completions.begin(), completions.end());
  const auto table_after = to_csv(aggregate(score_file(ds, completions).rows, Grouping::PerOp));
  CHECK(table_before == table_after);
}

TEST_CASE("random baseline is deterministic and near chance") {
  const Dataset ds = make_dataset({4, 6}, 2500, 53);
  const auto a = random_baseline(ds, 99);
  const auto b = random_baseline(ds, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].completion == b[i].completion);
  }
  const auto overall = aggregate(score_file(ds, a).rows, Grouping::Overall);
  // 5000 guesses; 1/23 +- 10 sigma.
  CHECK(std::abs(overall.rows[0].pass_at_1 - 1.0 / 23.0) < 0.03);
}

TEST_CASE("csv output shape") {
  const auto table = aggregate(synthetic_rows({{8, 1}, {8, 0}, {16, 1}}), Grouping::PerOp);
  const std::string csv = to_csv(table);
  CHECK(csv == "group,n,pass1\nop=8,2,0.5\nop=16,1,1\n");
}
