#include "modchain/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "modchain/errors.hpp"
#include "modchain/rng.hpp"
#include "modchain/verify.hpp"

namespace modchain {

using nlohmann::json;

std::vector<CompletionRecord> load_completions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open completion file: " + path.string());
  std::vector<CompletionRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      CompletionRecord r{j.at("id").get<std::string>(), j.at("completion").get<std::string>()};
      if (!seen.insert(r.id).second) {
        throw DuplicateId("duplicate completion id '" + r.id + "' at line " +
                          std::to_string(line_no));
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError("bad completion record at line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return out;
}

void write_completions(std::span<const CompletionRecord> completions,
                       const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write completion file: " + path.string());
  for (const CompletionRecord& r : completions) {
    json j;
    j["id"] = r.id;
    j["completion"] = r.completion;
    out << j.dump() << '\n';
  }
}

ScoreFileResult score_file(const Dataset& dataset,
                           std::span<const CompletionRecord> completions) {
  std::unordered_map<std::string, const SampleRecord*> by_id;
  by_id.reserve(dataset.records.size() * 2);
  for (const SampleRecord& r : dataset.records) {
    if (!by_id.emplace(r.id, &r).second) {
      throw DuplicateId("duplicate dataset id '" + r.id + "'");
    }
  }

  std::unordered_map<std::string, const CompletionRecord*> answered;
  answered.reserve(completions.size() * 2);
  ScoreFileResult result;
  for (const CompletionRecord& c : completions) {
    if (!by_id.contains(c.id)) {
      result.unknown_ids.push_back(c.id);
      continue;
    }
    if (!answered.emplace(c.id, &c).second) {
      throw DuplicateId("duplicate completion id '" + c.id + "'");
    }
  }

  result.rows.reserve(dataset.records.size());
  for (const SampleRecord& r : dataset.records) {
    ScoredRow row;
    row.id = r.id;
    row.op = r.op;
    const auto it = answered.find(r.id);
    if (it == answered.end()) {
      row.missing = true;
      row.reward = 0;
      ++result.missing;
    } else {
      row.reward = score_against_key(Residue::from_int(r.answer), it->second->completion);
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string to_string(Grouping g) {
  switch (g) {
    case Grouping::PerOp: return "per_op";
    case Grouping::OpMod2: return "op_mod_2";
    case Grouping::OpMod4: return "op_mod_4";
    case Grouping::Overall: return "overall";
  }
  throw std::logic_error("bad Grouping");
}

Grouping grouping_from_string(const std::string& s) {
  if (s == "per_op") return Grouping::PerOp;
  if (s == "op_mod_2") return Grouping::OpMod2;
  if (s == "op_mod_4") return Grouping::OpMod4;
  if (s == "overall") return Grouping::Overall;
  throw InvalidSpec("unknown grouping: " + s);
}

EvalTable aggregate(std::span<const ScoredRow> scored, Grouping grouping) {
  EvalTable table;
  table.grouping = grouping;

  const auto finish_row = [](EvalRow& row) {
    row.pass_at_1 = row.n == 0 ? 0.0 : static_cast<double>(row.correct) / static_cast<double>(row.n);
  };

  if (grouping == Grouping::Overall) {
    EvalRow row;
    row.label = "overall";
    for (const ScoredRow& s : scored) {
      ++row.n;
      row.correct += s.reward;
    }
    finish_row(row);
    table.rows.push_back(std::move(row));
    return table;
  }

  if (grouping == Grouping::PerOp) {
    std::map<int, EvalRow> rows;
    for (const ScoredRow& s : scored) {
      EvalRow& row = rows[s.op];
      ++row.n;
      row.correct += s.reward;
    }
    for (auto& [op, row] : rows) {
      row.label = "op=" + std::to_string(op);
      finish_row(row);
      table.rows.push_back(std::move(row));
    }
    return table;
  }

  const int modulus = grouping == Grouping::OpMod2 ? 2 : 4;
  table.rows.resize(static_cast<std::size_t>(modulus));
  for (int c = 0; c < modulus; ++c) {
    table.rows[static_cast<std::size_t>(c)].label =
        "op%" + std::to_string(modulus) + "=" + std::to_string(c);
  }
  for (const ScoredRow& s : scored) {
    EvalRow& row = table.rows[static_cast<std::size_t>(s.op % modulus)];
    ++row.n;
    row.correct += s.reward;
  }
  for (EvalRow& row : table.rows) finish_row(row);
  return table;
}

std::string to_csv(const EvalTable& table) {
  std::ostringstream os;
  os << "group,n,pass1\n";
  for (const EvalRow& row : table.rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", row.pass_at_1);
    os << row.label << ',' << row.n << ',' << buf << '\n';
  }
  return os.str();
}

std::vector<CompletionRecord> random_baseline(const Dataset& dataset, std::uint64_t seed) {
  std::vector<CompletionRecord> out;
  out.reserve(dataset.records.size());
  SplitMix64 rng(derive_seed(seed, Stream::Baseline));
  for (const SampleRecord& r : dataset.records) {
    const int guess = static_cast<int>(rng.bounded(kModulus));
    out.push_back({r.id, "Answer: " + std::to_string(guess) + "."});
  }
  return out;
}

std::vector<CompletionRecord> oracle_baseline(const Dataset& dataset) {
  std::vector<CompletionRecord> out;
  out.reserve(dataset.records.size());
  for (const SampleRecord& r : dataset.records) {
    out.push_back({r.id, r.trace});
  }
  return out;
}

}  // namespace modchain
