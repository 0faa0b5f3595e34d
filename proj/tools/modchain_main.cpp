// modchain: generate, inspect, verify, score, eval, serve, selfcheck.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modchain/dataset.hpp"
#include "modchain/errors.hpp"
#include "modchain/eval.hpp"
#include "modchain/selfcheck.hpp"
#include "modchain/service.hpp"
#include "modchain/verify.hpp"

using namespace modchain;
using nlohmann::json;

namespace {

// --config <file> supplies defaults; explicit flags always win. The file is
// a flat json object keyed by long option names (see README).
json load_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string_view(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw InvalidConfig(std::string("cannot open config file: ") + argv[i + 1]);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw InvalidConfig(std::string("bad config json: ") + e.what());
      }
      if (!j.is_object()) throw InvalidConfig("config file must hold a json object");
      return j;
    }
  }
  return json::object();
}

template <typename T>
T cfg(const json& config, const char* key, T fallback) {
  if (config.contains(key)) return config.at(key).get<T>();
  return fallback;
}

struct GenerateArgs {
  std::vector<int> ops;
  long long per_op = 1;
  std::string cot = "explicit";
  int g = 1;
  std::string order = "forward";
  int chunk = 2;
  std::string chat_template = "plain";
  std::string split_name = "split";
  long long epochs_hint = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string vocab;
  std::string dedup_against;
  int max_distractors = 1 << 20;
  int init_min = 1, init_max = 4, add_min = 1, add_max = 4, mul_min = 2, mul_max = 4;
  bool global_unique_names = false;
  int workers = 0;
};

DatasetSpec spec_from(const GenerateArgs& a) {
  DatasetSpec spec;
  spec.split_name = a.split_name;
  spec.op_values = a.ops;
  spec.samples_per_op = a.per_op;
  spec.cot.kind = cot_kind_from_string(a.cot);
  spec.cot.g = spec.cot.kind == CotKind::Explicit ? 1 : a.g;
  spec.cot.order = cot_order_from_string(a.order);
  spec.cot.chunk = a.chunk;
  spec.epochs_hint = a.epochs_hint;
  spec.base_seed = a.seed;
  spec.chat_template = chat_template_from_string(a.chat_template);
  spec.gen.max_distractors = a.max_distractors;
  spec.gen.init_min = a.init_min;
  spec.gen.init_max = a.init_max;
  spec.gen.add_min = a.add_min;
  spec.gen.add_max = a.add_max;
  spec.gen.mul_min = a.mul_min;
  spec.gen.mul_max = a.mul_max;
  spec.gen.global_unique_names = a.global_unique_names;
  spec.vocabulary_path = a.vocab;
  spec.load_vocab();
  return spec;
}

int cmd_generate(const GenerateArgs& a) {
  const DatasetSpec spec = spec_from(a);
  std::unordered_set<std::string> exclude;
  if (!a.dedup_against.empty()) {
    for (const SampleRecord& r : load_dataset(a.dedup_against).records) {
      exclude.insert(r.digest);
    }
    std::printf("excluding %zu digests from %s\n", exclude.size(), a.dedup_against.c_str());
  }
  const auto records = build_records(spec, exclude.empty() ? nullptr : &exclude, a.workers);
  write_split(spec, records, a.out);
  std::printf("wrote %zu records to %s\n", records.size(), a.out.c_str());
  std::printf("manifest: %s\n", manifest_path_for(a.out).string().c_str());
  std::printf("%s\n", format_stats(split_stats(records)).c_str());
  return 0;
}

GenConfig gen_config_of(const Dataset& ds) {
  if (!ds.spec) {
    throw InvalidConfig(
        "dataset has no manifest next to it; step diagnostics need the generation config");
  }
  return ds.spec->gen;
}

int cmd_inspect(const std::string& dataset_path, const std::string& id, long long index,
                int op, std::uint64_t seed, const std::string& cot, int g,
                const std::string& order, int chunk) {
  ProblemInstance p;
  std::optional<SampleRecord> record;
  if (!dataset_path.empty()) {
    const Dataset ds = load_dataset(dataset_path);
    const SampleRecord* found = nullptr;
    if (!id.empty()) {
      for (const SampleRecord& r : ds.records) {
        if (r.id == id) {
          found = &r;
          break;
        }
      }
      if (!found) throw InvalidConfig("no record with id '" + id + "'");
    } else {
      if (index < 0 || index >= static_cast<long long>(ds.records.size())) {
        throw InvalidConfig("record index out of range");
      }
      found = &ds.records[static_cast<std::size_t>(index)];
    }
    record = *found;
    p = instance_for(*found, gen_config_of(ds));
  } else {
    GenConfig config;
    config.op = op;
    p = generate_problem(config, seed);
  }

  std::printf("question:\n  %s\n", render_question(p).c_str());
  const OracleSolution sol = solve(p);
  std::printf("chain (op=%d):\n", p.op);
  for (std::size_t i = 0; i < sol.values.size(); ++i) {
    if (i == 0) {
      std::printf("  %-14s = %d\n", sol.values[i].first.c_str(), sol.values[i].second.value());
    } else {
      const OpStep& step = p.chain[i - 1].step;
      std::printf("  %-14s = prev %c %d = %d\n", sol.values[i].first.c_str(),
                  op_symbol(step.kind), step.constant, sol.values[i].second.value());
    }
  }
  std::printf("distractors:\n");
  for (const Distractor& d : p.distractors) {
    std::printf("  %-14s = %d\n", d.name.c_str(), d.value.value());
  }
  if (record) {
    std::printf("trace:\n  %s\n", record->trace.c_str());
  } else {
    CotSpec spec{cot_kind_from_string(cot), g, cot_order_from_string(order), chunk};
    if (spec.kind == CotKind::Explicit) spec.g = 1;
    SplitMix64 label_rng(derive_seed(seed, Stream::Labels));
    std::printf("trace (%s):\n  %s\n", cot.c_str(),
                emit_trace(p, spec, label_rng).text().c_str());
  }
  std::printf("answer: %d\n", sol.answer.value());
  std::printf("digest: %s\n", canonical_hash(p).c_str());
  return 0;
}

int cmd_score(const std::string& dataset_path, const std::string& completions_path,
              const std::string& out, bool strict) {
  const Dataset ds = load_dataset(dataset_path);
  const auto completions = load_completions(completions_path);
  const ScoreFileResult result = score_file(ds, completions);

  long long correct = 0;
  for (const ScoredRow& row : result.rows) correct += row.reward;
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw InvalidConfig("cannot write " + out);
    os << "id,op,reward,missing\n";
    for (const ScoredRow& row : result.rows) {
      os << row.id << ',' << row.op << ',' << row.reward << ',' << (row.missing ? 1 : 0) << '\n';
    }
    std::printf("wrote per-record rewards to %s\n", out.c_str());
  }
  std::printf("scored %zu records: mean reward %.6f (%lld correct), %lld missing, %zu unknown ids\n",
              result.rows.size(),
              result.rows.empty() ? 0.0
                                  : static_cast<double>(correct) /
                                        static_cast<double>(result.rows.size()),
              correct, result.missing, result.unknown_ids.size());
  for (const std::string& bad : result.unknown_ids) {
    std::fprintf(stderr, "unknown id: %s\n", bad.c_str());
  }
  if (strict && (result.missing > 0 || !result.unknown_ids.empty())) return 1;
  return 0;
}

int cmd_verify(const std::string& dataset_path, const std::string& completions_path,
               const std::string& out, bool strict) {
  const Dataset ds = load_dataset(dataset_path);
  const GenConfig gen = gen_config_of(ds);
  const auto completions = load_completions(completions_path);

  std::unordered_map<std::string, const SampleRecord*> by_id;
  for (const SampleRecord& r : ds.records) by_id[r.id] = &r;

  std::ofstream os;
  if (!out.empty()) {
    os.open(out);
    if (!os) throw InvalidConfig("cannot write " + out);
  }

  std::vector<TraceReport> reports;
  long long unknown = 0, rewarded = 0, first_errors = 0;
  for (const CompletionRecord& c : completions) {
    const auto it = by_id.find(c.id);
    if (it == by_id.end()) {
      ++unknown;
      std::fprintf(stderr, "unknown id: %s\n", c.id.c_str());
      continue;
    }
    const ProblemInstance p = instance_for(*it->second, gen);
    TraceReport report = verify_trace(p, c.completion);
    rewarded += report.reward;
    first_errors += report.first_error ? 1 : 0;
    if (os.is_open()) {
      json j;
      j["id"] = c.id;
      j["reward"] = report.reward;
      j["extracted_answer"] =
          report.extracted_answer ? json(*report.extracted_answer) : json(nullptr);
      j["first_error"] = report.first_error ? json(*report.first_error) : json(nullptr);
      json profile = json::object();
      for (const auto& [gap, count] : report.granularity_profile) {
        profile[std::to_string(gap)] = count;
      }
      j["granularity_profile"] = profile;
      json verdicts = json::array();
      for (const ClauseVerdict& cv : report.clause_verdicts) {
        verdicts.push_back({{"clause", cv.clause_index},
                            {"param", cv.param},
                            {"claimed", cv.claimed ? json(*cv.claimed) : json(nullptr)},
                            {"oracle", cv.oracle ? json(*cv.oracle) : json(nullptr)},
                            {"verdict", to_string(cv.verdict)}});
      }
      j["clauses"] = verdicts;
      os << j.dump() << '\n';
    }
    reports.push_back(std::move(report));
  }

  std::printf("verified %zu completions: mean reward %.6f, %lld with step errors, %lld unknown ids\n",
              reports.size(),
              reports.empty() ? 0.0
                              : static_cast<double>(rewarded) / static_cast<double>(reports.size()),
              first_errors, unknown);
  std::printf("granularity histogram:");
  for (const auto& [gap, count] : profile_histogram(reports)) {
    std::printf(" %d:%lld", gap, count);
  }
  std::printf("\n");
  if (!out.empty()) std::printf("wrote per-record diagnostics to %s\n", out.c_str());
  if (strict && unknown > 0) return 1;
  return 0;
}

int cmd_eval(const std::string& dataset_path, const std::string& completions_path,
             bool use_random_baseline, std::uint64_t baseline_seed,
             std::vector<std::string> groupings, const std::string& out, bool strict) {
  const Dataset ds = load_dataset(dataset_path);
  std::vector<CompletionRecord> completions;
  if (use_random_baseline) {
    completions = random_baseline(ds, baseline_seed);
  } else {
    completions = load_completions(completions_path);
  }
  const ScoreFileResult result = score_file(ds, completions);

  if (groupings.empty()) groupings = {"per_op", "overall"};
  json summary;
  summary["n"] = result.rows.size();
  summary["missing"] = result.missing;
  summary["unknown_ids"] = result.unknown_ids;
  summary["chance_level"] = 1.0 / kModulus;
  for (const std::string& name : groupings) {
    const EvalTable table = aggregate(result.rows, grouping_from_string(name));
    std::printf("[%s]\n%s", name.c_str(), to_csv(table).c_str());
    json rows = json::array();
    for (const EvalRow& row : table.rows) {
      rows.push_back({{"group", row.label},
                      {"n", row.n},
                      {"correct", row.correct},
                      {"pass_at_1", row.pass_at_1}});
    }
    summary["tables"][name] = rows;
    if (!out.empty()) {
      const std::string path = out + "." + name + ".csv";
      std::ofstream os(path);
      if (!os) throw InvalidConfig("cannot write " + path);
      os << to_csv(table);
    }
  }
  if (result.missing > 0) {
    std::printf("note: %lld records had no completion and scored 0\n", result.missing);
  }
  if (!out.empty()) {
    const std::string path = out + ".summary.json";
    std::ofstream os(path);
    if (!os) throw InvalidConfig("cannot write " + path);
    os << summary.dump(2) << '\n';
    std::printf("wrote summary to %s\n", path.c_str());
  }
  if (strict && (result.missing > 0 || !result.unknown_ids.empty())) return 1;
  return 0;
}

int cmd_serve(const std::string& dataset_path, const std::string& bind, int port, int max_batch,
              int workers) {
  ServiceConfig config;
  config.bind_address = bind;
  config.port = port;
  config.max_batch = max_batch;
  config.threads = workers;
  RewardService service(config);
  std::printf("loading %s ...\n", dataset_path.c_str());
  service.load(dataset_path);
  const int bound = service.start();
  std::printf("serving %zu problems on %s:%d (POST /score, POST /score_batch, GET /health)\n",
              service.problem_count(), bind.c_str(), bound);
  std::fflush(stdout);
  service.wait();
  return 0;
}

int cmd_selfcheck(int property_n, const std::string& vocab_path) {
  if (!vocab_path.empty()) {
    try {
      const Vocabulary v = load_vocabulary(vocab_path);
      std::printf("PASS vocabulary_file - %zu names (%s)\n", v.size(), v.version().c_str());
    } catch (const std::exception& e) {
      std::printf("FAIL vocabulary_file - %s\n", e.what());
      return 1;
    }
  }
  const auto results = run_selfcheck(property_n);
  int failures = 0;
  for (const CheckResult& r : results) {
    std::printf("%s %s%s%s\n", r.ok ? "PASS" : "FAIL", r.name.c_str(),
                r.message.empty() ? "" : " - ", r.message.c_str());
    if (!r.ok && failures++ == 0) {
      std::fprintf(stderr, "first failing vector: %s\n", r.name.c_str());
    }
  }
  std::printf("%zu checks, %d failures\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const json config = load_config(argc, argv);

    CLI::App app{"Deterministic chain-arithmetic reasoning data: generation, trace emission, "
                 "verification, scoring, and a reward service"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "json file supplying defaults for long options");

    // generate ---------------------------------------------------------------
    GenerateArgs gen;
    gen.ops = cfg(config, "ops", std::vector<int>{});
    gen.per_op = cfg(config, "per_op", gen.per_op);
    gen.cot = cfg(config, "cot", gen.cot);
    gen.g = cfg(config, "g", gen.g);
    gen.order = cfg(config, "order", gen.order);
    gen.chunk = cfg(config, "chunk", gen.chunk);
    gen.chat_template = cfg(config, "template", gen.chat_template);
    gen.split_name = cfg(config, "split_name", gen.split_name);
    gen.epochs_hint = cfg(config, "epochs_hint", gen.epochs_hint);
    gen.seed = cfg(config, "seed", gen.seed);
    gen.out = cfg(config, "out", gen.out);
    gen.vocab = cfg(config, "vocab", gen.vocab);
    gen.dedup_against = cfg(config, "dedup_against", gen.dedup_against);
    gen.max_distractors = cfg(config, "max_distractors", gen.max_distractors);
    gen.init_min = cfg(config, "init_min", gen.init_min);
    gen.init_max = cfg(config, "init_max", gen.init_max);
    gen.add_min = cfg(config, "add_min", gen.add_min);
    gen.add_max = cfg(config, "add_max", gen.add_max);
    gen.mul_min = cfg(config, "mul_min", gen.mul_min);
    gen.mul_max = cfg(config, "mul_max", gen.mul_max);
    gen.global_unique_names = cfg(config, "global_unique_names", gen.global_unique_names);
    gen.workers = cfg(config, "workers", gen.workers);

    auto* generate = app.add_subcommand("generate", "build a dataset split + manifest");
    generate->add_option("--ops", gen.ops, "op values, e.g. 8,16,24")->delimiter(',');
    generate->add_option("--per-op", gen.per_op, "samples per op value");
    generate->add_option("--cot", gen.cot, "explicit|composed|implicit");
    generate->add_option("--g", gen.g, "compression granularity (composed/implicit)");
    generate->add_option("--order", gen.order, "forward|backward|hierarchical");
    generate->add_option("--chunk", gen.chunk, "hierarchical chunk size");
    generate->add_option("--template", gen.chat_template, "plain|qwen_chat|llama_chat");
    generate->add_option("--split-name", gen.split_name, "name prefix for record ids");
    generate->add_option("--epochs-hint", gen.epochs_hint, "intended epochs (metadata only)");
    generate->add_option("--seed", gen.seed, "base seed");
    generate->add_option("--out", gen.out, "output dataset path (.jsonl)");
    generate->add_option("--vocab", gen.vocab, "vocabulary file (one name per line)");
    generate->add_option("--dedup-against", gen.dedup_against,
                         "dataset whose digests must not reappear");
    generate->add_option("--max-distractors", gen.max_distractors, "cap on distractor count");
    generate->add_option("--init-min", gen.init_min);
    generate->add_option("--init-max", gen.init_max);
    generate->add_option("--add-min", gen.add_min);
    generate->add_option("--add-max", gen.add_max);
    generate->add_option("--mul-min", gen.mul_min);
    generate->add_option("--mul-max", gen.mul_max);
    generate->add_flag("--global-unique-names", gen.global_unique_names,
                       "never reuse a parameter name across the split");
    generate->add_option("--workers", gen.workers, "generation threads (0 = all cores)");

    // inspect ----------------------------------------------------------------
    std::string ins_dataset = cfg(config, "dataset", std::string());
    std::string ins_id;
    long long ins_index = 0;
    int ins_op = cfg(config, "op", 8);
    std::uint64_t ins_seed = cfg(config, "seed", std::uint64_t{0});
    std::string ins_cot = cfg(config, "cot", std::string("explicit"));
    int ins_g = cfg(config, "g", 1);
    std::string ins_order = cfg(config, "order", std::string("forward"));
    int ins_chunk = cfg(config, "chunk", 2);
    auto* inspect = app.add_subcommand("inspect", "pretty-print one sample with oracle values");
    inspect->add_option("--dataset", ins_dataset, "dataset to read from");
    inspect->add_option("--id", ins_id, "record id (with --dataset)");
    inspect->add_option("--index", ins_index, "record index (with --dataset)");
    inspect->add_option("--op", ins_op, "chain length (fresh instance)");
    inspect->add_option("--seed", ins_seed, "instance seed (fresh instance)");
    inspect->add_option("--cot", ins_cot, "trace kind for fresh instances");
    inspect->add_option("--g", ins_g, "granularity for fresh instances");
    inspect->add_option("--order", ins_order, "trace order for fresh instances");
    inspect->add_option("--chunk", ins_chunk, "hierarchical chunk size");

    // score / verify ------------------------------------------------------------
    std::string sc_dataset = cfg(config, "dataset", std::string());
    std::string sc_completions = cfg(config, "completions", std::string());
    std::string sc_out = cfg(config, "out", std::string());
    bool sc_strict = cfg(config, "strict", false);
    auto* score_cmd = app.add_subcommand("score", "outcome rewards for a completion file");
    score_cmd->add_option("--dataset", sc_dataset)->required();
    score_cmd->add_option("--completions", sc_completions)->required();
    score_cmd->add_option("--out", sc_out, "per-record csv path");
    score_cmd->add_flag("--strict", sc_strict, "exit nonzero on missing/unknown ids");

    std::string vf_dataset = cfg(config, "dataset", std::string());
    std::string vf_completions = cfg(config, "completions", std::string());
    std::string vf_out = cfg(config, "out", std::string());
    bool vf_strict = cfg(config, "strict", false);
    auto* verify_cmd =
        app.add_subcommand("verify", "step-level diagnostics for a completion file");
    verify_cmd->add_option("--dataset", vf_dataset)->required();
    verify_cmd->add_option("--completions", vf_completions)->required();
    verify_cmd->add_option("--out", vf_out, "per-record diagnostics jsonl path");
    verify_cmd->add_flag("--strict", vf_strict, "exit nonzero on unknown ids");

    // eval ---------------------------------------------------------------------
    std::string ev_dataset = cfg(config, "dataset", std::string());
    std::string ev_completions = cfg(config, "completions", std::string());
    bool ev_random = false;
    std::uint64_t ev_baseline_seed = cfg(config, "baseline_seed", std::uint64_t{0});
    std::vector<std::string> ev_groups = cfg(config, "groups", std::vector<std::string>{});
    std::string ev_out = cfg(config, "out", std::string());
    bool ev_strict = cfg(config, "strict", false);
    auto* eval_cmd = app.add_subcommand("eval", "pass@1 tables by op grouping");
    eval_cmd->add_option("--dataset", ev_dataset)->required();
    eval_cmd->add_option("--completions", ev_completions, "completion file to score");
    eval_cmd->add_flag("--random-baseline", ev_random, "score uniform random answers instead");
    eval_cmd->add_option("--baseline-seed", ev_baseline_seed);
    eval_cmd->add_option("--group", ev_groups, "per_op|op_mod_2|op_mod_4|overall (repeatable)")
        ->delimiter(',');
    eval_cmd->add_option("--out", ev_out, "output prefix for csv + summary json");
    eval_cmd->add_flag("--strict", ev_strict, "exit nonzero on missing/unknown ids");

    // serve -----------------------------------------------------------------------
    std::string sv_dataset = cfg(config, "dataset", std::string());
    std::string sv_bind = cfg(config, "bind", std::string("127.0.0.1"));
    int sv_port = cfg(config, "port", 8023);
    int sv_max_batch = cfg(config, "max_batch", 1024);
    int sv_workers = cfg(config, "workers", 0);
    auto* serve_cmd = app.add_subcommand("serve", "run the reward scoring service");
    serve_cmd->add_option("--dataset", sv_dataset)->envname("MODCHAIN_DATASET")->required();
    serve_cmd->add_option("--bind", sv_bind, "bind address")->envname("MODCHAIN_BIND");
    serve_cmd->add_option("--port", sv_port, "port (0 = ephemeral)")->envname("MODCHAIN_PORT");
    serve_cmd->add_option("--max-batch", sv_max_batch)->envname("MODCHAIN_MAX_BATCH");
    serve_cmd->add_option("--workers", sv_workers, "handler threads")->envname("MODCHAIN_WORKERS");

    // selfcheck ---------------------------------------------------------------------
    int sf_n = cfg(config, "n", 200);
    std::string sf_vocab = cfg(config, "vocab", std::string());
    auto* selfcheck_cmd =
        app.add_subcommand("selfcheck", "reference vectors + randomized round-trip sweep");
    selfcheck_cmd->add_option("--n", sf_n, "number of random round-trip instances");
    selfcheck_cmd->add_option("--vocab", sf_vocab, "vocabulary file to validate");

    CLI11_PARSE(app, argc, argv);

    if (generate->parsed()) {
      if (gen.ops.empty()) throw InvalidSpec("generate: --ops is required");
      if (gen.out.empty()) throw InvalidSpec("generate: --out is required");
      return cmd_generate(gen);
    }
    if (inspect->parsed()) {
      return cmd_inspect(ins_dataset, ins_id, ins_index, ins_op, ins_seed, ins_cot, ins_g,
                         ins_order, ins_chunk);
    }
    if (score_cmd->parsed()) return cmd_score(sc_dataset, sc_completions, sc_out, sc_strict);
    if (verify_cmd->parsed()) return cmd_verify(vf_dataset, vf_completions, vf_out, vf_strict);
    if (eval_cmd->parsed()) {
      if (!ev_random && ev_completions.empty()) {
        throw InvalidSpec("eval: pass --completions or --random-baseline");
      }
      return cmd_eval(ev_dataset, ev_completions, ev_random, ev_baseline_seed, ev_groups, ev_out,
                      ev_strict);
    }
    if (serve_cmd->parsed()) {
      return cmd_serve(sv_dataset, sv_bind, sv_port, sv_max_batch, sv_workers);
    }
    if (selfcheck_cmd->parsed()) return cmd_selfcheck(sf_n, sf_vocab);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
