#include "modchain/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "modchain/digest.hpp"
#include "modchain/errors.hpp"
#include "modchain/rng.hpp"
#include "modchain/verify.hpp"

namespace modchain {

using nlohmann::json;

namespace {

// Placeholder templates; {system}, {user}, {assistant} are substituted
// byte-for-byte. data/chat_templates.json carries the same strings for
// non-C++ consumers and is pinned against these by a unit test.
const std::string kQwenTemplate =
    "<|im_start|>system\n{system}<|im_end|>\n<|im_start|>user\n{user}<|im_end|>\n"
    "<|im_start|>assistant\n{assistant}<|im_end|>";
const std::string kLlamaTemplate =
    "<|begin_of_text|><|start_header_id|>system<|end_header_id|>\n\n{system}<|eot_id|>"
    "<|start_header_id|>user<|end_header_id|>\n\n{user}<|eot_id|>"
    "<|start_header_id|>assistant<|end_header_id|>\n\n{assistant}<|eot_id|>";
const std::string kPlainTemplate = "{system}\n\n{user}\n\n{assistant}";

const std::string kSystemPrompt =
    "You are an assistant that performs sequential arithmetic tasks, where all calculations "
    "must be done modulo 23.";

std::string substitute(std::string text, std::string_view key, std::string_view value) {
  const std::size_t at = text.find(key);
  if (at == std::string::npos) return text;
  text.replace(at, key.size(), value);
  return text;
}

std::string make_id(const std::string& split, int op, long long index) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s-op%03d-%07lld", split.c_str(), op,
                static_cast<long long>(index));
  return buf;
}

std::uint64_t record_seed(const DatasetSpec& spec, long long index, int attempt) {
  const std::uint64_t base = derive_seed(spec.base_seed, Stream::Instance, static_cast<std::uint64_t>(index));
  if (attempt == 0) return base;
  return derive_seed(base, Stream::Resample, static_cast<std::uint64_t>(attempt));
}

SampleRecord build_one(const DatasetSpec& spec, int op, long long index, int attempt,
                       std::unordered_set<int>* taken_names) {
  GenConfig config = spec.gen;
  config.op = op;
  const std::uint64_t seed = record_seed(spec, index, attempt);
  const ProblemInstance p = taken_names ? generate_problem(config, seed, *taken_names)
                                        : generate_problem(config, seed);

  SampleRecord r;
  r.id = make_id(spec.split_name, op, index);
  r.op = op;
  r.seed = seed;
  r.question = render_question(p);
  r.system = kSystemPrompt;
  SplitMix64 label_rng(derive_seed(seed, Stream::Labels));
  r.trace = emit_trace(p, spec.cot, label_rng).text();
  r.answer = solve(p).answer.value();
  r.max_new_tokens = max_new_tokens_for(op);
  r.digest = sha256_hex(r.question);

  // Pipeline self-check: a record never leaves the builder with a trace its
  // own verifier would not fully accept.
  const TraceReport report = verify_trace(p, r.trace);
  if (report.reward != 1 || report.first_error) {
    throw std::logic_error("self-check failed for record " + r.id);
  }
  return r;
}

int effective_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace

std::string to_string(ChatTemplate t) {
  switch (t) {
    case ChatTemplate::Plain: return "plain";
    case ChatTemplate::QwenChat: return "qwen_chat";
    case ChatTemplate::LlamaChat: return "llama_chat";
  }
  throw std::logic_error("bad ChatTemplate");
}

ChatTemplate chat_template_from_string(const std::string& s) {
  if (s == "plain") return ChatTemplate::Plain;
  if (s == "qwen_chat") return ChatTemplate::QwenChat;
  if (s == "llama_chat") return ChatTemplate::LlamaChat;
  throw UnknownTemplate("unknown chat template: " + s);
}

const std::string& chat_template_text(ChatTemplate t) {
  switch (t) {
    case ChatTemplate::Plain: return kPlainTemplate;
    case ChatTemplate::QwenChat: return kQwenTemplate;
    case ChatTemplate::LlamaChat: return kLlamaTemplate;
  }
  throw std::logic_error("bad ChatTemplate");
}

const std::string& system_prompt() { return kSystemPrompt; }

int max_new_tokens_for(int op) {
  if (op <= 44) return 4096;
  return 4096 * (2 + (op - 45) / 20);
}

void DatasetSpec::load_vocab() {
  if (vocabulary_path.empty()) {
    vocab_storage.reset();
    gen.vocabulary = nullptr;
    return;
  }
  vocab_storage = std::make_shared<const Vocabulary>(load_vocabulary(vocabulary_path));
  gen.vocabulary = vocab_storage.get();
}

void DatasetSpec::validate() const {
  if (op_values.empty()) throw InvalidSpec("spec: op_values is empty");
  if (samples_per_op < 1) throw InvalidSpec("spec: samples_per_op must be >= 1");
  if (epochs_hint < 1) throw InvalidSpec("spec: epochs_hint must be >= 1");
  if (split_name.empty()) throw InvalidSpec("spec: split_name is empty");
  for (int op : op_values) {
    if (op < 2) throw InvalidSpec("spec: op values must be >= 2");
    cot.validate(op);
  }
}

std::vector<SampleRecord> build_records(const DatasetSpec& spec,
                                        const std::unordered_set<std::string>* exclude,
                                        int workers) {
  spec.validate();
  const long long total = static_cast<long long>(spec.op_values.size()) * spec.samples_per_op;
  std::vector<SampleRecord> records(static_cast<std::size_t>(total));

  const auto op_for_index = [&](long long index) {
    return spec.op_values[static_cast<std::size_t>(index / spec.samples_per_op)];
  };

  if (spec.gen.global_unique_names) {
    // Names are consumed across the whole split, so generation is ordered.
    std::unordered_set<int> taken;
    std::unordered_set<std::string> seen;
    for (long long i = 0; i < total; ++i) {
      int attempt = 0;
      for (;;) {
        SampleRecord r = build_one(spec, op_for_index(i), i, attempt, &taken);
        if ((exclude == nullptr || !exclude->contains(r.digest)) && seen.insert(r.digest).second) {
          records[static_cast<std::size_t>(i)] = std::move(r);
          break;
        }
        ++attempt;
      }
    }
    return records;
  }

  // First pass, embarrassingly parallel: every index at attempt 0.
  const int n_workers = static_cast<int>(std::min<long long>(effective_workers(workers), total));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (long long i = w; i < total; i += n_workers) {
          records[static_cast<std::size_t>(i)] = build_one(spec, op_for_index(i), i, 0, nullptr);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Second pass, ordered: resample digest collisions (within the split and
  // against the excluded set). Deterministic regardless of worker count.
  std::unordered_set<std::string> seen;
  seen.reserve(records.size() * 2);
  for (long long i = 0; i < total; ++i) {
    SampleRecord& r = records[static_cast<std::size_t>(i)];
    int attempt = 0;
    while ((exclude != nullptr && exclude->contains(r.digest)) || !seen.insert(r.digest).second) {
      ++attempt;
      r = build_one(spec, op_for_index(i), i, attempt, nullptr);
    }
  }
  return records;
}

std::string record_to_json(const SampleRecord& r) {
  json j;
  j["id"] = r.id;
  j["op"] = r.op;
  j["seed"] = r.seed;
  j["question"] = r.question;
  j["system"] = r.system;
  j["trace"] = r.trace;
  j["answer"] = r.answer;
  j["max_new_tokens"] = r.max_new_tokens;
  j["digest"] = r.digest;
  return j.dump();
}

SampleRecord record_from_json(const std::string& line) {
  SampleRecord r;
  try {
    const json j = json::parse(line);
    r.id = j.at("id").get<std::string>();
    r.op = j.at("op").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.question = j.at("question").get<std::string>();
    r.system = j.at("system").get<std::string>();
    r.trace = j.at("trace").get<std::string>();
    r.answer = j.at("answer").get<int>();
    r.max_new_tokens = j.at("max_new_tokens").get<int>();
    r.digest = j.at("digest").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad dataset record: ") + e.what());
  }
  return r;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path) {
  std::filesystem::path p = dataset_path;
  p.replace_extension(".manifest.json");
  return p;
}

namespace {

json spec_to_json(const DatasetSpec& spec) {
  json j;
  j["format"] = "modchain.dataset";
  j["format_version"] = 1;
  j["split_name"] = spec.split_name;
  j["op_values"] = spec.op_values;
  j["samples_per_op"] = spec.samples_per_op;
  j["cot"] = {{"kind", to_string(spec.cot.kind)},
              {"g", spec.cot.g},
              {"order", to_string(spec.cot.order)},
              {"chunk", spec.cot.chunk}};
  j["chat_template"] = to_string(spec.chat_template);
  j["epochs_hint"] = spec.epochs_hint;
  j["base_seed"] = spec.base_seed;
  j["gen"] = {{"init_min", spec.gen.init_min},     {"init_max", spec.gen.init_max},
              {"add_min", spec.gen.add_min},       {"add_max", spec.gen.add_max},
              {"mul_min", spec.gen.mul_min},       {"mul_max", spec.gen.mul_max},
              {"max_distractors", spec.gen.max_distractors},
              {"global_unique_names", spec.gen.global_unique_names}};
  j["vocabulary"] = {{"version", spec.gen.vocab().version()},
                     {"size", spec.gen.vocab().size()},
                     {"path", spec.vocabulary_path}};
  json counts = json::object();
  for (int op : spec.op_values) counts[std::to_string(op)] = spec.samples_per_op;
  j["counts"] = counts;
  j["total"] = static_cast<long long>(spec.op_values.size()) * spec.samples_per_op;
  return j;
}

DatasetSpec spec_from_json(const json& j) {
  DatasetSpec spec;
  try {
    if (j.at("format").get<std::string>() != "modchain.dataset") {
      throw ParseError("not a modchain dataset manifest");
    }
    spec.split_name = j.at("split_name").get<std::string>();
    spec.op_values = j.at("op_values").get<std::vector<int>>();
    spec.samples_per_op = j.at("samples_per_op").get<long long>();
    const json& cot = j.at("cot");
    spec.cot.kind = cot_kind_from_string(cot.at("kind").get<std::string>());
    spec.cot.g = cot.at("g").get<int>();
    spec.cot.order = cot_order_from_string(cot.at("order").get<std::string>());
    spec.cot.chunk = cot.at("chunk").get<int>();
    spec.chat_template = chat_template_from_string(j.at("chat_template").get<std::string>());
    spec.epochs_hint = j.at("epochs_hint").get<long long>();
    spec.base_seed = j.at("base_seed").get<std::uint64_t>();
    const json& gen = j.at("gen");
    spec.gen.init_min = gen.at("init_min").get<int>();
    spec.gen.init_max = gen.at("init_max").get<int>();
    spec.gen.add_min = gen.at("add_min").get<int>();
    spec.gen.add_max = gen.at("add_max").get<int>();
    spec.gen.mul_min = gen.at("mul_min").get<int>();
    spec.gen.mul_max = gen.at("mul_max").get<int>();
    spec.gen.max_distractors = gen.at("max_distractors").get<int>();
    spec.gen.global_unique_names = gen.at("global_unique_names").get<bool>();
    const json& vocab = j.at("vocabulary");
    const std::string vocab_version = vocab.at("version").get<std::string>();
    spec.vocabulary_path = vocab.value("path", std::string());
    spec.load_vocab();
    if (vocab_version != spec.gen.vocab().version()) {
      throw ParseError("manifest was built with vocabulary '" + vocab_version +
                       "' but '" + spec.gen.vocab().version() + "' was loaded");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
  return spec;
}

}  // namespace

void write_split(const DatasetSpec& spec, std::span<const SampleRecord> records,
                 const std::filesystem::path& dataset_path) {
  if (dataset_path.has_parent_path()) {
    std::filesystem::create_directories(dataset_path.parent_path());
  }
  std::ofstream out(dataset_path, std::ios::binary);
  if (!out) throw ParseError("cannot write dataset file: " + dataset_path.string());
  for (const SampleRecord& r : records) {
    out << record_to_json(r) << '\n';
  }
  out.close();

  std::ofstream manifest(manifest_path_for(dataset_path), std::ios::binary);
  if (!manifest) {
    throw ParseError("cannot write manifest: " + manifest_path_for(dataset_path).string());
  }
  manifest << spec_to_json(spec).dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& dataset_path) {
  std::ifstream in(dataset_path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset file: " + dataset_path.string());
  Dataset ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ds.records.push_back(record_from_json(line));
  }
  const std::filesystem::path mpath = manifest_path_for(dataset_path);
  if (std::filesystem::exists(mpath)) {
    ds.spec = load_manifest(mpath);
  }
  return ds;
}

DatasetSpec load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw ParseError("cannot open manifest: " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad manifest json: ") + e.what());
  }
  return spec_from_json(j);
}

ProblemInstance instance_for(const SampleRecord& r, const GenConfig& gen) {
  if (gen.global_unique_names) {
    throw InvalidConfig(
        "records built with global_unique_names cannot be regenerated from their seed");
  }
  GenConfig config = gen;
  config.op = r.op;
  ProblemInstance p = generate_problem(config, r.seed);
  if (canonical_hash(p) != r.digest) {
    throw ParseError("record " + r.id + " does not match its generation config");
  }
  return p;
}

std::string render_chat(const SampleRecord& r, ChatTemplate t) {
  std::string out = chat_template_text(t);
  out = substitute(std::move(out), "{system}", r.system);
  out = substitute(std::move(out), "{user}", r.question);
  out = substitute(std::move(out), "{assistant}", r.trace);
  return out;
}

DedupReport dedup_across(std::span<const SampleRecord> train, std::span<const SampleRecord> eval) {
  std::unordered_set<std::string> train_digests;
  train_digests.reserve(train.size() * 2);
  for (const SampleRecord& r : train) train_digests.insert(r.digest);
  DedupReport report;
  for (const SampleRecord& r : eval) {
    if (train_digests.contains(r.digest)) report.collisions.push_back(r.digest);
  }
  return report;
}

SplitStats split_stats(std::span<const SampleRecord> records) {
  SplitStats stats;
  long long token_total = 0;
  for (const SampleRecord& r : records) {
    stats.per_op[r.op] += 1;
    stats.answer_histogram[static_cast<std::size_t>(r.answer)] += 1;

    bool in_token = false;
    long long tokens = 0;
    for (char c : r.trace) {
      const bool space = c == ' ' || c == '\t' || c == '\n';
      if (!space && !in_token) ++tokens;
      in_token = !space;
    }
    token_total += tokens;

    // Assignment sentences read "... equals <digit>"; one is the start
    // parameter, the rest are distractors.
    long long assignments = 0;
    constexpr std::string_view kEquals = " equals ";
    for (std::size_t at = r.question.find(kEquals); at != std::string::npos;
         at = r.question.find(kEquals, at + 1)) {
      const std::size_t v = at + kEquals.size();
      if (v < r.question.size() && r.question[v] >= '0' && r.question[v] <= '9') ++assignments;
    }
    stats.distractor_histogram[static_cast<int>(assignments) - 1] += 1;
  }
  if (!records.empty()) {
    stats.mean_trace_tokens = static_cast<double>(token_total) / static_cast<double>(records.size());
  }
  return stats;
}

std::string format_stats(const SplitStats& stats) {
  std::ostringstream os;
  os << "records per op:";
  for (const auto& [op, n] : stats.per_op) os << ' ' << op << ':' << n;
  os << "\nmean trace tokens: " << stats.mean_trace_tokens;
  os << "\ndistractor counts:";
  for (const auto& [k, n] : stats.distractor_histogram) os << ' ' << k << ':' << n;
  os << "\nanswer histogram:";
  long long lo = -1, hi = -1;
  for (long long n : stats.answer_histogram) {
    if (lo < 0 || n < lo) lo = n;
    if (n > hi) hi = n;
  }
  for (int v = 0; v < kModulus; ++v) {
    os << ' ' << v << ':' << stats.answer_histogram[static_cast<std::size_t>(v)];
  }
  os << "\nanswer bin min/max: " << lo << '/' << hi;
  return os.str();
}

}  // namespace modchain
