#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "modchain/problem.hpp"
#include "modchain/trace.hpp"

namespace modchain {

enum class ChatTemplate { Plain, QwenChat, LlamaChat };

std::string to_string(ChatTemplate t);
ChatTemplate chat_template_from_string(const std::string& s);

// Raw template with {system}/{user}/{assistant} placeholders.
const std::string& chat_template_text(ChatTemplate t);

// System prompt baked into every record.
const std::string& system_prompt();

// Generation token budget by difficulty: 4096 up to op 44, then one extra
// 4096 block per 20 ops.
int max_new_tokens_for(int op);

struct DatasetSpec {
  std::string split_name = "split";
  std::vector<int> op_values;
  long long samples_per_op = 0;
  CotSpec cot;
  long long epochs_hint = 1;  // metadata only; nothing here trains
  std::uint64_t base_seed = 0;
  ChatTemplate chat_template = ChatTemplate::Plain;
  GenConfig gen;  // op field ignored; ranges/distractor/vocabulary policy apply

  // Optional external vocabulary; empty means the builtin pool. load_vocab()
  // populates gen.vocabulary from the path.
  std::string vocabulary_path;
  std::shared_ptr<const Vocabulary> vocab_storage;
  void load_vocab();

  // Throws InvalidSpec on structural problems (no ops, non-positive counts,
  // granularity not dividing an op value, ...).
  void validate() const;
};

struct SampleRecord {
  std::string id;
  int op = 0;
  std::uint64_t seed = 0;  // instance seed; regenerates the problem exactly
  std::string question;
  std::string system;
  std::string trace;
  int answer = 0;
  int max_new_tokens = 0;
  std::string digest;  // canonical_hash of the question
};

// Deterministic build: |op_values| * samples_per_op records, no digest
// duplicates within the split (collisions are resampled), every trace
// self-checked to reward 1 before it is kept. Digests in `exclude` are
// avoided too (cross-split dedup). workers <= 0 means hardware concurrency.
std::vector<SampleRecord> build_records(const DatasetSpec& spec,
                                        const std::unordered_set<std::string>* exclude = nullptr,
                                        int workers = 0);

// Serialized form: one JSON object per line, plus a manifest echoing the spec
// (written next to the dataset as <stem>.manifest.json).
std::string record_to_json(const SampleRecord& r);
SampleRecord record_from_json(const std::string& line);

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path);

void write_split(const DatasetSpec& spec, std::span<const SampleRecord> records,
                 const std::filesystem::path& dataset_path);

struct Dataset {
  std::vector<SampleRecord> records;
  std::optional<DatasetSpec> spec;  // present when a manifest was found
};

Dataset load_dataset(const std::filesystem::path& dataset_path);
DatasetSpec load_manifest(const std::filesystem::path& manifest_path);

// Rebuilds the problem instance behind a record (requires the generation
// config the split was built with).
ProblemInstance instance_for(const SampleRecord& r, const GenConfig& gen);

std::string render_chat(const SampleRecord& r, ChatTemplate t);

struct DedupReport {
  std::vector<std::string> collisions;  // digests present in both splits
};
DedupReport dedup_across(std::span<const SampleRecord> train, std::span<const SampleRecord> eval);

struct SplitStats {
  std::map<int, long long> per_op;
  std::array<long long, kModulus> answer_histogram{};
  double mean_trace_tokens = 0.0;  // whitespace-token proxy
  std::map<int, long long> distractor_histogram;
};
SplitStats split_stats(std::span<const SampleRecord> records);
std::string format_stats(const SplitStats& stats);

}  // namespace modchain
