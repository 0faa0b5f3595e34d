#include "modchain/problem.hpp"

#include <algorithm>
#include <unordered_set>

#include "modchain/digest.hpp"
#include "modchain/errors.hpp"
#include "modchain/rng.hpp"

namespace modchain {

std::vector<OpStep> ProblemInstance::steps() const {
  std::vector<OpStep> out;
  out.reserve(chain.size());
  for (const ChainLink& link : chain) out.push_back(link.step);
  return out;
}

void ProblemInstance::validate() const {
  if (op < 1) throw InvalidConfig("instance: op must be >= 1");
  if (static_cast<int>(chain.size()) != op) {
    throw InvalidConfig("instance: chain length != op");
  }
  std::unordered_set<std::string> names{start_param};
  for (const ChainLink& link : chain) {
    if (!names.insert(link.name).second) {
      throw InvalidConfig("instance: duplicate parameter name '" + link.name + "'");
    }
  }
  for (const Distractor& d : distractors) {
    if (!names.insert(d.name).second) {
      throw InvalidConfig("instance: duplicate parameter name '" + d.name + "'");
    }
  }
  const int n = statement_count();
  if (static_cast<int>(sentence_order.size()) != n) {
    throw InvalidConfig("instance: sentence_order length != statement count");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int idx : sentence_order) {
    if (idx < 0 || idx >= n || seen[static_cast<std::size_t>(idx)]) {
      throw InvalidConfig("instance: sentence_order is not a permutation");
    }
    seen[static_cast<std::size_t>(idx)] = true;
  }
}

namespace {

OpStep sample_step(const GenConfig& config, SplitMix64& rng) {
  OpStep step;
  switch (rng.bounded(3)) {
    case 0: step.kind = OpKind::Add; break;
    case 1: step.kind = OpKind::Sub; break;
    default: step.kind = OpKind::Mul; break;
  }
  if (step.kind == OpKind::Mul) {
    step.constant = rng.range(config.mul_min, config.mul_max);
  } else {
    step.constant = rng.range(config.add_min, config.add_max);
  }
  return step;
}

// Distinct vocabulary indices, drawn one at a time with redraw on collision.
std::vector<int> sample_names(int count, std::size_t vocab_size, SplitMix64& rng,
                              std::unordered_set<int>& taken) {
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    for (;;) {
      const int idx = static_cast<int>(rng.bounded(vocab_size));
      if (taken.insert(idx).second) {
        picked.push_back(idx);
        break;
      }
    }
  }
  return picked;
}

}  // namespace

ProblemInstance generate_problem(const GenConfig& config, std::uint64_t seed,
                                 std::unordered_set<int>& taken) {
  if (config.op < 2) throw InvalidConfig("generate_problem: op must be >= 2");
  if (config.init_min < 1 || config.init_min > config.init_max || config.init_max > kModulus - 1 ||
      config.add_min < 1 || config.add_min > config.add_max ||
      config.mul_min < 2 || config.mul_min > config.mul_max) {
    throw InvalidConfig("generate_problem: bad constant ranges");
  }

  const Vocabulary& vocab = config.vocab();
  const int vocab_left = static_cast<int>(vocab.size()) - static_cast<int>(taken.size());

  SplitMix64 init_rng(derive_seed(seed, Stream::InitValue));
  SplitMix64 ops_rng(derive_seed(seed, Stream::Operations));
  SplitMix64 names_rng(derive_seed(seed, Stream::Names));
  SplitMix64 dcount_rng(derive_seed(seed, Stream::DistractorCount));
  SplitMix64 dvalue_rng(derive_seed(seed, Stream::DistractorValues));
  SplitMix64 perm_rng(derive_seed(seed, Stream::Permutation));

  ProblemInstance p;
  p.seed = seed;
  p.op = config.op;
  p.initial_value = Residue::from_int(init_rng.range(config.init_min, config.init_max));

  std::vector<OpStep> steps;
  steps.reserve(static_cast<std::size_t>(config.op));
  for (int i = 0; i < config.op; ++i) steps.push_back(sample_step(config, ops_rng));

  const int name_room = vocab_left - (config.op + 1);
  const int max_d = std::min({config.op - 1, config.max_distractors, name_room});
  if (max_d < 1) {
    throw VocabularyExhausted("generate_problem: vocabulary '" + vocab.version() +
                              "' cannot name op=" + std::to_string(config.op) +
                              " chain plus at least one distractor");
  }
  const int n_distractors = dcount_rng.range(1, max_d);

  std::vector<Residue> d_values;
  d_values.reserve(static_cast<std::size_t>(n_distractors));
  for (int i = 0; i < n_distractors; ++i) {
    d_values.push_back(Residue::from_int(dvalue_rng.range(config.init_min, config.init_max)));
  }

  const std::vector<int> name_idx =
      sample_names(config.op + 1 + n_distractors, vocab.size(), names_rng, taken);
  p.start_param = vocab.at(static_cast<std::size_t>(name_idx[0]));
  p.chain.reserve(static_cast<std::size_t>(config.op));
  for (int i = 0; i < config.op; ++i) {
    p.chain.push_back({vocab.at(static_cast<std::size_t>(name_idx[static_cast<std::size_t>(i) + 1])),
                       steps[static_cast<std::size_t>(i)]});
  }
  p.distractors.reserve(static_cast<std::size_t>(n_distractors));
  for (int i = 0; i < n_distractors; ++i) {
    p.distractors.push_back(
        {vocab.at(static_cast<std::size_t>(name_idx[static_cast<std::size_t>(config.op) + 1 +
                                                    static_cast<std::size_t>(i)])),
         d_values[static_cast<std::size_t>(i)]});
  }

  p.sentence_order = random_permutation(p.statement_count(), perm_rng);
  return p;
}

ProblemInstance generate_problem(const GenConfig& config, std::uint64_t seed) {
  std::unordered_set<int> taken;
  return generate_problem(config, seed, taken);
}

std::string render_question(const ProblemInstance& p) {
  std::string out;
  out.reserve(64 * static_cast<std::size_t>(p.statement_count()) + 48);
  for (int pos = 0; pos < p.statement_count(); ++pos) {
    const int idx = p.sentence_order[static_cast<std::size_t>(pos)];
    if (pos > 0) out += ' ';
    out += "The number of ";
    if (idx == 0) {
      out += p.start_param;
      out += " equals ";
      out += std::to_string(p.initial_value.value());
    } else if (idx <= p.op) {
      const ChainLink& link = p.chain[static_cast<std::size_t>(idx) - 1];
      const std::string& prev =
          idx == 1 ? p.start_param : p.chain[static_cast<std::size_t>(idx) - 2].name;
      out += link.name;
      out += " equals the number of ";
      out += prev;
      out += ' ';
      out += op_word(link.step.kind);
      out += ' ';
      out += std::to_string(link.step.constant);
    } else {
      const Distractor& d = p.distractors[static_cast<std::size_t>(idx - p.op - 1)];
      out += d.name;
      out += " equals ";
      out += std::to_string(d.value.value());
    }
    out += '.';
  }
  out += " What is the number of ";
  out += p.target_param();
  out += '?';
  return out;
}

OracleSolution solve(const ProblemInstance& p) {
  OracleSolution sol;
  const std::vector<OpStep> steps = p.steps();
  const std::vector<Residue> values = eval_chain(p.initial_value, steps);
  sol.values.reserve(values.size());
  sol.values.emplace_back(p.start_param, values[0]);
  for (std::size_t i = 0; i < p.chain.size(); ++i) {
    sol.values.emplace_back(p.chain[i].name, values[i + 1]);
  }
  sol.answer = values.back();
  return sol;
}

std::string canonical_hash(const ProblemInstance& p) {
  return sha256_hex(render_question(p));
}

}  // namespace modchain
