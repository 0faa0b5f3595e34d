#include <doctest.h>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>

#include "modchain/digest.hpp"
#include "modchain/errors.hpp"
#include "modchain/problem.hpp"
#include "modchain/rng.hpp"
#include "support/question_parser.hpp"

using namespace modchain;

TEST_CASE("builtin vocabulary is pinned") {
  const Vocabulary& v = builtin_vocabulary();
  CHECK(v.size() == 200);
  CHECK(v.version() == "builtin-v1");
  std::set<std::string> distinct(v.names().begin(), v.names().end());
  CHECK(distinct.size() == 200);
  for (const char* needed :
       {"hats", "chairs", "harps", "blocks", "nautiluses", "scarves", "celery", "boots",
        "spruces", "whelks", "batons", "maples", "onions", "opals", "needles", "cats",
        "violets", "flutes", "markers", "aspens", "wolves", "tokens"}) {
    CHECK(distinct.contains(needed));
  }
}

TEST_CASE("vocabulary file validation") {
  const auto dir = std::filesystem::temp_directory_path() / "modchain_vocab_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "ok.txt");
    out << "apples\nbears\n\ncoves\n";
  }
  const Vocabulary ok = load_vocabulary(dir / "ok.txt");
  CHECK(ok.size() == 3);
  CHECK(ok.version().starts_with("file-"));
  {
    std::ofstream out(dir / "dup.txt");
    out << "apples\nbears\napples\n";
  }
  CHECK_THROWS_AS(load_vocabulary(dir / "dup.txt"), InvalidConfig);
  {
    std::ofstream out(dir / "space.txt");
    out << "apples\nbig bears\n";
  }
  CHECK_THROWS_AS(load_vocabulary(dir / "space.txt"), InvalidConfig);
  CHECK_THROWS_AS(load_vocabulary(dir / "missing.txt"), InvalidConfig);
}

TEST_CASE("generate_problem structure and ranges") {
  GenConfig config;
  config.op = 8;
  SplitMix64 seeds(42);
  for (int i = 0; i < 200; ++i) {
    const ProblemInstance p = generate_problem(config, seeds.next());
    p.validate();
    CHECK(p.op == 8);
    CHECK(p.chain.size() == 8);
    CHECK(p.distractors.size() >= 1);
    CHECK(p.distractors.size() <= 7);
    CHECK(p.initial_value.value() >= 1);
    CHECK(p.initial_value.value() <= 4);
    for (const ChainLink& link : p.chain) {
      if (link.step.kind == OpKind::Mul) {
        CHECK(link.step.constant >= 2);
        CHECK(link.step.constant <= 4);
      } else {
        CHECK(link.step.constant >= 1);
        CHECK(link.step.constant <= 4);
      }
    }
    for (const Distractor& d : p.distractors) {
      CHECK(d.value.value() >= 1);
      CHECK(d.value.value() <= 4);
    }
    // one sentence per statement plus the final question
    const std::string text = render_question(p);
    long long sentences = 0;
    for (char c : text) sentences += c == '.' ? 1 : 0;
    CHECK(sentences == p.statement_count());
    CHECK(text.back() == '?');
  }
}

TEST_CASE("generation is deterministic") {
  GenConfig config;
  config.op = 8;
  const ProblemInstance a = generate_problem(config, 12345);
  const ProblemInstance b = generate_problem(config, 12345);
  CHECK(render_question(a) == render_question(b));
  CHECK(canonical_hash(a) == canonical_hash(b));
  const ProblemInstance c = generate_problem(config, 12346);
  CHECK(render_question(a) != render_question(c));
}

TEST_CASE("distractor count covers the full range at op=8") {
  GenConfig config;
  config.op = 8;
  std::set<std::size_t> seen;
  SplitMix64 seeds(7);
  for (int i = 0; i < 10000; ++i) {
    seen.insert(generate_problem(config, seeds.next()).distractors.size());
  }
  CHECK(seen == std::set<std::size_t>{1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("generation preconditions") {
  GenConfig config;
  config.op = 1;
  CHECK_THROWS_AS(generate_problem(config, 1), InvalidConfig);
  config.op = 199;  // needs 200 names for the chain alone
  CHECK_THROWS_AS(generate_problem(config, 1), VocabularyExhausted);
  config.op = 150;  // 151 chain names leave room for distractors
  CHECK_NOTHROW(generate_problem(config, 1));
}

TEST_CASE("question parser oracle recovers the chain") {
  GenConfig config;
  SplitMix64 seeds(99);
  for (int i = 0; i < 200; ++i) {
    config.op = 2 + static_cast<int>(seeds.bounded(20));
    const ProblemInstance p = generate_problem(config, seeds.next());
    const auto parsed = testing::parse_question(render_question(p));
    const auto chain = parsed.chain();

    CHECK(chain.start == p.start_param);
    CHECK(chain.start_value == p.initial_value.value());
    REQUIRE(chain.links.size() == p.chain.size());
    for (std::size_t k = 0; k < chain.links.size(); ++k) {
      CHECK(chain.links[k].first == p.chain[k].name);
      CHECK(chain.links[k].second == p.chain[k].step);
    }
    CHECK(parsed.target == p.target_param());

    // Distractors never feed a dependency.
    std::unordered_set<std::string> sources;
    for (const auto& d : parsed.dependencies) sources.insert(d.source);
    for (const Distractor& d : p.distractors) CHECK(!sources.contains(d.name));
  }
}

TEST_CASE("renaming leaves the oracle answer unchanged") {
  GenConfig config;
  config.op = 12;
  SplitMix64 seeds(5);
  for (int i = 0; i < 50; ++i) {
    ProblemInstance p = generate_problem(config, seeds.next());
    const Residue before = solve(p).answer;
    p.start_param += "qq";
    for (ChainLink& link : p.chain) link.name += "qq";
    for (Distractor& d : p.distractors) d.name += "qq";
    p.validate();
    CHECK(solve(p).answer == before);
  }
}

TEST_CASE("permutation changes the digest but not the answer") {
  GenConfig config;
  config.op = 8;
  ProblemInstance p = generate_problem(config, 777);
  const std::string digest = canonical_hash(p);
  const Residue answer = solve(p).answer;
  std::swap(p.sentence_order[0], p.sentence_order[1]);
  p.validate();
  CHECK(canonical_hash(p) != digest);
  CHECK(solve(p).answer == answer);
}

TEST_CASE("answers stay uniform-ish over many seeds") {
  GenConfig config;
  config.op = 8;
  std::array<long long, kModulus> bins{};
  const long long n = 100000;
  SplitMix64 seeds(0xd157);
  for (long long i = 0; i < n; ++i) {
    bins[static_cast<std::size_t>(solve(generate_problem(config, seeds.next())).answer.value())]++;
  }
  const double expected = static_cast<double>(n) / kModulus;
  double chi2 = 0.0;
  long long lo = n, hi = 0;
  for (long long b : bins) {
    chi2 += (b - expected) * (b - expected) / expected;
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  // 22 degrees of freedom; > 100 would be a broken generator, not bad luck.
  CHECK(chi2 < 100.0);
  CHECK(static_cast<double>(hi) / static_cast<double>(lo) < 1.2);
}

TEST_CASE("digest collisions are absent over 100k instances at op=8") {
  GenConfig config;
  config.op = 8;
  std::unordered_set<std::string> digests;
  digests.reserve(200000);
  const long long n = 100000;
  SplitMix64 seeds(0xc0111de);
  long long duplicates = 0;
  for (long long i = 0; i < n; ++i) {
    if (!digests.insert(canonical_hash(generate_problem(config, seeds.next()))).second) {
      ++duplicates;
    }
  }
  CHECK(duplicates == 0);
}

TEST_CASE("sha256 known vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
