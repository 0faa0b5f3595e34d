#include "modchain/verify.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace modchain {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// "-123" or "45"; rejects anything else (including overflow-long digits).
std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  bool neg = false;
  if (s.front() == '-') {
    neg = true;
    s.remove_prefix(1);
  }
  if (s.empty() || s.size() > 18) return std::nullopt;
  long long v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return neg ? -v : v;
}

// ---- expression evaluation -------------------------------------------------

struct ExprParser {
  std::string_view text;
  std::size_t pos = 0;
  const VarLookup& lookup;
  bool failed = false;

  void skip_ws() {
    while (pos < text.size() && is_space(text[pos])) ++pos;
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  Residue fail() {
    failed = true;
    return {};
  }

  Residue parse_number() {
    long long v = 0;
    std::size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (++digits > 18) return fail();
      v = v * 10 + (text[pos] - '0');
      ++pos;
    }
    return Residue::from_int(v);
  }

  Residue parse_name() {
    const std::size_t start = pos;
    while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
    const auto value = lookup(text.substr(start, pos - start));
    if (!value) return fail();
    return *value;
  }

  Residue parse_factor() {
    const char c = peek();
    if (c == '(') {
      ++pos;
      const Residue inner = parse_expr();
      if (failed || peek() != ')') return fail();
      ++pos;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      Residue value = parse_number();
      // Juxtaposition: "6PE" and "6(1)" are products.
      if (pos < text.size() &&
          (std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '(')) {
        if (text[pos] == '(') {
          ++pos;
          const Residue inner = parse_expr();
          if (failed || peek() != ')') return fail();
          ++pos;
          return value * inner;
        }
        return value * parse_name();
      }
      return value;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    return fail();
  }

  Residue parse_term() {
    Residue value = parse_factor();
    while (!failed && peek() == '*') {
      ++pos;
      value = value * parse_factor();
    }
    return value;
  }

  Residue parse_expr() {
    Residue value = parse_term();
    while (!failed) {
      const char c = peek();
      if (c == '+') {
        ++pos;
        value = value + parse_term();
      } else if (c == '-') {
        ++pos;
        value = value - parse_term();
      } else {
        break;
      }
    }
    return value;
  }
};

// ---- clause model ------------------------------------------------------------

struct DefineHeader {
  std::string_view param;
  std::string_view label;
  std::string_view body;  // after "; so "
};

bool is_label_token(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

// "Define <param> as <label>; so <body>" -> header; nullopt when the sentence
// does not follow the template.
std::optional<DefineHeader> parse_define(std::string_view sentence) {
  constexpr std::string_view kDefine = "Define ";
  constexpr std::string_view kAs = " as ";
  if (!sentence.starts_with(kDefine)) return std::nullopt;
  const std::size_t as_pos = sentence.find(kAs, kDefine.size());
  if (as_pos == std::string_view::npos) return std::nullopt;
  DefineHeader h;
  h.param = trim(sentence.substr(kDefine.size(), as_pos - kDefine.size()));
  std::string_view rest = sentence.substr(as_pos + kAs.size());
  const std::size_t semi = rest.find(';');
  if (semi == std::string_view::npos) {
    h.label = trim(rest);
    h.body = {};
  } else {
    h.label = trim(rest.substr(0, semi));
    std::string_view body = trim(rest.substr(semi + 1));
    if (body.starts_with("so ")) body.remove_prefix(3);
    h.body = trim(body);
  }
  if (h.param.empty() || !is_label_token(h.label)) return std::nullopt;
  return h;
}

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '.') {
      const std::string_view s = trim(text.substr(begin, i - begin));
      if (!s.empty()) out.push_back(s);
      begin = i + 1;
    }
  }
  return out;
}

std::vector<std::string_view> split_on_equals(std::string_view body) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || body[i] == '=') {
      out.push_back(trim(body.substr(begin, i - begin)));
      begin = i + 1;
    }
  }
  return out;
}

struct OracleIndex {
  // param -> value, for start + chain + distractors
  std::unordered_map<std::string, Residue> values;
  // param -> chain position (start = 0); distractors have no position
  std::unordered_map<std::string, int> positions;
  Residue answer;
};

OracleIndex build_oracle(const ProblemInstance& p) {
  OracleIndex idx;
  const OracleSolution sol = solve(p);
  for (std::size_t i = 0; i < sol.values.size(); ++i) {
    idx.values[sol.values[i].first] = sol.values[i].second;
    idx.positions[sol.values[i].first] = static_cast<int>(i);
  }
  for (const Distractor& d : p.distractors) idx.values[d.name] = d.value;
  idx.answer = sol.answer;
  return idx;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct: return "correct";
    case Verdict::WrongValue: return "wrong_value";
    case Verdict::UnknownParam: return "unknown_param";
    case Verdict::Malformed: return "malformed";
  }
  return "?";
}

std::optional<Residue> eval_expression(std::string_view expr, const VarLookup& lookup) {
  ExprParser parser{expr, 0, lookup};
  const Residue value = parser.parse_expr();
  parser.skip_ws();
  if (parser.failed || parser.pos != expr.size()) return std::nullopt;
  return value;
}

std::optional<int> extract_answer(std::string_view completion) {
  constexpr std::string_view kAnswer = "Answer:";
  std::optional<long long> last;
  std::size_t from = 0;
  for (;;) {
    const std::size_t at = completion.find(kAnswer, from);
    if (at == std::string_view::npos) break;
    from = at + kAnswer.size();
    std::size_t i = from;
    while (i < completion.size() && (completion[i] == ' ' || completion[i] == '\t')) ++i;
    std::size_t j = i;
    if (j < completion.size() && completion[j] == '-') ++j;
    const std::size_t digits_begin = j;
    while (j < completion.size() && std::isdigit(static_cast<unsigned char>(completion[j]))) ++j;
    if (j == digits_begin) continue;  // "Answer:" with no number is not a match
    if (const auto v = parse_int(completion.substr(i, j - i))) last = *v;
  }
  if (!last || *last < 0 || *last >= kModulus) return std::nullopt;
  return static_cast<int>(*last);
}

int score_against_key(Residue answer_key, std::string_view completion) {
  const auto extracted = extract_answer(completion);
  return extracted && *extracted == answer_key.value() ? 1 : 0;
}

int score(const ProblemInstance& p, std::string_view completion) {
  return score_against_key(solve(p).answer, completion);
}

TraceReport verify_trace(const ProblemInstance& p, std::string_view completion) {
  const OracleIndex oracle = build_oracle(p);
  const std::vector<std::string_view> sentences = split_sentences(completion);

  // Labels can be rebound mid-trace (RLVR outputs reuse them) and referenced
  // one clause before their definition (backward traces), so resolution picks
  // the nearest binding at or before the clause, falling back to the next one
  // after it.
  struct Binding {
    int at;
    std::string param;
  };
  std::unordered_map<std::string, std::vector<Binding>> bindings;
  std::vector<std::optional<DefineHeader>> headers(sentences.size());
  for (std::size_t t = 0; t < sentences.size(); ++t) {
    headers[t] = parse_define(sentences[t]);
    if (headers[t]) {
      bindings[std::string(headers[t]->label)].push_back(
          {static_cast<int>(t), std::string(headers[t]->param)});
    }
  }

  const auto resolve_name = [&](std::string_view name, int at) -> std::optional<std::string> {
    const auto it = bindings.find(std::string(name));
    if (it != bindings.end()) {
      const std::vector<Binding>& list = it->second;
      const Binding* best = nullptr;
      for (const Binding& b : list) {
        if (b.at <= at) best = &b;  // list is in clause order
      }
      if (!best) best = &list.front();
      return best->param;
    }
    // A bare parameter name used as its own variable.
    if (oracle.values.contains(std::string(name))) return std::string(name);
    return std::nullopt;
  };

  const auto value_lookup = [&](int at) {
    return [&, at](std::string_view name) -> std::optional<Residue> {
      const auto param = resolve_name(name, at);
      if (!param) return std::nullopt;
      const auto it = oracle.values.find(*param);
      if (it == oracle.values.end()) return std::nullopt;
      return it->second;
    };
  };

  TraceReport report;
  std::optional<int> prev_anchor;

  for (std::size_t t = 0; t < sentences.size(); ++t) {
    const std::string_view sentence = sentences[t];
    if (sentence.starts_with("Answer:")) continue;

    ClauseVerdict cv;
    cv.clause_index = static_cast<int>(report.clause_verdicts.size());

    const std::string_view body = headers[t] ? headers[t]->body : sentence;
    const std::vector<std::string_view> segments = split_on_equals(body);

    // Subject: the variable on the left of the equation chain, resolved to a
    // parameter; the Define header alone does not claim anything.
    std::optional<std::string> subject;
    if (segments.size() >= 2 && is_label_token(segments[0])) {
      subject = resolve_name(segments[0], static_cast<int>(t));
    }
    if (subject) cv.param = *subject;
    if (subject) {
      const auto it = oracle.values.find(*subject);
      if (it != oracle.values.end()) cv.oracle = it->second.value();
    }

    if (segments.size() < 2) {
      cv.verdict = Verdict::Malformed;
    } else if (const auto claimed = parse_int(segments.back())) {
      cv.claimed = static_cast<int>(*claimed);
      if (!subject || !oracle.positions.contains(*subject)) {
        cv.verdict = Verdict::UnknownParam;
      } else if (*claimed == oracle.values.at(*subject).value()) {
        cv.verdict = Verdict::Correct;
        const int pos = oracle.positions.at(*subject);
        if (!prev_anchor) {
          prev_anchor = pos;
        } else if (pos > *prev_anchor) {
          report.granularity_profile[pos - *prev_anchor] += 1;
          prev_anchor = pos;
        }
      } else {
        cv.verdict = Verdict::WrongValue;
      }
    } else {
      // Purely symbolic clause (backward / hierarchical intermediates): check
      // that every side evaluates to the same residue under oracle values.
      std::optional<Residue> common;
      bool malformed = false;
      bool mismatch = false;
      for (const std::string_view segment : segments) {
        const auto value = eval_expression(segment, value_lookup(static_cast<int>(t)));
        if (!value) {
          malformed = true;
          break;
        }
        if (common && !(*common == *value)) mismatch = true;
        common = *value;
      }
      cv.verdict = malformed    ? Verdict::Malformed
                   : mismatch   ? Verdict::WrongValue
                                : Verdict::Correct;
    }

    if (cv.verdict != Verdict::Correct && !report.first_error) {
      report.first_error = cv.clause_index;
    }
    report.clause_verdicts.push_back(std::move(cv));
  }

  report.extracted_answer = extract_answer(completion);
  report.reward =
      report.extracted_answer && *report.extracted_answer == oracle.answer.value() ? 1 : 0;
  return report;
}

std::map<int, long long> profile_histogram(std::span<const TraceReport> reports) {
  std::map<int, long long> hist;
  for (const TraceReport& r : reports) {
    for (const auto& [gap, count] : r.granularity_profile) hist[gap] += count;
  }
  return hist;
}

}  // namespace modchain
