#include "modchain/trace.hpp"

#include <algorithm>
#include <stdexcept>

#include "modchain/errors.hpp"

namespace modchain {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::string step_expr(const std::string& operand, const OpStep& step) {
  std::string out = operand;
  out += ' ';
  out += op_symbol(step.kind);
  out += ' ';
  out += std::to_string(step.constant);
  return out;
}

std::string define_head(const std::string& param, const std::string& label) {
  return "Define " + param + " as " + label + "; so ";
}

std::string num(Residue r) { return std::to_string(r.value()); }

// "12(QO * 4) - 11": frontier map applied to a parenthesized step expression.
std::string subst_through_step(const AffineMap& frontier, const OpStep& step,
                               const std::string& inner_label) {
  return coeff_prefix(frontier.coeff) + "(" + step_expr(inner_label, step) + ")" +
         offset_suffix(frontier.offset);
}

// "6(1) - 11": frontier map applied to a parenthesized numeric value.
std::string subst_numeric(const AffineMap& frontier, Residue v) {
  return coeff_prefix(frontier.coeff) + "(" + num(v) + ")" + offset_suffix(frontier.offset);
}

// "2 * 12 - 1": hierarchical combination style of plugging a number in.
std::string subst_numeric_product(const AffineMap& f, Residue v) {
  std::string out;
  if (f.coeff.value() != 1) {
    out += std::to_string(f.coeff.value());
    out += " * ";
  }
  out += num(v);
  out += offset_suffix(f.offset);
  return out;
}

// Map rendering followed by one more step, e.g. (2BP - 1 applied through
// "* 3") -> "(2BP - 1) * 3". Maps with an offset get parenthesized; pure
// products read correctly without.
std::string extend_rendered(const AffineMap& f, const OpStep& step, const std::string& var) {
  std::string inner = render_affine(f, var);
  if (f.offset.value() != 0) inner = "(" + inner + ")";
  return step_expr(inner, step);
}

void require_labels(const ProblemInstance& p, const LabelMap& labels) {
  if (labels.size() != static_cast<std::size_t>(p.op) + 1) {
    throw InvalidSpec("label map size must be op + 1");
  }
}

}  // namespace

void CotSpec::validate(int op) const {
  if (op < 1) throw InvalidSpec("op must be >= 1");
  if (g < 1) throw InvalidSpec("granularity must be >= 1");
  if (kind == CotKind::Explicit && g != 1) {
    throw InvalidSpec("explicit traces have granularity 1");
  }
  if (order != CotOrder::Forward) {
    if (kind != CotKind::Explicit) {
      throw InvalidSpec("backward and hierarchical orders use explicit stepping");
    }
    if (order == CotOrder::Hierarchical) {
      if (!is_power_of_two(op)) throw NotPowerOfTwo("hierarchical order needs op to be a power of two");
      if (chunk < 1 || op % chunk != 0) {
        throw GranularityMismatch("chunk size " + std::to_string(chunk) +
                                  " does not divide op " + std::to_string(op));
      }
    }
  } else if (kind != CotKind::Explicit && op % g != 0) {
    throw GranularityMismatch("granularity " + std::to_string(g) + " does not divide op " +
                              std::to_string(op));
  }
}

std::string to_string(CotKind kind) {
  switch (kind) {
    case CotKind::Explicit: return "explicit";
    case CotKind::Composed: return "composed";
    case CotKind::Implicit: return "implicit";
  }
  throw std::logic_error("bad CotKind");
}

std::string to_string(CotOrder order) {
  switch (order) {
    case CotOrder::Forward: return "forward";
    case CotOrder::Backward: return "backward";
    case CotOrder::Hierarchical: return "hierarchical";
  }
  throw std::logic_error("bad CotOrder");
}

CotKind cot_kind_from_string(const std::string& s) {
  if (s == "explicit") return CotKind::Explicit;
  if (s == "composed") return CotKind::Composed;
  if (s == "implicit") return CotKind::Implicit;
  throw InvalidSpec("unknown cot kind: " + s);
}

CotOrder cot_order_from_string(const std::string& s) {
  if (s == "forward") return CotOrder::Forward;
  if (s == "backward") return CotOrder::Backward;
  if (s == "hierarchical") return CotOrder::Hierarchical;
  throw InvalidSpec("unknown cot order: " + s);
}

LabelMap allocate_labels(int op, SplitMix64& rng) {
  LabelMap labels;
  labels.reserve(static_cast<std::size_t>(op) + 1);
  std::vector<bool> used(26 * 26, false);
  if (op + 1 > 26 * 26) throw InvalidSpec("more chain positions than two-letter labels");
  for (int i = 0; i <= op; ++i) {
    for (;;) {
      const int idx = static_cast<int>(rng.bounded(26 * 26));
      if (used[static_cast<std::size_t>(idx)]) continue;
      used[static_cast<std::size_t>(idx)] = true;
      std::string label;
      label += static_cast<char>('A' + idx / 26);
      label += static_cast<char>('A' + idx % 26);
      labels.push_back(std::move(label));
      break;
    }
  }
  return labels;
}

std::string Trace::text() const {
  std::string out;
  for (const std::string& clause : clauses) {
    out += clause;
    out += ' ';
  }
  out += answer_line;
  return out;
}

std::string render_seq_expr(const std::string& initial, std::span<const OpStep> steps) {
  std::string acc = initial;
  bool has_additive = false;
  for (const OpStep& s : steps) {
    if (s.kind == OpKind::Mul && has_additive) {
      acc = "(" + acc + ")";
      has_additive = false;
    }
    acc += ' ';
    acc += op_symbol(s.kind);
    acc += ' ';
    acc += std::to_string(s.constant);
    if (s.kind != OpKind::Mul) has_additive = true;
  }
  return acc;
}

Trace emit_explicit(const ProblemInstance& p, const LabelMap& labels) {
  require_labels(p, labels);
  const std::vector<OpStep> steps = p.steps();
  const std::vector<Residue> values = eval_chain(p.initial_value, steps);

  Trace t;
  t.labels = labels;
  t.clauses.push_back(define_head(p.start_param, labels[0]) + labels[0] + " = " + num(values[0]) +
                      ".");
  for (int i = 1; i <= p.op; ++i) {
    const OpStep& step = steps[static_cast<std::size_t>(i) - 1];
    std::string body = labels[static_cast<std::size_t>(i)] + " = " +
                       step_expr(labels[static_cast<std::size_t>(i) - 1], step) + " = " +
                       step_expr(num(values[static_cast<std::size_t>(i) - 1]), step) + " = " +
                       num(values[static_cast<std::size_t>(i)]);
    t.clauses.push_back(define_head(p.chain[static_cast<std::size_t>(i) - 1].name,
                                    labels[static_cast<std::size_t>(i)]) +
                        body + ".");
  }
  t.answer_line = "Answer: " + num(values.back()) + ".";
  return t;
}

Trace emit_composed(const ProblemInstance& p, int g, const LabelMap& labels) {
  require_labels(p, labels);
  CotSpec{CotKind::Composed, g, CotOrder::Forward}.validate(p.op);
  const std::vector<OpStep> steps = p.steps();
  const std::vector<Residue> values = eval_chain(p.initial_value, steps);

  Trace t;
  t.labels = labels;
  t.clauses.push_back(define_head(p.start_param, labels[0]) + labels[0] + " = " + num(values[0]) +
                      ".");
  for (int end = g; end <= p.op; end += g) {
    const int begin = end - g;
    const std::span<const OpStep> chunk(steps.data() + begin, static_cast<std::size_t>(g));
    const std::string symbolic = render_seq_expr(labels[static_cast<std::size_t>(begin)], chunk);
    const std::string numeric = render_seq_expr(num(values[static_cast<std::size_t>(begin)]), chunk);
    std::string body = labels[static_cast<std::size_t>(end)] + " = " + symbolic + " = " + numeric +
                       " = " + num(values[static_cast<std::size_t>(end)]);
    t.clauses.push_back(define_head(p.chain[static_cast<std::size_t>(end) - 1].name,
                                    labels[static_cast<std::size_t>(end)]) +
                        body + ".");
  }
  t.answer_line = "Answer: " + num(values.back()) + ".";
  return t;
}

Trace emit_implicit(const ProblemInstance& p, int g, const LabelMap& labels) {
  require_labels(p, labels);
  CotSpec{CotKind::Implicit, g, CotOrder::Forward}.validate(p.op);
  const std::vector<OpStep> steps = p.steps();
  const std::vector<Residue> values = eval_chain(p.initial_value, steps);

  Trace t;
  t.labels = labels;
  t.clauses.push_back(define_head(p.start_param, labels[0]) + labels[0] + " = " + num(values[0]) +
                      ".");
  for (int end = g; end <= p.op; end += g) {
    // Only the chunk's final operation is shown; its left operand is the
    // hidden intermediate value.
    const OpStep& last = steps[static_cast<std::size_t>(end) - 1];
    std::string body = labels[static_cast<std::size_t>(end)] + " = " +
                       step_expr(num(values[static_cast<std::size_t>(end) - 1]), last) + " = " +
                       num(values[static_cast<std::size_t>(end)]);
    t.clauses.push_back(define_head(p.chain[static_cast<std::size_t>(end) - 1].name,
                                    labels[static_cast<std::size_t>(end)]) +
                        body + ".");
  }
  t.answer_line = "Answer: " + num(values.back()) + ".";
  return t;
}

Trace emit_backward(const ProblemInstance& p, const LabelMap& labels) {
  require_labels(p, labels);
  const std::vector<OpStep> steps = p.steps();
  const std::vector<Residue> values = eval_chain(p.initial_value, steps);
  const int op = p.op;

  Trace t;
  t.labels = labels;
  t.clauses.push_back(define_head(p.start_param, labels[0]) + labels[0] + " = " + num(values[0]) +
                      ".");

  const std::string& target = labels[static_cast<std::size_t>(op)];
  AffineMap frontier = affine_of(steps[static_cast<std::size_t>(op) - 1]);

  if (op == 1) {
    std::string body = target + " = " + render_affine(frontier, labels[0]) + " = " +
                       subst_numeric(frontier, values[0]) + " = " + num(values.back());
    t.clauses.push_back(define_head(p.chain[0].name, target) + body + ".");
    t.answer_line = "Answer: " + num(values.back()) + ".";
    return t;
  }

  t.clauses.push_back(define_head(p.chain[static_cast<std::size_t>(op) - 1].name, target) + target +
                      " = " + render_affine(frontier, labels[static_cast<std::size_t>(op) - 1]) +
                      ".");

  // Walk target -> start, substituting each parameter's defining step into
  // the frontier map.
  for (int k = op - 1; k >= 1; --k) {
    const OpStep& step = steps[static_cast<std::size_t>(k) - 1];
    const AffineMap next = compose(frontier, affine_of(step));
    std::string body = target + " = " +
                       render_affine(frontier, labels[static_cast<std::size_t>(k)]) + " = " +
                       subst_through_step(frontier, step, labels[static_cast<std::size_t>(k) - 1]) +
                       " = " + render_affine(next, labels[static_cast<std::size_t>(k) - 1]);
    if (k == 1) {
      body += " = " + subst_numeric(next, values[0]) + " = " + num(values.back());
    }
    t.clauses.push_back(define_head(p.chain[static_cast<std::size_t>(k) - 1].name,
                                    labels[static_cast<std::size_t>(k)]) +
                        body + ".");
    frontier = next;
  }
  t.answer_line = "Answer: " + num(values.back()) + ".";
  return t;
}

Trace emit_hierarchical(const ProblemInstance& p, int chunk_size, const LabelMap& labels) {
  require_labels(p, labels);
  CotSpec spec{CotKind::Explicit, 1, CotOrder::Hierarchical, chunk_size};
  spec.validate(p.op);
  const std::vector<OpStep> steps = p.steps();
  const std::vector<Residue> values = eval_chain(p.initial_value, steps);
  const int n_chunks = p.op / chunk_size;

  Trace t;
  t.labels = labels;
  t.clauses.push_back(define_head(p.start_param, labels[0]) + labels[0] + " = " + num(values[0]) +
                      ".");

  struct Node {
    int end_pos;
    bool numeric;
    Residue value;    // when numeric
    AffineMap affine; // otherwise, in terms of labels[entry_pos]
    int entry_pos;
  };
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(n_chunks));

  for (int j = 1; j <= n_chunks; ++j) {
    const int first = (j - 1) * chunk_size + 1;
    const int last = j * chunk_size;
    if (j == 1) {
      // The leading chunk is evaluated numerically as it goes.
      for (int k = first; k <= last; ++k) {
        const OpStep& step = steps[static_cast<std::size_t>(k) - 1];
        std::string body = labels[static_cast<std::size_t>(k)] + " = ";
        if (k == 1) {
          body += step_expr(num(values[0]), step);
        } else {
          body += step_expr(labels[static_cast<std::size_t>(k) - 1], step) + " = " +
                  step_expr(num(values[static_cast<std::size_t>(k) - 1]), step);
        }
        body += " = " + num(values[static_cast<std::size_t>(k)]);
        t.clauses.push_back(define_head(p.chain[static_cast<std::size_t>(k) - 1].name,
                                        labels[static_cast<std::size_t>(k)]) +
                            body + ".");
      }
      nodes.push_back({last, true, values[static_cast<std::size_t>(last)], AffineMap{}, 0});
      continue;
    }
    // Later chunks stay symbolic in their entry variable.
    const int entry = first - 1;
    AffineMap acc;
    for (int k = first; k <= last; ++k) {
      const OpStep& step = steps[static_cast<std::size_t>(k) - 1];
      const std::string step_str = step_expr(labels[static_cast<std::size_t>(k) - 1], step);
      std::string body = labels[static_cast<std::size_t>(k)] + " = " + step_str;
      std::string shown = step_str;
      if (k == first) {
        acc = affine_of(step);
      } else {
        shown = extend_rendered(acc, step, labels[static_cast<std::size_t>(entry)]);
        body += " = " + shown;
        acc = compose(affine_of(step), acc);
      }
      const std::string simplified = render_affine(acc, labels[static_cast<std::size_t>(entry)]);
      if (simplified != shown) body += " = " + simplified;
      t.clauses.push_back(define_head(p.chain[static_cast<std::size_t>(k) - 1].name,
                                      labels[static_cast<std::size_t>(k)]) +
                          body + ".");
    }
    nodes.push_back({last, false, Residue{}, acc, entry});
  }

  // Combine chunk results pairwise up the binary tree, left to right. The
  // leftmost node of each level is numeric, so its pair resolves to a number;
  // every other pair composes into a map over the left node's entry variable.
  while (nodes.size() > 1) {
    std::vector<Node> next;
    next.reserve(nodes.size() / 2);
    for (std::size_t i = 0; i + 1 < nodes.size(); i += 2) {
      const Node& left = nodes[i];
      const Node& right = nodes[i + 1];
      const std::string head =
          labels[static_cast<std::size_t>(right.end_pos)] + " = " +
          render_affine(right.affine, labels[static_cast<std::size_t>(left.end_pos)]);
      if (left.numeric) {
        const Residue value = right.affine.apply(left.value);
        t.clauses.push_back(head + " = " + subst_numeric_product(right.affine, left.value) + " = " +
                            num(value) + ".");
        next.push_back({right.end_pos, true, value, AffineMap{}, 0});
      } else {
        const AffineMap merged = compose(right.affine, left.affine);
        t.clauses.push_back(
            head + " = " +
            render_affine(merged, labels[static_cast<std::size_t>(left.entry_pos)]) + ".");
        next.push_back({right.end_pos, false, Residue{}, merged, left.entry_pos});
      }
    }
    nodes = std::move(next);
  }

  t.answer_line = "Answer: " + num(values.back()) + ".";
  return t;
}

Trace emit_trace(const ProblemInstance& p, const CotSpec& spec, SplitMix64& label_rng) {
  spec.validate(p.op);
  const LabelMap labels = allocate_labels(p.op, label_rng);
  if (spec.order == CotOrder::Backward) return emit_backward(p, labels);
  if (spec.order == CotOrder::Hierarchical) return emit_hierarchical(p, spec.chunk, labels);
  switch (spec.kind) {
    case CotKind::Explicit: return emit_explicit(p, labels);
    case CotKind::Composed: return emit_composed(p, spec.g, labels);
    case CotKind::Implicit: return emit_implicit(p, spec.g, labels);
  }
  throw std::logic_error("bad CotKind");
}

}  // namespace modchain
