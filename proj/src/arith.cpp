#include "modchain/arith.hpp"

#include <cassert>
#include <stdexcept>

namespace modchain {

char op_symbol(OpKind kind) {
  switch (kind) {
    case OpKind::Add: return '+';
    case OpKind::Sub: return '-';
    case OpKind::Mul: return '*';
  }
  throw std::logic_error("bad OpKind");
}

std::string_view op_word(OpKind kind) {
  switch (kind) {
    case OpKind::Add: return "plus";
    case OpKind::Sub: return "minus";
    case OpKind::Mul: return "times";
  }
  throw std::logic_error("bad OpKind");
}

Residue apply_op(Residue x, const OpStep& step) {
  const Residue c = Residue::from_int(step.constant);
  switch (step.kind) {
    case OpKind::Add: return x + c;
    case OpKind::Sub: return x - c;
    case OpKind::Mul: return x * c;
  }
  throw std::logic_error("bad OpKind");
}

std::vector<Residue> eval_chain(Residue v0, std::span<const OpStep> steps) {
  std::vector<Residue> values;
  values.reserve(steps.size() + 1);
  values.push_back(v0);
  for (const OpStep& step : steps) {
    values.push_back(apply_op(values.back(), step));
  }
  return values;
}

AffineMap affine_of(const OpStep& step) {
  const Residue c = Residue::from_int(step.constant);
  switch (step.kind) {
    case OpKind::Add: return {Residue::from_int(1), c};
    case OpKind::Sub: return {Residue::from_int(1), Residue() - c};
    case OpKind::Mul: return {c, Residue()};
  }
  throw std::logic_error("bad OpKind");
}

AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
  return {outer.coeff * inner.coeff, outer.coeff * inner.offset + outer.offset};
}

std::string coeff_prefix(Residue coeff) {
  assert(coeff.value() != 0);
  return coeff.value() == 1 ? std::string() : std::to_string(coeff.value());
}

std::string offset_suffix(Residue offset) {
  const int b = offset.value();
  if (b == 0) return {};
  if (b <= kModulus / 2) return " + " + std::to_string(b);
  return " - " + std::to_string(kModulus - b);
}

std::string render_affine(const AffineMap& f, std::string_view var_name) {
  std::string out = coeff_prefix(f.coeff);
  out += var_name;
  out += offset_suffix(f.offset);
  return out;
}

}  // namespace modchain
