#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modchain {

// All task arithmetic lives in the 23-element prime field.
inline constexpr int kModulus = 23;

// A canonical residue in [0, 22].
class Residue {
 public:
  constexpr Residue() = default;

  static constexpr Residue from_int(long long v) {
    long long r = v % kModulus;
    if (r < 0) r += kModulus;
    return Residue(static_cast<int>(r));
  }

  constexpr int value() const { return value_; }

  friend constexpr bool operator==(Residue, Residue) = default;
  friend constexpr Residue operator+(Residue a, Residue b) {
    return from_int(static_cast<long long>(a.value_) + b.value_);
  }
  friend constexpr Residue operator-(Residue a, Residue b) {
    return from_int(static_cast<long long>(a.value_) - b.value_);
  }
  friend constexpr Residue operator*(Residue a, Residue b) {
    return from_int(static_cast<long long>(a.value_) * b.value_);
  }

 private:
  explicit constexpr Residue(int v) : value_(v) {}
  int value_ = 0;
};

enum class OpKind { Add, Sub, Mul };

// One atomic chain operation: x -> x (+|-|*) constant.
struct OpStep {
  OpKind kind = OpKind::Add;
  int constant = 1;

  friend bool operator==(const OpStep&, const OpStep&) = default;
};

// "+", "-", "*" as used in reasoning traces.
char op_symbol(OpKind kind);
// "plus", "minus", "times" as used in question sentences.
std::string_view op_word(OpKind kind);

Residue apply_op(Residue x, const OpStep& step);

// Sequential evaluation; returns [s0, s1, ..., s_op] (length steps.size()+1).
std::vector<Residue> eval_chain(Residue v0, std::span<const OpStep> steps);

// x -> coeff*x + offset (mod 23). coeff is nonzero for any map built from
// chain steps (the modulus is prime, so products of nonzero stay nonzero).
struct AffineMap {
  Residue coeff = Residue::from_int(1);
  Residue offset;

  Residue apply(Residue x) const { return coeff * x + offset; }
  static AffineMap identity() { return {}; }

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

AffineMap affine_of(const OpStep& step);

// Map for x -> outer(inner(x)).
AffineMap compose(const AffineMap& outer, const AffineMap& inner);

// Display conventions shared by every symbolic emitter: coefficient 1 is
// omitted ("X", not "1X"); offsets 1..11 render as "+ b"; offsets 12..22
// render as the signed form "- (23-b)"; offset 0 is omitted.
std::string coeff_prefix(Residue coeff);
std::string offset_suffix(Residue offset);

// "aVAR +/- k" under the conventions above, e.g. (12, 12) over "BP" gives
// "12BP - 11" and the identity map gives just the variable name.
std::string render_affine(const AffineMap& f, std::string_view var_name);

}  // namespace modchain
