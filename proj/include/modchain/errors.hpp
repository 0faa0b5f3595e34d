#pragma once

#include <stdexcept>

namespace modchain {

struct InvalidConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidSpec : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VocabularyExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GranularityMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPowerOfTwo : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownTemplate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DuplicateId : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace modchain
