#pragma once

#include "stumpforge/domain.hpp"
#include "stumpforge/domain_io.hpp"
#include "stumpforge/irt.hpp"

#include <cstdint>
#include <vector>

namespace stumpforge::simulate {

struct SyntheticConfig {
  std::size_t subjects = 40;  // total, machines included
  std::size_t machines = 0;   // the last `machines` subjects are Machine kind
  std::size_t questions = 300;
  std::size_t authors = 3;
  double min_discriminability = 0.3;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Ground truth plus one sampled response matrix. Skills and difficulties are
/// uniform on [-1, 1]; discriminabilities uniform on [min_discriminability, 1].
struct SyntheticData {
  irt::IrtParameters truth;
  std::vector<Subject> subjects;
  std::vector<Question> questions;
  ResponseMatrix matrix;
};

SyntheticData generate(const SyntheticConfig& config);

/// {"seed", "skills", "difficulties", "discriminabilities"} keyed by id.
json truth_to_json(const SyntheticData& data, std::uint64_t seed);

}  // namespace stumpforge::simulate
