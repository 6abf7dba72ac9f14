#pragma once

#include "stumpforge/domain_io.hpp"
#include "stumpforge/irt.hpp"

#include <optional>
#include <string>

namespace stumpforge {

/// Everything downstream scoring needs from a completed fit.
struct FitReport {
  irt::FitConfig config;
  irt::FitResult joint;
  std::optional<irt::DualFit> dual;
  std::vector<Subject> subjects;
};

/// Runs the joint fit and, when both subject kinds are present, the dual fit.
FitReport run_fit(const ResponseMatrix& matrix, const irt::FitConfig& config);

/// {"elbo_trace", "skills", "difficulties", "discriminabilities", "seed",
///  "config", ...}. Object keys are sorted so dumps are byte-stable.
json to_json(const FitReport& report);

json to_json(const irt::FitConfig& config);
irt::FitConfig fit_config_from_json(const json& j, irt::FitConfig defaults = {});

/// Parsed view of a report file: constrained parameters and dual table.
struct LoadedFit {
  irt::IrtParameters params;
  std::optional<irt::DualDifficulty> dual;
  std::vector<Subject> subjects;
  std::vector<double> elbo_trace;
  double final_elbo = 0.0;
};

LoadedFit fit_from_json(const json& j);

}  // namespace stumpforge
