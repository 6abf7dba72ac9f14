#pragma once

#include "stumpforge/gateway.hpp"
#include "stumpforge/irt.hpp"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stumpforge {

/// Service settings read from a `key = value` file. Relative paths are
/// resolved against the directory holding the file.
///
/// Keys:
///   corpus, index, stopwords, gazetteer, reference, answerers, data_dir
///   host, port, draft_deadline_ms, evidence_k, suggestions,
///   fit_async_cells, fit_seed, fit_epochs, fit_learning_rate,
///   fit_mc_samples, fit_prior_std, fit_convergence_tol
struct ServiceConfig {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> index;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> gazetteer;
  std::optional<std::filesystem::path> reference;
  std::optional<std::filesystem::path> answerers;
  std::filesystem::path data_dir;  // empty keeps the store in memory

  std::string host = "127.0.0.1";
  int port = 8080;
  std::chrono::milliseconds draft_deadline{15'000};
  std::size_t evidence_k = 5;
  std::size_t suggestions = 3;
  /// Matrices with more present cells than this are fitted as background jobs.
  std::size_t fit_async_cells = 20'000;
  irt::FitConfig fit;
};

ServiceConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ServiceConfig load_config(const std::filesystem::path& path);

/// STUMPFORGE_CONFIG when set, else `fallback`.
std::filesystem::path config_path(const std::filesystem::path& fallback = "stumpforge.conf");

/// answerers.json: [{"id", "kind": "RetrievalBaseline"|"Remote", "endpoint"?,
/// "timeout_ms"?, "display_name"?}]. Ids must be unique.
std::vector<gateway::AnswererDescriptor> read_answerer_registry(const std::filesystem::path& path);
std::vector<gateway::AnswererDescriptor> answerer_registry_from_json_text(std::string_view text);

}  // namespace stumpforge
