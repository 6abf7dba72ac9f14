#include "stumpforge/config.hpp"

#include "stumpforge/domain_io.hpp"
#include "stumpforge/error.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>

namespace stumpforge {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ValidationError("config key " + key + ": not a number: " + value);
  return out;
}

}  // namespace

ServiceConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ServiceConfig cfg;
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    // A comment runs from '#' at line start or after whitespace.
    for (std::size_t k = 1; k < line.size(); ++k)
      if (line[k] == '#' && (line[k - 1] == ' ' || line[k - 1] == '\t')) {
        line.resize(k);
        break;
      }
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (!seen.insert(key).second)
      throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key " + key);

    if (key == "corpus") cfg.corpus = path(value);
    else if (key == "index") cfg.index = path(value);
    else if (key == "stopwords") cfg.stopwords = path(value);
    else if (key == "gazetteer") cfg.gazetteer = path(value);
    else if (key == "reference") cfg.reference = path(value);
    else if (key == "answerers") cfg.answerers = path(value);
    else if (key == "data_dir") cfg.data_dir = path(value);
    else if (key == "host") cfg.host = value;
    else if (key == "port") cfg.port = parse_number<int>(key, value);
    else if (key == "draft_deadline_ms")
      cfg.draft_deadline = std::chrono::milliseconds(parse_number<long long>(key, value));
    else if (key == "evidence_k") cfg.evidence_k = parse_number<std::size_t>(key, value);
    else if (key == "suggestions") cfg.suggestions = parse_number<std::size_t>(key, value);
    else if (key == "fit_async_cells") cfg.fit_async_cells = parse_number<std::size_t>(key, value);
    else if (key == "fit_seed") cfg.fit.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "fit_epochs") cfg.fit.epochs = parse_number<int>(key, value);
    else if (key == "fit_learning_rate") cfg.fit.learning_rate = parse_number<double>(key, value);
    else if (key == "fit_mc_samples") cfg.fit.mc_samples = parse_number<int>(key, value);
    else if (key == "fit_prior_std") cfg.fit.prior_std = parse_number<double>(key, value);
    else if (key == "fit_convergence_tol") cfg.fit.convergence_tol = parse_number<double>(key, value);
    else throw ValidationError("config line " + std::to_string(lineno) + ": unknown key " + key);
  }
  if (cfg.port <= 0 || cfg.port > 65535) throw ValidationError("config: port out of range");
  if (cfg.draft_deadline.count() <= 0) throw ValidationError("config: draft_deadline_ms must be positive");
  if (cfg.evidence_k == 0) throw ValidationError("config: evidence_k must be >= 1");
  cfg.fit.validate();
  return cfg;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

std::filesystem::path config_path(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("STUMPFORGE_CONFIG"); env && *env) return env;
  return fallback;
}

std::vector<gateway::AnswererDescriptor> answerer_registry_from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("answerer registry: ") + e.what());
  }
  if (!j.is_array()) throw ValidationError("answerer registry must be a JSON array");
  std::vector<gateway::AnswererDescriptor> out;
  std::set<std::string> ids;
  for (const auto& row : j) {
    gateway::AnswererDescriptor d;
    try {
      d.id = row.at("id").get<std::string>();
      const auto kind = row.value("kind", std::string("RetrievalBaseline"));
      if (kind == "RetrievalBaseline") d.kind = gateway::AnswererKind::RetrievalBaseline;
      else if (kind == "Remote") d.kind = gateway::AnswererKind::Remote;
      else throw ValidationError("answerer " + d.id + ": unknown kind " + kind);
      d.endpoint = row.value("endpoint", std::string());
      d.timeout = std::chrono::milliseconds(row.value("timeout_ms", 10'000LL));
      d.display_name = row.value("display_name", d.id);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("answerer registry: ") + e.what());
    }
    d.validate();
    if (!ids.insert(d.id).second) throw DuplicateError("duplicate answerer id: " + d.id);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<gateway::AnswererDescriptor> read_answerer_registry(const std::filesystem::path& path) {
  return answerer_registry_from_json_text(read_file(path));
}

}  // namespace stumpforge
