#include "stumpforge/diversity.hpp"

#include "stumpforge/domain_io.hpp"
#include "stumpforge/error.hpp"
#include "stumpforge/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>

namespace stumpforge::diversity {

void validate_distribution(const CountryDistribution& d) {
  if (d.empty()) return;
  double sum = 0.0;
  for (const auto& [code, p] : d) {
    if (!(p >= 0.0)) throw ValidationError("negative probability for " + code);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("distribution does not sum to 1");
}

CountryDistribution reference_from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("reference distribution: ") + e.what());
  }
  if (!j.is_object() || j.empty()) throw ValidationError("reference distribution must be a non-empty object");
  CountryDistribution d;
  double sum = 0.0;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_number() || it->get<double>() < 0.0)
      throw ValidationError("reference share for " + it.key() + " must be a non-negative number");
    d[it.key()] = it->get<double>();
    sum += it->get<double>();
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("reference shares must sum to 1");
  for (auto& [_, p] : d) p /= sum;
  return d;
}

CountryDistribution read_reference(const std::filesystem::path& path) {
  return reference_from_json_text(read_file(path));
}

Gazetteer Gazetteer::from_tsv(std::istream& in) {
  Gazetteer g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw ValidationError("gazetteer line " + std::to_string(lineno) + ": expected surface<TAB>code");
    g.add(std::string_view(line).substr(0, tab), line.substr(tab + 1));
  }
  return g;
}

Gazetteer Gazetteer::from_tsv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return from_tsv(in);
}

void Gazetteer::add(std::string_view surface, std::string country) {
  // Store the token sequence joined by single spaces so spacing in the
  // question does not matter.
  std::string key;
  for (const auto& t : tokenize(surface)) {
    if (!key.empty()) key.push_back(' ');
    key += t.text;
  }
  if (key.empty()) throw ValidationError("gazetteer surface form has no word characters");
  std::uint32_t node = 0;
  for (char c : key) {
    auto it = nodes_[node].next.find(c);
    if (it == nodes_[node].next.end()) {
      nodes_.emplace_back();
      const auto created = static_cast<std::uint32_t>(nodes_.size() - 1);
      nodes_[node].next.emplace(c, created);
      node = created;
    } else {
      node = it->second;
    }
  }
  if (!nodes_[node].country) ++entries_;
  nodes_[node].country = std::move(country);
}

std::vector<EntityMatch> Gazetteer::match(std::string_view text) const {
  const auto tokens = tokenize(text);
  std::vector<EntityMatch> out;
  std::size_t t = 0;
  while (t < tokens.size()) {
    // Walk token by token, joining with a single space.
    std::uint32_t node = 0;
    std::optional<std::size_t> best_last;
    for (std::size_t u = t; u < tokens.size(); ++u) {
      bool alive = true;
      if (u > t) {
        auto it = nodes_[node].next.find(' ');
        if (it == nodes_[node].next.end()) break;
        node = it->second;
      }
      for (char c : tokens[u].text) {
        auto it = nodes_[node].next.find(c);
        if (it == nodes_[node].next.end()) {
          alive = false;
          break;
        }
        node = it->second;
      }
      if (!alive) break;
      if (nodes_[node].country) best_last = u;
    }
    if (!best_last) {
      ++t;
      continue;
    }
    // Re-walk to recover the country at the longest match.
    std::uint32_t n = 0;
    for (std::size_t u = t; u <= *best_last; ++u) {
      if (u > t) n = nodes_[n].next.at(' ');
      for (char c : tokens[u].text) n = nodes_[n].next.at(c);
    }
    const std::size_t b = tokens[t].begin;
    const std::size_t e = tokens[*best_last].end;
    out.push_back({std::string(text.substr(b, e - b)), *nodes_[n].country, b, e});
    t = *best_last + 1;
  }
  return out;
}

std::set<std::string> Gazetteer::unknown_codes(const CountryDistribution& reference) const {
  std::set<std::string> unknown;
  for (const auto& node : nodes_)
    if (node.country && !reference.contains(*node.country)) unknown.insert(*node.country);
  return unknown;
}

QuestionDistribution question_distribution(const std::vector<Question>& questions,
                                           const Gazetteer& gazetteer) {
  if (gazetteer.empty()) throw ValidationError("gazetteer is empty");
  QuestionDistribution out;
  std::size_t total = 0;
  for (const auto& q : questions) {
    const auto matches = gazetteer.match(q.text);
    if (matches.empty()) out.unmatched_questions.push_back(q.id);
    for (const auto& m : matches) {
      ++out.counts[m.country];
      ++total;
    }
  }
  for (const auto& [code, n] : out.counts)
    out.distribution[code] = static_cast<double>(n) / static_cast<double>(total);
  return out;
}

double kl(const CountryDistribution& p, const CountryDistribution& q, double epsilon) {
  if (p.empty()) throw DiversityUndefinedError("no entities detected");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  std::set<std::string> support;
  for (const auto& [c, _] : p) support.insert(c);
  for (const auto& [c, _] : q) support.insert(c);
  const double z = 1.0 + epsilon * static_cast<double>(support.size());
  auto mass = [&](const CountryDistribution& d, const std::string& c) {
    auto it = d.find(c);
    return ((it == d.end() ? 0.0 : it->second) + epsilon) / z;
  };
  double total = 0.0;
  for (const auto& c : support) {
    const double pp = mass(p, c);
    total += pp * std::log(pp / mass(q, c));
  }
  return std::max(total, 0.0);
}

std::vector<std::string> suggest(const CountryDistribution& p, const CountryDistribution& q,
                                 std::size_t n) {
  if (n == 0) throw ValidationError("n must be >= 1");
  std::vector<std::pair<double, std::string>> gaps;
  for (const auto& [code, share] : q) {
    auto it = p.find(code);
    gaps.emplace_back(share - (it == p.end() ? 0.0 : it->second), code);
  }
  std::sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t k = 0; k < gaps.size() && k < n; ++k) out.push_back(gaps[k].second);
  return out;
}

DiversityDelta diversity_delta(const std::vector<Question>& existing, const Question& draft,
                               const Gazetteer& gazetteer, const CountryDistribution& reference,
                               double epsilon) {
  DiversityDelta out;
  auto tau = [&](const std::vector<Question>& qs) -> std::optional<double> {
    const auto d = question_distribution(qs, gazetteer);
    if (d.distribution.empty()) return std::nullopt;
    return kl(d.distribution, reference, epsilon);
  };
  out.before = tau(existing);
  auto with = existing;
  with.push_back(draft);
  out.after = tau(with);
  if (out.before && out.after) out.delta = *out.after - *out.before;
  return out;
}

}  // namespace stumpforge::diversity
