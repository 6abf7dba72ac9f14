#include "stumpforge/annotations.hpp"

#include "stumpforge/error.hpp"

#include <array>
#include <utility>

namespace stumpforge {

namespace {

constexpr std::array<std::pair<QuestionFlaw, std::string_view>, 4> kFlaws{{
    {QuestionFlaw::LacksFactuality, "LacksFactuality"},
    {QuestionFlaw::LacksSpecificity, "LacksSpecificity"},
    {QuestionFlaw::Subjectivity, "Subjectivity"},
    {QuestionFlaw::MultipleAcceptableAnswers, "MultipleAcceptableAnswers"},
}};

constexpr std::array<std::pair<AdversarialTactic, std::string_view>, 10> kTactics{{
    {AdversarialTactic::ComposingSeenClues, "ComposingSeenClues"},
    {AdversarialTactic::LogicCalculation, "LogicCalculation"},
    {AdversarialTactic::MultiStepReasoning, "MultiStepReasoning"},
    {AdversarialTactic::Negation, "Negation"},
    {AdversarialTactic::TemporalMisalignment, "TemporalMisalignment"},
    {AdversarialTactic::LocationMisalignment, "LocationMisalignment"},
    {AdversarialTactic::CommonsenseKnowledge, "CommonsenseKnowledge"},
    {AdversarialTactic::DomainExpertKnowledge, "DomainExpertKnowledge"},
    {AdversarialTactic::NovelClues, "NovelClues"},
    {AdversarialTactic::Crosslingual, "Crosslingual"},
}};

template <typename Table, typename E>
std::string_view name_of(const Table& table, E value) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "?";
}

}  // namespace

std::string_view to_string(QuestionFlaw f) { return name_of(kFlaws, f); }
std::string_view to_string(AdversarialTactic t) { return name_of(kTactics, t); }

QuestionFlaw parse_flaw(std::string_view label) {
  for (const auto& [v, name] : kFlaws)
    if (name == label) return v;
  throw ValidationError("unknown question flaw: " + std::string(label));
}

AdversarialTactic parse_tactic(std::string_view label) {
  for (const auto& [v, name] : kTactics)
    if (name == label) return v;
  throw ValidationError("unknown adversarial tactic: " + std::string(label));
}

const std::vector<AdversarialTactic>& all_tactics() {
  static const std::vector<AdversarialTactic> v = [] {
    std::vector<AdversarialTactic> out;
    for (const auto& [t, _] : kTactics) out.push_back(t);
    return out;
  }();
  return v;
}

const std::vector<QuestionFlaw>& all_flaws() {
  static const std::vector<QuestionFlaw> v = [] {
    std::vector<QuestionFlaw> out;
    for (const auto& [f, _] : kFlaws) out.push_back(f);
    return out;
  }();
  return v;
}

}  // namespace stumpforge
