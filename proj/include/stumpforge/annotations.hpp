#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stumpforge {

/// Problems annotators flag on a question.
enum class QuestionFlaw {
  LacksFactuality,
  LacksSpecificity,
  Subjectivity,
  MultipleAcceptableAnswers,
};

/// Techniques a writer used to stump the machines.
enum class AdversarialTactic {
  ComposingSeenClues,
  LogicCalculation,
  MultiStepReasoning,
  Negation,
  TemporalMisalignment,
  LocationMisalignment,
  CommonsenseKnowledge,
  DomainExpertKnowledge,
  NovelClues,
  Crosslingual,
};

std::string_view to_string(QuestionFlaw f);
std::string_view to_string(AdversarialTactic t);
QuestionFlaw parse_flaw(std::string_view label);
AdversarialTactic parse_tactic(std::string_view label);
const std::vector<AdversarialTactic>& all_tactics();
const std::vector<QuestionFlaw>& all_flaws();

struct Annotation {
  std::set<QuestionFlaw> flaws;
  std::set<AdversarialTactic> tactics;

  bool empty() const { return flaws.empty() && tactics.empty(); }
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

}  // namespace stumpforge
