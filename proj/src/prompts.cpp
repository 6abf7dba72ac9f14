#include "stumpforge/prompts.hpp"

namespace stumpforge::prompts {

std::string_view judge_template() {
  return "Do you think that the question can be answered using this evidence from Wikipedia. "
         "If yes, predict an answer using the evidence in one or two words.\n"
         "\n"
         "Question: {question}\n"
         "Evidence: {evidence}\n";
}

std::string_view explanation_template() {
  return "Answer the question in one or two words and provide an explanation for your answer.\n"
         "\n"
         "Question: {question}\n";
}

std::string render(std::string_view tmpl, std::string_view question, std::string_view evidence) {
  constexpr std::string_view kQuestion = "{question}";
  constexpr std::string_view kEvidence = "{evidence}";
  std::string out;
  out.reserve(tmpl.size() + question.size() + evidence.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.substr(i, kQuestion.size()) == kQuestion) {
      out += question;
      i += kQuestion.size();
    } else if (tmpl.substr(i, kEvidence.size()) == kEvidence) {
      out += evidence;
      i += kEvidence.size();
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

std::string judge_prompt(std::string_view question, std::string_view evidence) {
  return render(judge_template(), question, evidence.empty() ? kNoEvidence : evidence);
}

std::string explanation_prompt(std::string_view question) {
  return render(explanation_template(), question, {});
}

}  // namespace stumpforge::prompts
