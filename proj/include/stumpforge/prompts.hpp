#pragma once

#include <string>
#include <string_view>

namespace stumpforge::prompts {

/// Bumped whenever either template's bytes change. The same bytes ship as
/// prompts/judge.txt and prompts/explain.txt.
inline constexpr int kTemplateVersion = 1;

std::string_view judge_template();
std::string_view explanation_template();

/// Placeholder rendered when there is no evidence to show.
inline constexpr std::string_view kNoEvidence = "(no evidence)";

/// Single-pass substitution of {question} and {evidence}; placeholder text
/// inside the substituted values is left alone.
std::string render(std::string_view tmpl, std::string_view question, std::string_view evidence);

std::string judge_prompt(std::string_view question, std::string_view evidence);
std::string explanation_prompt(std::string_view question);

}  // namespace stumpforge::prompts
