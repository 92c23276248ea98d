#pragma once

#include <string>
#include <vector>

namespace lmaudit::synth {

/// Role-play / hypothetical-framing prompt template with one {question} slot.
struct JailbreakTemplate {
  std::string id;    // "AIM" or "HYP"
  std::string text;  // template with the {question} placeholder

  std::string render(const std::string& question) const;
};

const std::vector<JailbreakTemplate>& jailbreak_templates();
const JailbreakTemplate& jailbreak_template(const std::string& id);

/// Distinctive substrings a weak moderation layer keys on.
bool has_jailbreak_marker(const std::string& text);

}  // namespace lmaudit::synth
