#include "lmaudit/model/enums.hpp"

namespace lmaudit::model {

bool is_valid_cell(RestrictionType type, RestrictionLayer layer, Mechanism mechanism) {
  struct Cell {
    RestrictionType type;
    RestrictionLayer layer;
    Mechanism mechanism;
  };
  // The 14 cells of the restriction taxonomy.
  static const Cell kCells[] = {
      {RestrictionType::QuotaR, RestrictionLayer::Lm, Mechanism::OutputLengthPreprompt},
      {RestrictionType::QuotaR, RestrictionLayer::Lm, Mechanism::MaxOutputTokens},
      {RestrictionType::QuotaR, RestrictionLayer::App, Mechanism::Payments},
      {RestrictionType::QuotaR, RestrictionLayer::App, Mechanism::LimitedInputLength},
      {RestrictionType::QuotaR, RestrictionLayer::App, Mechanism::OutputClipping},
      {RestrictionType::TopicR, RestrictionLayer::Lm, Mechanism::TopicPreprompt},
      {RestrictionType::TopicR, RestrictionLayer::App, Mechanism::LimitedInputChoices},
      {RestrictionType::TopicR, RestrictionLayer::App, Mechanism::HighlyStructuredInput},
      {RestrictionType::TopicR, RestrictionLayer::App, Mechanism::NoUserInput},
      {RestrictionType::ModR, RestrictionLayer::Lm, Mechanism::ModerationPreprompt},
      {RestrictionType::ModR, RestrictionLayer::Lm, Mechanism::LmIntegratedModeration},
      {RestrictionType::ModR, RestrictionLayer::App, Mechanism::DedicatedModerationModel},
      {RestrictionType::PipR, RestrictionLayer::Lm, Mechanism::DataPreprompt},
      {RestrictionType::PipR, RestrictionLayer::App, Mechanism::AccessControl},
  };
  for (const auto& cell : kCells) {
    if (cell.type == type && cell.layer == layer && cell.mechanism == mechanism) {
      return true;
    }
  }
  return false;
}

const char* to_tag(RestrictionType type) {
  switch (type) {
    case RestrictionType::QuotaR: return "quota_r";
    case RestrictionType::TopicR: return "topic_r";
    case RestrictionType::ModR: return "mod_r";
    case RestrictionType::PipR: return "pip_r";
  }
  return "unknown";
}

}  // namespace lmaudit::model
