#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lmaudit/model/types.hpp"

namespace lmaudit::model {

/// Where a placeholder value comes from at execution time.
struct BindingSource {
  enum class Kind { Literal, UserQuery, Token, ResponsePath };

  Kind kind = Kind::Literal;
  std::string literal;   // Literal
  std::string step_id;   // ResponsePath: id of the producing step
  std::string path;      // ResponsePath / Token: JSON pointer into the response body
  bool json_escape = false;  // escape the value for a JSON string context

  static BindingSource make_literal(std::string value, bool escape = false);
  static BindingSource user_query(bool escape = true);
  static BindingSource token(std::string response_path);
  static BindingSource response_path(std::string step_id, std::string path);

  friend bool operator==(const BindingSource&, const BindingSource&) = default;
};

void to_json(json& j, const BindingSource& s);
void from_json(const json& j, BindingSource& s);

struct Binding {
  std::string placeholder;
  BindingSource source;

  friend bool operator==(const Binding&, const Binding&) = default;
};

void to_json(json& j, const Binding& b);
void from_json(const json& j, Binding& b);

/// One HTTP request in a plan. Templates carry {placeholder} slots; every
/// placeholder must be bound exactly once.
struct RequestStep {
  std::string id;
  std::string method = "POST";
  std::string url_template;
  std::map<std::string, std::string> headers;  // name -> value template
  std::optional<std::string> body_template;
  std::vector<Binding> bindings;
  int expect_status = 200;

  void validate() const;

  friend bool operator==(const RequestStep&, const RequestStep&) = default;
};

void to_json(json& j, const RequestStep& s);
void from_json(const json& j, RequestStep& s);

/// Collect {placeholder} names appearing in a template string.
std::set<std::string> placeholders_in(std::string_view text);

/// Placeholder names are short identifiers; anything else between braces is
/// template payload (JSON), not a slot.
bool is_placeholder_name(std::string_view name);

/// Host slots ("base", "base0", ...) are resolved from the target binding at
/// execution time rather than from step bindings.
bool is_host_placeholder(std::string_view name);

/// How to pull the LM answer out of a logged response and what must be in it.
struct ExtractionRule {
  std::string step_id;
  ExtractionMode mode = ExtractionMode::SubstringScan;
  std::vector<std::string> paths;  // JSON pointers (JsonPath / SseConcat)
  std::vector<std::string> expected_markers;

  void validate() const;  // expected_markers nonempty

  friend bool operator==(const ExtractionRule&, const ExtractionRule&) = default;
};

void to_json(json& j, const ExtractionRule& r);
void from_json(const json& j, ExtractionRule& r);

inline constexpr int kPlanSchemaVersion = 1;

/// A declarative, replayable HTTP request sequence: optional token
/// acquisition, the query steps, answer extraction, and a query budget.
struct ExploitPlan {
  int version = kPlanSchemaVersion;
  std::string target_id;
  AuthScheme auth;
  std::optional<RequestStep> token_step;
  std::vector<RequestStep> steps;
  ExtractionRule answer_extraction;
  QueryBudget budget;
  std::optional<std::string> jailbreak;  // template id
  bool force_token_refresh = false;      // set by repair after auth rejection
  std::map<std::string, std::string> host_hints;  // placeholder -> recorded base URL

  /// Enforces: placeholders bound exactly once, no forward references,
  /// token bindings require a token step, extraction points at a real step,
  /// budget within the hard ceiling.
  void validate() const;

  friend bool operator==(const ExploitPlan&, const ExploitPlan&) = default;
};

void to_json(json& j, const ExploitPlan& p);
void from_json(const json& j, ExploitPlan& p);

/// Canonical document form: stable key order, two-space indent, trailing
/// newline. parse_plan(serialize_plan(p)) == p.
std::string serialize_plan(const ExploitPlan& p);
ExploitPlan parse_plan(const std::string& text);

}  // namespace lmaudit::model
