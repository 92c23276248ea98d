#include "lmaudit/model/plan.hpp"

#include <algorithm>

#include "lmaudit/model/error.hpp"

namespace lmaudit::model {

BindingSource BindingSource::make_literal(std::string value, bool escape) {
  BindingSource s;
  s.kind = Kind::Literal;
  s.literal = std::move(value);
  s.json_escape = escape;
  return s;
}

BindingSource BindingSource::user_query(bool escape) {
  BindingSource s;
  s.kind = Kind::UserQuery;
  s.json_escape = escape;
  return s;
}

BindingSource BindingSource::token(std::string response_path) {
  BindingSource s;
  s.kind = Kind::Token;
  s.path = std::move(response_path);
  return s;
}

BindingSource BindingSource::response_path(std::string step_id, std::string path) {
  BindingSource s;
  s.kind = Kind::ResponsePath;
  s.step_id = std::move(step_id);
  s.path = std::move(path);
  return s;
}

namespace {

NLOHMANN_JSON_SERIALIZE_ENUM(BindingSource::Kind,
                             {{BindingSource::Kind::Literal, "literal"},
                              {BindingSource::Kind::UserQuery, "user_query"},
                              {BindingSource::Kind::Token, "token"},
                              {BindingSource::Kind::ResponsePath, "response_path"}})

}  // namespace

void to_json(json& j, const BindingSource& s) {
  j = json{{"kind", s.kind}};
  switch (s.kind) {
    case BindingSource::Kind::Literal:
      j["value"] = s.literal;
      break;
    case BindingSource::Kind::UserQuery:
      break;
    case BindingSource::Kind::Token:
      j["path"] = s.path;
      break;
    case BindingSource::Kind::ResponsePath:
      j["step_id"] = s.step_id;
      j["path"] = s.path;
      break;
  }
  if (s.json_escape) j["json_escape"] = true;
}

void from_json(const json& j, BindingSource& s) {
  s = BindingSource{};
  j.at("kind").get_to(s.kind);
  switch (s.kind) {
    case BindingSource::Kind::Literal:
      j.at("value").get_to(s.literal);
      break;
    case BindingSource::Kind::UserQuery:
      break;
    case BindingSource::Kind::Token:
      s.path = j.value("path", "");
      break;
    case BindingSource::Kind::ResponsePath:
      j.at("step_id").get_to(s.step_id);
      j.at("path").get_to(s.path);
      break;
  }
  s.json_escape = j.value("json_escape", false);
}

void to_json(json& j, const Binding& b) {
  j = json{{"placeholder", b.placeholder}, {"source", b.source}};
}

void from_json(const json& j, Binding& b) {
  j.at("placeholder").get_to(b.placeholder);
  j.at("source").get_to(b.source);
}

bool is_placeholder_name(std::string_view name) {
  return !name.empty() && name.size() <= 64 &&
         std::all_of(name.begin(), name.end(), [](char c) {
           return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '_';
         });
}

std::set<std::string> placeholders_in(std::string_view text) {
  std::set<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    std::size_t end = text.find('}', pos + 1);
    if (end == std::string_view::npos) break;
    std::string_view name = text.substr(pos + 1, end - pos - 1);
    if (is_placeholder_name(name)) {
      names.insert(std::string(name));
      pos = end + 1;
    } else {
      pos += 1;
    }
  }
  return names;
}

bool is_host_placeholder(std::string_view name) {
  return name.rfind("base", 0) == 0;
}

void RequestStep::validate() const {
  if (id.empty()) throw ValidationError("step id must be nonempty");
  if (method.empty()) throw ValidationError("step method must be nonempty");

  std::set<std::string> bound;
  for (const auto& b : bindings) {
    if (!bound.insert(b.placeholder).second) {
      throw ValidationError("step '" + id + "' binds placeholder '" + b.placeholder +
                            "' more than once");
    }
  }

  std::set<std::string> used = placeholders_in(url_template);
  for (const auto& [name, value] : headers) {
    (void)name;
    used.merge(placeholders_in(value));
  }
  if (body_template) used.merge(placeholders_in(*body_template));

  for (const auto& p : used) {
    if (!bound.count(p) && !is_host_placeholder(p)) {
      throw ValidationError("step '" + id + "' uses unbound placeholder '" + p + "'");
    }
  }
}

void to_json(json& j, const RequestStep& s) {
  j = json{{"id", s.id},
           {"method", s.method},
           {"url_template", s.url_template},
           {"headers", s.headers},
           {"bindings", s.bindings},
           {"expect_status", s.expect_status}};
  if (s.body_template) j["body_template"] = *s.body_template;
}

void from_json(const json& j, RequestStep& s) {
  s = RequestStep{};
  j.at("id").get_to(s.id);
  j.at("method").get_to(s.method);
  j.at("url_template").get_to(s.url_template);
  j.at("headers").get_to(s.headers);
  j.at("bindings").get_to(s.bindings);
  j.at("expect_status").get_to(s.expect_status);
  if (j.contains("body_template")) s.body_template = j.at("body_template").get<std::string>();
  s.validate();
}

void ExtractionRule::validate() const {
  if (step_id.empty()) throw ValidationError("extraction rule needs a step id");
  if (expected_markers.empty()) {
    throw ValidationError("extraction rule needs at least one expected marker");
  }
}

void to_json(json& j, const ExtractionRule& r) {
  j = json{{"step_id", r.step_id},
           {"mode", r.mode},
           {"paths", r.paths},
           {"expected_markers", r.expected_markers}};
}

void from_json(const json& j, ExtractionRule& r) {
  j.at("step_id").get_to(r.step_id);
  j.at("mode").get_to(r.mode);
  j.at("paths").get_to(r.paths);
  j.at("expected_markers").get_to(r.expected_markers);
  r.validate();
}

void ExploitPlan::validate() const {
  auth.validate();
  answer_extraction.validate();
  if (budget.max_lm_queries() > kMaxLmQueries) {
    throw ValidationError("plan budget exceeds the hard query ceiling");
  }

  if (token_step) {
    token_step->validate();
    for (const auto& b : token_step->bindings) {
      if (b.source.kind == BindingSource::Kind::Token ||
          b.source.kind == BindingSource::Kind::ResponsePath) {
        throw ValidationError("token step may not reference tokens or prior responses");
      }
    }
  }

  std::set<std::string> seen_ids;
  if (token_step) seen_ids.insert(token_step->id);
  std::set<std::string> prior_steps;
  bool extraction_target_exists = false;

  for (const auto& step : steps) {
    step.validate();
    if (!seen_ids.insert(step.id).second) {
      throw ValidationError("duplicate step id '" + step.id + "'");
    }
    for (const auto& b : step.bindings) {
      switch (b.source.kind) {
        case BindingSource::Kind::Token:
          if (!token_step) {
            throw ValidationError("step '" + step.id +
                                  "' references a token but the plan has no token step");
          }
          break;
        case BindingSource::Kind::ResponsePath:
          if (!prior_steps.count(b.source.step_id)) {
            throw ValidationError("step '" + step.id + "' references response of '" +
                                  b.source.step_id + "' which does not precede it");
          }
          break;
        default:
          break;
      }
    }
    if (step.id == answer_extraction.step_id) extraction_target_exists = true;
    prior_steps.insert(step.id);
  }

  if (steps.empty()) throw ValidationError("plan needs at least one step");
  if (!extraction_target_exists) {
    throw ValidationError("answer extraction references unknown step '" +
                          answer_extraction.step_id + "'");
  }
}

void to_json(json& j, const ExploitPlan& p) {
  j = json{{"version", p.version},
           {"target_id", p.target_id},
           {"auth", p.auth},
           {"steps", p.steps},
           {"answer_extraction", p.answer_extraction},
           {"budget", p.budget},
           {"force_token_refresh", p.force_token_refresh},
           {"host_hints", p.host_hints}};
  if (p.token_step) j["token_step"] = *p.token_step;
  if (p.jailbreak) j["jailbreak"] = *p.jailbreak;
}

void from_json(const json& j, ExploitPlan& p) {
  p = ExploitPlan{};
  j.at("version").get_to(p.version);
  j.at("target_id").get_to(p.target_id);
  j.at("auth").get_to(p.auth);
  j.at("steps").get_to(p.steps);
  j.at("answer_extraction").get_to(p.answer_extraction);
  j.at("budget").get_to(p.budget);
  p.force_token_refresh = j.value("force_token_refresh", false);
  if (j.contains("host_hints")) j.at("host_hints").get_to(p.host_hints);
  if (j.contains("token_step")) p.token_step = j.at("token_step").get<RequestStep>();
  if (j.contains("jailbreak")) p.jailbreak = j.at("jailbreak").get<std::string>();
  p.validate();
}

std::string serialize_plan(const ExploitPlan& p) {
  p.validate();
  json j = p;
  return j.dump(2) + "\n";
}

ExploitPlan parse_plan(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/true);
  return j.get<ExploitPlan>();
}

}  // namespace lmaudit::model
