#include "lmaudit/replay/engine.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "lmaudit/har/parse.hpp"
#include "lmaudit/model/error.hpp"
#include "lmaudit/model/extraction.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::replay {

using model::Binding;
using model::BindingSource;
using model::ExploitPlan;
using model::RequestStep;

namespace {

std::string json_escape(const std::string& text) {
  std::string dumped = nlohmann::json(text).dump();
  return dumped.substr(1, dumped.size() - 2);
}

std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values,
                       const TargetBinding& target) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    auto close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    std::string name(tmpl.substr(open + 1, close - open - 1));
    if (!model::is_placeholder_name(name)) {
      // JSON braces in a body template, not a slot.
      out.append(tmpl.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    const std::string* value = nullptr;
    auto it = values.find(name);
    if (it != values.end()) {
      value = &it->second;
    } else if (model::is_host_placeholder(name)) {
      auto host = target.hosts.find(name);
      if (host == target.hosts.end()) {
        throw PlanError("host placeholder '" + name + "' is not bound to a base URL");
      }
      value = &host->second;
    }
    if (value == nullptr) {
      throw PlanError("no value for placeholder '" + name + "'");
    }
    out.append(tmpl.substr(pos, open - pos));
    out.append(*value);  // single pass: substituted text is never re-expanded
    pos = close + 1;
  }
  return out;
}

std::string strip_query(const std::string& url) {
  auto q = url.find('?');
  return q == std::string::npos ? url : url.substr(0, q);
}

bool is_secret_binding(const Binding& binding) {
  return binding.source.kind == BindingSource::Kind::Token ||
         binding.placeholder == "api_key" || binding.placeholder == "token";
}

}  // namespace

ConcreteRequest render_request(const RequestStep& step,
                               const std::map<std::string, std::string>& values,
                               const TargetBinding& target) {
  ConcreteRequest request;
  request.method = step.method;
  request.url = substitute(step.url_template, values, target);
  for (const auto& [name, value_template] : step.headers) {
    request.headers[name] = substitute(value_template, values, target);
  }
  if (step.body_template) {
    request.body = substitute(*step.body_template, values, target);
  }
  for (const auto& binding : step.bindings) {
    if (!is_secret_binding(binding)) continue;
    for (const auto& [name, value_template] : step.headers) {
      if (value_template.find("{" + binding.placeholder + "}") != std::string::npos) {
        request.redact_headers.push_back(name);
      }
    }
  }
  return request;
}

std::vector<har::HarEntry> ExecutionLog::to_har_entries() const {
  std::vector<har::HarEntry> entries;
  for (const auto& x : exchanges) {
    har::HarEntry e;
    e.id = x.step_id;
    e.started_at = x.started_at;
    e.request.method = x.method;
    e.request.url = x.url;
    e.request.headers = x.request_headers;
    e.request.body = x.request_body;
    e.response.status = x.status;
    e.response.headers = x.response_headers;
    e.response.content_type = x.content_type;
    e.response.body = x.response_body;
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string ExecutionLog::to_har_document() const {
  return har::make_har_document(to_har_entries());
}

const Exchange* ExecutionLog::last_for_step(const std::string& step_id) const {
  const Exchange* found = nullptr;
  for (const auto& x : exchanges) {
    if (x.step_id == step_id) found = &x;
  }
  return found;
}

struct ExecutionSession::HttpClientPool {
  std::map<std::string, std::unique_ptr<httplib::Client>> clients;

  httplib::Client& client_for(const std::string& base, int timeout_seconds) {
    auto it = clients.find(base);
    if (it == clients.end()) {
      auto client = std::make_unique<httplib::Client>(base);
      client->set_connection_timeout(timeout_seconds, 0);
      client->set_read_timeout(timeout_seconds, 0);
      client->set_write_timeout(timeout_seconds, 0);
      client->set_keep_alive(false);
      it = clients.emplace(base, std::move(client)).first;
    }
    return *it->second;
  }
};

ExecutionSession::ExecutionSession(TargetBinding target)
    : target_(std::move(target)), clients_(std::make_unique<HttpClientPool>()) {}

ExecutionSession::~ExecutionSession() = default;

Exchange ExecutionSession::perform(const ConcreteRequest& request,
                                   const std::string& step_id) {
  Exchange exchange;
  exchange.step_id = step_id;
  exchange.started_at = util::iso_timestamp(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  exchange.method = request.method;
  exchange.url = request.url;
  for (const auto& [name, value] : request.headers) {
    exchange.request_headers.emplace_back(name, value);
  }
  exchange.request_body = request.body.value_or("");

  auto parts = util::parse_url(request.url);
  if (!parts) {
    exchange.transport_ok = false;
    return exchange;
  }

  httplib::Client& client = clients_->client_for(parts->base(), target_.timeout_seconds);
  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [name, value] : request.headers) {
    if (util::ascii_lower(name) == "content-type") {
      content_type = value;
    } else {
      headers.emplace(name, value);
    }
  }

  httplib::Result result;
  if (request.method == "GET") {
    result = client.Get(parts->path_and_query, headers);
  } else if (request.method == "POST") {
    result = client.Post(parts->path_and_query, headers, request.body.value_or(""),
                         content_type);
  } else if (request.method == "PUT") {
    result = client.Put(parts->path_and_query, headers, request.body.value_or(""),
                        content_type);
  } else if (request.method == "DELETE") {
    result = client.Delete(parts->path_and_query, headers);
  } else {
    exchange.transport_ok = false;
    return exchange;
  }

  if (!result) {
    exchange.transport_ok = false;
    return exchange;
  }
  exchange.transport_ok = true;
  exchange.status = result->status;
  for (const auto& [name, value] : result->headers) {
    exchange.response_headers.emplace_back(name, value);
  }
  exchange.content_type = result->get_header_value("Content-Type");
  exchange.response_body = result->body;
  return exchange;
}

std::optional<std::string> ExecutionSession::acquire_token(const ExploitPlan& plan,
                                                           ExecutionLog& log,
                                                           std::string* error) {
  if (!plan.token_step) {
    *error = "plan references a token but has no token step";
    return std::nullopt;
  }
  std::map<std::string, std::string> values;
  for (const auto& binding : plan.token_step->bindings) {
    if (binding.source.kind == BindingSource::Kind::Literal) {
      values[binding.placeholder] = binding.source.json_escape
                                        ? json_escape(binding.source.literal)
                                        : binding.source.literal;
    }
  }
  ConcreteRequest request = render_request(*plan.token_step, values, target_);
  Exchange exchange = perform(request, plan.token_step->id);
  log.exchanges.push_back(exchange);
  if (!exchange.transport_ok) {
    *error = "token step transport failure";
    return std::nullopt;
  }
  if (exchange.status != plan.token_step->expect_status) {
    *error = "token step returned status " + std::to_string(exchange.status);
    return std::nullopt;
  }

  // The token binding's path tells us where the token lives in the mint
  // response; default is the whole (trimmed) body.
  std::string path;
  for (const auto& step : plan.steps) {
    for (const auto& binding : step.bindings) {
      if (binding.source.kind == BindingSource::Kind::Token) path = binding.source.path;
    }
  }
  if (path.empty()) {
    std::string body = exchange.response_body;
    while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
    return body;
  }
  nlohmann::json doc = nlohmann::json::parse(exchange.response_body, nullptr, false);
  if (doc.is_discarded()) {
    *error = "token step response is not JSON";
    return std::nullopt;
  }
  try {
    auto ptr = nlohmann::json::json_pointer(path);
    if (doc.contains(ptr) && doc.at(ptr).is_string()) {
      return doc.at(ptr).get<std::string>();
    }
  } catch (const nlohmann::json::exception&) {
  }
  *error = "token path '" + path + "' not found in mint response";
  return std::nullopt;
}

ExecutionResult ExecutionSession::execute_plan(const ExploitPlan& plan,
                                               const std::string& query_text,
                                               model::QueryBudget& budget) {
  plan.validate();
  ExecutionResult result;
  result.log.budget_snapshot = budget;

  // Fail before any I/O if a referenced host is unbound.
  auto check_hosts = [&](const RequestStep& step) {
    for (const auto& name : model::placeholders_in(step.url_template)) {
      if (model::is_host_placeholder(name) && !target_.hosts.count(name)) {
        throw PlanError("host placeholder '" + name + "' is not bound");
      }
    }
  };
  for (const auto& step : plan.steps) check_hosts(step);
  if (plan.token_step) check_hosts(*plan.token_step);

  // Signature of the LM query endpoint, for budget classification.
  const RequestStep* query_step = nullptr;
  for (const auto& step : plan.steps) {
    if (step.id == plan.answer_extraction.step_id) query_step = &step;
  }
  std::map<std::string, std::string> signature_values;
  for (const auto& binding : query_step->bindings) {
    signature_values[binding.placeholder] = "";
  }
  std::string lm_signature =
      strip_query(substitute(query_step->url_template, signature_values, target_));

  if (plan.force_token_refresh) token_.reset();

  for (const auto& step : plan.steps) {
    std::map<std::string, std::string> values;
    for (const auto& binding : step.bindings) {
      std::string raw;
      switch (binding.source.kind) {
        case BindingSource::Kind::Literal:
          raw = binding.source.literal;
          break;
        case BindingSource::Kind::UserQuery:
          raw = query_text;
          break;
        case BindingSource::Kind::Token: {
          if (!token_) {
            std::string error;
            token_ = acquire_token(plan, result.log, &error);
            if (!token_) {
              result.failure = model::FailureReason::AuthRejected;
              result.diagnostic = error;
              result.log.budget_snapshot = budget;
              return result;
            }
          }
          raw = *token_;
          break;
        }
        case BindingSource::Kind::ResponsePath: {
          const Exchange* prior = result.log.last_for_step(binding.source.step_id);
          if (prior == nullptr) {
            throw PlanError("binding references step '" + binding.source.step_id +
                            "' which has not produced a response");
          }
          nlohmann::json doc =
              nlohmann::json::parse(prior->response_body, nullptr, false);
          bool resolved = false;
          if (!doc.is_discarded()) {
            try {
              auto ptr = nlohmann::json::json_pointer(binding.source.path);
              if (doc.contains(ptr) && doc.at(ptr).is_string()) {
                raw = doc.at(ptr).get<std::string>();
                resolved = true;
              }
            } catch (const nlohmann::json::exception&) {
            }
          }
          if (!resolved) {
            result.failure = model::FailureReason::ParseError;
            result.diagnostic = "response path '" + binding.source.path +
                                "' unresolved in step '" + binding.source.step_id + "'";
            result.log.budget_snapshot = budget;
            return result;
          }
          break;
        }
      }
      values[binding.placeholder] =
          binding.source.json_escape ? json_escape(raw) : raw;
    }

    ConcreteRequest request = render_request(step, values, target_);

    bool lm_bound = strip_query(request.url) == lm_signature;
    if (lm_bound) {
      if (!budget.can_charge()) {
        result.failure = model::FailureReason::BudgetExhausted;
        result.diagnostic = "query budget exhausted before step '" + step.id + "'";
        result.log.budget_snapshot = budget;
        return result;
      }
      // Politeness pacing between LM-bound requests.
      if (any_lm_request_ && target_.min_lm_delay_ms > 0) {
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - last_lm_request_)
                           .count();
        if (elapsed < target_.min_lm_delay_ms) {
          std::this_thread::sleep_for(
              std::chrono::milliseconds(target_.min_lm_delay_ms - elapsed));
        }
      }
      budget.charge();
      any_lm_request_ = true;
      last_lm_request_ = std::chrono::steady_clock::now();
    }

    Exchange exchange = perform(request, step.id);
    result.log.exchanges.push_back(exchange);

    if (!exchange.transport_ok) {
      result.failure = model::FailureReason::TransportError;
      result.diagnostic = "transport failure on step '" + step.id + "'";
      result.log.budget_snapshot = budget;
      return result;
    }
    if (exchange.status != step.expect_status) {
      bool authish = exchange.status == 401 || exchange.status == 402 ||
                     exchange.status == 403 || exchange.status == 407 ||
                     exchange.status == 409 || exchange.status == 429;
      result.failure = authish ? model::FailureReason::AuthRejected
                               : model::FailureReason::TransportError;
      result.diagnostic = "step '" + step.id + "' returned status " +
                          std::to_string(exchange.status);
      result.log.budget_snapshot = budget;
      return result;
    }
    if (lm_bound) ++successful_lm_queries_;
  }

  result.completed = true;
  result.log.budget_snapshot = budget;
  return result;
}

CheckResult check_answer(const ExecutionLog& log, const model::ExtractionRule& rule) {
  CheckResult out;
  const Exchange* exchange = log.last_for_step(rule.step_id);
  if (exchange == nullptr) {
    out.diagnostic = "designated step '" + rule.step_id + "' absent from log";
    return out;
  }
  auto extraction = model::apply_extraction(rule, exchange->response_body);
  if (!extraction.parsed) {
    out.parse_failed = true;
    out.diagnostic = extraction.error;
    return out;
  }
  out.text = extraction.text;
  out.found = extraction.matched;
  if (!out.found) out.diagnostic = "expected markers absent from extracted text";
  return out;
}

}  // namespace lmaudit::replay
