#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>

#include "lmaudit/gym/core.hpp"
#include "lmaudit/gym/server.hpp"
#include "lmaudit/gym/suite.hpp"
#include "lmaudit/har/analyze.hpp"
#include "lmaudit/har/parse.hpp"
#include "lmaudit/model/error.hpp"
#include "lmaudit/replay/engine.hpp"
#include "lmaudit/scan/scanner.hpp"

#include "helpers.hpp"

using namespace lmaudit;
using namespace lmaudit::replay;
using lmaudit::testing::sample_plan;

namespace {

TargetBinding bind_app(const gym::GymInstance& instance) {
  TargetBinding target;
  target.hosts["base"] = instance.base_urls().app_server;
  target.timeout_seconds = 5;
  target.min_lm_delay_ms = 0;
  return target;
}

}  // namespace

TEST_CASE("render_request substitutes urls, headers, and bodies") {
  model::RequestStep step;
  step.id = "query";
  step.method = "POST";
  step.url_template = "{base}/v1/chat";
  step.headers = {{"Authorization", "Bearer {token}"}};
  step.body_template = R"({"message":"{user_query}"})";
  step.bindings = {{"token", model::BindingSource::make_literal("tok123")},
                   {"user_query", model::BindingSource::make_literal("hello")}};

  TargetBinding target;
  target.hosts["base"] = "http://127.0.0.1:8931";

  std::map<std::string, std::string> values{{"token", "tok123"}, {"user_query", "hello"}};
  auto request = render_request(step, values, target);
  CHECK(request.url == "http://127.0.0.1:8931/v1/chat");
  CHECK(request.headers.at("Authorization") == "Bearer tok123");
  CHECK(*request.body == R"({"message":"hello"})");
  // token-bearing headers are flagged for redaction in rendered reports
  REQUIRE(request.redact_headers.size() == 1);
  CHECK(request.redact_headers[0] == "Authorization");

  SUBCASE("missing binding names the placeholder") {
    values.erase("token");
    CHECK_THROWS_WITH_AS(render_request(step, values, target),
                         doctest::Contains("token"), PlanError);
  }
  SUBCASE("substitution is single-pass: values are never re-expanded") {
    values["user_query"] = "{token}";
    auto nested = render_request(step, values, target);
    // Oracle: manual substitution leaves the literal braces untouched.
    CHECK(*nested.body == R"({"message":"{token}"})");
  }
}

TEST_CASE("mint-plus-query plan executes against the gym") {
  const auto& scenario = gym::scenario_by_id("quota-payments-open-oracle");
  auto q = har::default_canonical_query();
  auto instance = gym::GymInstance::serve(scenario, q);

  ExecutionSession session(bind_app(*instance));
  model::QueryBudget budget(3);
  auto plan = sample_plan();

  auto result = session.execute_plan(plan, q.text, budget);
  REQUIRE(result.completed);
  REQUIRE(result.log.exchanges.size() == 2);  // mint + query
  CHECK(result.log.exchanges[0].step_id == "mint");
  CHECK(budget.consumed() == 1);  // the mint is not budget-charged

  auto check = check_answer(result.log, plan.answer_extraction);
  CHECK(check.found);
  CHECK(check.text == gym::canonical_answer(q));

  SUBCASE("token is cached across executions in one session") {
    auto again = session.execute_plan(plan, q.text, budget);
    REQUIRE(again.completed);
    CHECK(again.log.exchanges.size() == 1);  // no second mint
  }
}

TEST_CASE("unbound host fails before any network i/o") {
  ExecutionSession session(TargetBinding{});
  model::QueryBudget budget(3);
  auto plan = sample_plan();
  CHECK_THROWS_AS(session.execute_plan(plan, "hi", budget), PlanError);
}

TEST_CASE("the fourth lm-bound request is blocked before the wire") {
  const auto& scenario = gym::scenario_by_id("chatapp-parse-drift");
  auto q = har::default_canonical_query();
  auto instance = gym::GymInstance::serve(scenario, q);

  auto plan = sample_plan();
  // Four LM-bound steps against a budget of three.
  auto query = plan.steps[0];
  plan.steps.clear();
  for (int i = 0; i < 4; ++i) {
    auto step = query;
    step.id = "query" + std::to_string(i);
    plan.steps.push_back(step);
  }
  plan.answer_extraction.step_id = "query0";

  instance->core().reset_lm_counter();
  ExecutionSession session(bind_app(*instance));
  model::QueryBudget budget(3);
  auto result = session.execute_plan(plan, q.text, budget);

  CHECK_FALSE(result.completed);
  REQUIRE(result.failure.has_value());
  CHECK(*result.failure == model::FailureReason::BudgetExhausted);
  // mint + exactly three LM exchanges logged; the gym saw no fourth query
  CHECK(result.log.exchanges.size() == 4);
  CHECK(budget.consumed() == 3);
  CHECK(instance->core().lm_bound_requests() == 3);
}

TEST_CASE("execution logs export as har and survive re-analysis") {
  const auto& scenario = gym::scenario_by_id("quota-payments-open-oracle");
  auto q = har::default_canonical_query();
  auto instance = gym::GymInstance::serve(scenario, q);

  ExecutionSession session(bind_app(*instance));
  model::QueryBudget budget(3);
  auto plan = sample_plan();
  auto result = session.execute_plan(plan, q.text, budget);
  REQUIRE(result.completed);

  auto archive = har::parse_har(result.log.to_har_document());
  REQUIRE(archive.entries.size() == 2);

  auto located = har::locate_query_entry(archive, q);
  REQUIRE(located.has_value());
  auto answer = har::locate_answer_entry(archive, q, located->entry_id);
  REQUIRE(answer.has_value());
  auto auth = har::classify_auth(archive, located->entry_id, scan::default_fingerprints());
  CHECK(auth.scheme.variant == model::AuthVariant::Bearer);
}

TEST_CASE("lm-bound requests honor the configured pacing") {
  const auto& scenario = gym::scenario_by_id("chatapp-parse-drift");
  auto q = har::default_canonical_query();
  auto instance = gym::GymInstance::serve(scenario, q);

  auto target = bind_app(*instance);
  target.min_lm_delay_ms = 120;
  ExecutionSession session(target);
  model::QueryBudget budget(3);
  auto plan = sample_plan();
  plan.answer_extraction.mode = model::ExtractionMode::SubstringScan;
  plan.answer_extraction.paths.clear();

  auto start = std::chrono::steady_clock::now();
  REQUIRE(session.execute_plan(plan, q.text, budget).completed);
  REQUIRE(session.execute_plan(plan, q.text, budget).completed);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  CHECK(elapsed >= 120);  // second LM query waited for the pacing window
}

TEST_CASE("fuzzed plans never leak an unresolved placeholder to the wire") {
  const auto& scenario = gym::scenario_by_id("chatapp-parse-drift");
  auto q = har::default_canonical_query();
  auto instance = gym::GymInstance::serve(scenario, q);

  std::mt19937_64 rng(99);
  for (int i = 0; i < 40; ++i) {
    auto plan = lmaudit::testing::random_plan(rng);
    // Corrupt some plans with an unbindable host slot.
    bool corrupted = rng() % 3 == 0;
    if (corrupted) {
      plan.steps[0].url_template = "{base9}/api/chat";
    }
    instance->core().reset_lm_counter();
    ExecutionSession session(bind_app(*instance));
    model::QueryBudget budget(3);
    try {
      auto result = session.execute_plan(plan, q.text, budget);
      (void)result;
      CHECK_FALSE(corrupted);
    } catch (const PlanError&) {
      // Pre-network failure: the gym must not have seen the broken step.
      CHECK(corrupted);
      CHECK(instance->core().lm_bound_requests() == 0);
    }
  }
}
