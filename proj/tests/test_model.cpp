#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmaudit/model/enums.hpp"
#include "lmaudit/model/error.hpp"
#include "lmaudit/model/extraction.hpp"
#include "lmaudit/model/plan.hpp"
#include "lmaudit/model/report.hpp"
#include "lmaudit/model/types.hpp"

#include "helpers.hpp"

using namespace lmaudit;
using namespace lmaudit::model;

TEST_CASE("taxonomy accepts exactly the 14 valid cells") {
  int accepted = 0;
  for (int t = 0; t < 4; ++t) {
    for (int l = 0; l < 2; ++l) {
      for (int m = 0; m < 14; ++m) {
        auto type = static_cast<RestrictionType>(t);
        auto layer = static_cast<RestrictionLayer>(l);
        auto mechanism = static_cast<Mechanism>(m);
        bool ok = true;
        try {
          RestrictionMethod method(type, layer, mechanism);
          CHECK(method.type() == type);
        } catch (const ValidationError&) {
          ok = false;
        }
        CHECK(ok == is_valid_cell(type, layer, mechanism));
        if (ok) ++accepted;
      }
    }
  }
  CHECK(accepted == 14);
}

TEST_CASE("query budget allows three charges and rejects the fourth") {
  QueryBudget budget(3, 0);
  budget.charge();
  budget.charge();
  budget.charge();
  CHECK(budget.consumed() == 3);
  CHECK_FALSE(budget.can_charge());
  CHECK_THROWS_AS(budget.charge(), BudgetExhausted);
  CHECK(budget.consumed() == 3);  // failed charge does not move the counter
}

TEST_CASE("query budget rejects ceilings above three") {
  CHECK_THROWS_AS(QueryBudget(4, 0), ValidationError);
  CHECK_THROWS_AS(QueryBudget(3, 4), ValidationError);
}

TEST_CASE("no-auth scheme serializes to the canonical document") {
  AuthScheme a;
  a.variant = AuthVariant::NoAuth;
  json j = a;
  CHECK(j == json::parse(R"({"variant":"no_auth","evidence":[]})"));
  CHECK(j.get<AuthScheme>() == a);
}

TEST_CASE("jwt structure check") {
  CHECK(looks_like_jwt("eyJx.eyJy.sig"));
  CHECK(looks_like_jwt("abc-_.def=.g0"));
  CHECK_FALSE(looks_like_jwt("abc.def"));
  CHECK_FALSE(looks_like_jwt("a.b.c.d"));
  CHECK_FALSE(looks_like_jwt("a..c"));
  CHECK_FALSE(looks_like_jwt("a.b!c.d"));

  AuthScheme a;
  a.variant = AuthVariant::Jwt;
  a.evidence.push_back({"e1", "authorization", "not-a-jwt"});
  CHECK_THROWS_AS(a.validate(), ValidationError);
}

TEST_CASE("plan with forward-referencing binding fails validation") {
  auto plan = lmaudit::testing::sample_plan();
  plan.steps[0].bindings.push_back(
      {"later", BindingSource::response_path("future", "/x")});
  plan.steps[0].body_template = R"({"message":"{user_query}","extra":"{later}"})";
  CHECK_THROWS_AS(plan.validate(), ValidationError);
}

TEST_CASE("plan placeholders must be bound exactly once") {
  auto plan = lmaudit::testing::sample_plan();

  SUBCASE("unbound placeholder") {
    plan.steps[0].body_template = R"({"message":"{user_query}","k":"{missing}"})";
    CHECK_THROWS_AS(plan.validate(), ValidationError);
  }
  SUBCASE("duplicate binding") {
    plan.steps[0].bindings.push_back({"user_query", BindingSource::user_query()});
    CHECK_THROWS_AS(plan.validate(), ValidationError);
  }
  SUBCASE("token binding without token step") {
    plan.token_step.reset();
    CHECK_THROWS_AS(plan.validate(), ValidationError);
  }
  SUBCASE("host placeholders need no binding") {
    CHECK_NOTHROW(plan.validate());
  }
}

TEST_CASE("plan budget above the ceiling is rejected at parse") {
  auto plan = lmaudit::testing::sample_plan();
  json j = plan;
  j["budget"]["max_lm_queries"] = 7;
  CHECK_THROWS(j.get<ExploitPlan>());
}

TEST_CASE("serialization round-trips for generated core values") {
  std::mt19937_64 rng(20240117);
  for (int i = 0; i < 200; ++i) {
    auto auth = lmaudit::testing::random_auth(rng);
    json ja = auth;
    CHECK(ja.get<AuthScheme>() == auth);

    auto plan = lmaudit::testing::random_plan(rng);
    ExploitPlan back = parse_plan(serialize_plan(plan));
    CHECK(back == plan);

    // Serialization is deterministic byte output.
    CHECK(serialize_plan(plan) == serialize_plan(back));
  }
}

TEST_CASE("scan report round-trips and enforces verification invariants") {
  ScanReport report;
  report.target_id = "demo";
  report.auth.variant = AuthVariant::Bearer;
  report.plan = lmaudit::testing::sample_plan();
  report.verification = VerificationSummary{true, 2, std::nullopt, "logs/demo"};
  report.request_log_ref = "logs/demo";

  ScanReport back = parse_report(serialize_report(report));
  CHECK(back == report);

  SUBCASE("verification without plan is invalid") {
    report.plan.reset();
    CHECK_THROWS_AS(report.validate(), ValidationError);
  }
  SUBCASE("attempts outside 1..3 are invalid") {
    report.verification->attempts = 4;
    CHECK_THROWS_AS(report.validate(), ValidationError);
  }
  SUBCASE("success with failure reason is invalid") {
    report.verification->failure_reason = FailureReason::AnswerAbsent;
    CHECK_THROWS_AS(report.validate(), ValidationError);
  }
}

TEST_CASE("restriction profile enforces status transitions") {
  RestrictionProfile profile;
  CHECK(profile.status(RestrictionType::ModR) == RestrictionStatus::NotDetected);
  CHECK_THROWS_AS(profile.mark_bypassed(RestrictionType::ModR), ValidationError);

  profile.mark_detected(RestrictionType::ModR);
  profile.mark_bypassed(RestrictionType::ModR);
  CHECK(profile.status(RestrictionType::ModR) == RestrictionStatus::Bypassed);

  // A later failed attempt does not erase a recorded bypass.
  profile.mark_bypass_failed(RestrictionType::ModR);
  CHECK(profile.status(RestrictionType::ModR) == RestrictionStatus::Bypassed);

  profile.add_evidence(RestrictionType::ModR, "probe.mod", std::string(9000, 'x'));
  CHECK(profile.evidence(RestrictionType::ModR)[0].excerpt.size() == kExcerptCap);

  json j = profile;
  CHECK(j.get<RestrictionProfile>() == profile);
}

TEST_CASE("credential redaction keeps the last four characters") {
  Credential c{Provider::OpenAi, "sk-abcdefgh12345678", CredentialSource::StaticTree};
  auto r = c.redacted();
  CHECK(r.size() == c.value.size());
  CHECK(r.substr(r.size() - 4) == "5678");
  CHECK(r.find("sk-") == std::string::npos);

  Credential tiny{Provider::OpenAi, "ab", CredentialSource::StaticTree};
  CHECK(tiny.redacted() == "**");

  Credential empty;
  CHECK_THROWS_AS(empty.validate(), ValidationError);
}

TEST_CASE("sse stream reassembly joins data segments") {
  std::string body =
      "event: message\n"
      "data: {\"delta\":\"Paris, \"}\n"
      "\n"
      "data: {\"delta\":\"Tokyo, \"}\n"
      "\n"
      "data: {\"delta\":\"Brasília\"}\n"
      "\n"
      "data: [DONE]\n\n";
  auto segments = sse_data_segments(body);
  REQUIRE(segments.size() == 4);
  CHECK(segments[0] == "{\"delta\":\"Paris, \"}");
  CHECK(segments[3] == "[DONE]");

  SUBCASE("multi-line data within one event joins with newline") {
    auto multi = sse_data_segments("data: a\ndata: b\n\n");
    REQUIRE(multi.size() == 1);
    CHECK(multi[0] == "a\nb");
  }
  SUBCASE("crlf line endings are handled") {
    auto crlf = sse_data_segments("data: x\r\n\r\n");
    REQUIRE(crlf.size() == 1);
    CHECK(crlf[0] == "x");
  }
}

TEST_CASE("marker matching is case-insensitive and order-independent") {
  std::vector<std::string> markers = {"Paris", "Tokyo", "Brasília"};
  CHECK(contains_all_markers("brasília then TOKYO then paris", markers));
  CHECK_FALSE(contains_all_markers("paris and tokyo only", markers));
  CHECK_FALSE(contains_all_markers("", markers));
}

TEST_CASE("extraction rule application") {
  ExtractionRule rule;
  rule.step_id = "query";
  rule.expected_markers = {"Paris", "Tokyo", "Brasília"};

  SUBCASE("json path") {
    rule.mode = ExtractionMode::JsonPath;
    rule.paths = {"/reply"};
    auto hit = apply_extraction(rule, R"({"reply":"Paris, Tokyo, Brasília"})");
    CHECK(hit.parsed);
    CHECK(hit.matched);

    auto nested = apply_extraction(rule, R"({"data":{"reply":"Paris, Tokyo, Brasília"}})");
    CHECK_FALSE(nested.parsed);  // path misses the nested layout
    CHECK_FALSE(nested.matched);
  }
  SUBCASE("substring scan sees nested text") {
    rule.mode = ExtractionMode::SubstringScan;
    auto hit = apply_extraction(rule, R"({"data":{"reply":"Paris, Tokyo, Brasília"}})");
    CHECK(hit.parsed);
    CHECK(hit.matched);
  }
  SUBCASE("sse concat over chunked events") {
    rule.mode = ExtractionMode::SseConcat;
    rule.paths = {"/delta"};
    std::string body =
        "data: {\"delta\":\"Paris, \"}\n\n"
        "data: {\"delta\":\"Tokyo, \"}\n\n"
        "data: {\"delta\":\"Brasília\"}\n\n";
    auto hit = apply_extraction(rule, body);
    CHECK(hit.parsed);
    CHECK(hit.matched);
    // Oracle: manual concatenation of the fixture's data payloads.
    CHECK(hit.text == "Paris, Tokyo, Brasília");
  }
  SUBCASE("two of three markers is not a match") {
    rule.mode = ExtractionMode::SubstringScan;
    auto miss = apply_extraction(rule, "Paris and Tokyo");
    CHECK(miss.parsed);
    CHECK_FALSE(miss.matched);
  }
}
