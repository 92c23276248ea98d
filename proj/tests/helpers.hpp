#pragma once

#include <random>
#include <string>
#include <vector>

#include "lmaudit/model/plan.hpp"
#include "lmaudit/model/report.hpp"

namespace lmaudit::testing {

using namespace lmaudit::model;

inline std::string random_identifier(std::mt19937_64& rng, std::size_t len = 8) {
  static const char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789_";
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) out += kAlphabet[pick(rng)];
  return out;
}

inline AuthScheme random_auth(std::mt19937_64& rng) {
  AuthScheme a;
  std::uniform_int_distribution<int> pick(0, 3);
  a.variant = static_cast<AuthVariant>(pick(rng));
  int n = static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) {
    std::string value = a.variant == AuthVariant::Jwt
                            ? "eyJ" + random_identifier(rng, 6) + ".eyJ" +
                                  random_identifier(rng, 6) + ".sig" +
                                  random_identifier(rng, 4)
                            : random_identifier(rng, 16);
    a.evidence.push_back({"e" + std::to_string(i), "authorization", value});
  }
  return a;
}

/// A minimal two-step (mint + query) plan used across the test suites.
inline ExploitPlan sample_plan() {
  ExploitPlan p;
  p.target_id = "sample";
  p.auth.variant = AuthVariant::Bearer;

  RequestStep mint;
  mint.id = "mint";
  mint.method = "POST";
  mint.url_template = "{base}/auth/guest";
  mint.headers = {{"Content-Type", "application/json"}};
  mint.body_template = "{}";
  p.token_step = mint;

  RequestStep query;
  query.id = "query";
  query.method = "POST";
  query.url_template = "{base}/api/chat";
  query.headers = {{"Authorization", "Bearer {token}"},
                   {"Content-Type", "application/json"}};
  query.body_template = R"({"message":"{user_query}"})";
  query.bindings = {{"token", BindingSource::token("/token")},
                    {"user_query", BindingSource::user_query()}};
  p.steps = {query};

  p.answer_extraction.step_id = "query";
  p.answer_extraction.mode = ExtractionMode::JsonPath;
  p.answer_extraction.paths = {"/reply"};
  p.answer_extraction.expected_markers = {"Paris", "Tokyo", "Brasília"};
  return p;
}

inline ExploitPlan random_plan(std::mt19937_64& rng) {
  ExploitPlan p = sample_plan();
  p.target_id = random_identifier(rng);
  if (rng() % 2 == 0) p.jailbreak = (rng() % 2 == 0) ? "AIM" : "HYP";
  if (rng() % 3 == 0) {
    p.token_step.reset();
    p.steps[0].bindings[0].source = BindingSource::make_literal(random_identifier(rng, 24));
  }
  if (rng() % 2 == 0) {
    p.steps[0].bindings.push_back(
        {"extra", BindingSource::make_literal(random_identifier(rng, 4))});
  }
  int consumed = static_cast<int>(rng() % 4);
  p.budget = QueryBudget(3, consumed);
  return p;
}

}  // namespace lmaudit::testing
