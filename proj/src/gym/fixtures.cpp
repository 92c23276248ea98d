#include "lmaudit/gym/fixtures.hpp"

#include <fstream>

#include "lmaudit/har/parse.hpp"
#include "lmaudit/model/error.hpp"
#include "lmaudit/providers.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::gym {

using nlohmann::json;

namespace {

constexpr std::int64_t kRecordingEpochMs = 1704067200000;  // 2024-01-01T00:00:00Z

std::string json_escape(const std::string& text) {
  std::string dumped = json(text).dump();
  return dumped.substr(1, dumped.size() - 2);
}

struct NoiseTemplate {
  const char* method;
  const char* url;
  int status;
  const char* content_type;
  const char* body;
};

const NoiseTemplate kNoise[] = {
    {"GET", "https://cdn.adservice.example/banner%u.png", 200, "image/png", "\x89PNGnoise"},
    {"POST", "https://app-measurement.com/collect?v=%u", 204, "text/plain", ""},
    {"GET", "https://static.appcdn.example/bundle%u.css", 200, "text/css", ".a{color:red}"},
    {"GET", "https://fonts.appcdn.example/face%u.woff2", 200, "font/woff2", "wOF2noise"},
    {"POST", "https://api.crashlytics.example/events", 200, "application/json",
     "{\"ok\":true}"},
    {"GET", "https://www.google-analytics.com/g/collect?tid=%u", 204, "text/plain", ""},
    {"GET", "https://img.adservice.example/pixel%u.gif", 200, "image/gif", "GIF89a"},
    {"POST", "https://telemetry.appcdn.example/batch", 503, "application/json",
     "{\"error\":\"overloaded\"}"},
};

std::string format_noise_url(const char* pattern, unsigned n) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, n);
  return std::string(buf);
}

}  // namespace

std::map<std::string, std::string> recording_host_roles() {
  return {
      {"127.0.0.1:18080", kRoleAppServer},
      {"127.0.0.1:18081", kRoleLmStub},
      {"127.0.0.1:18082", kRoleModeration},
      {"127.0.0.1:18083", kRoleApiServer},
  };
}

std::string recording_base(const std::string& role) {
  for (const auto& [host, r] : recording_host_roles()) {
    if (r == role) return "http://" + host;
  }
  throw Error("unknown gym role '" + role + "'");
}

std::string FixtureManifest::role_for_host(const std::string& host_port) const {
  auto it = host_roles.find(host_port);
  return it == host_roles.end() ? "" : it->second;
}

void to_json(json& j, const FixtureManifest& m) {
  j = json{{"scenario_id", m.scenario_id}, {"host_roles", m.host_roles}};
}

void from_json(const json& j, FixtureManifest& m) {
  j.at("scenario_id").get_to(m.scenario_id);
  j.at("host_roles").get_to(m.host_roles);
}

Recording run_recording(const GymScenario& scenario, const har::CanonicalQuery& q) {
  scenario.validate();
  GymCore core(scenario, GymMode::Recording, q);
  const auto& profile = providers::profile_for(scenario.credentials.provider);

  Recording recording;
  recording.manifest.scenario_id = scenario.id;
  recording.manifest.host_roles = recording_host_roles();

  std::int64_t now_ms = kRecordingEpochMs;
  auto stamp = [&] {
    now_ms += 10;
    return util::iso_timestamp(now_ms);
  };

  auto record_exchange = [&](const std::string& role, const GymRequest& req,
                             const GymResponse& resp) {
    har::HarEntry e;
    e.started_at = stamp();
    e.request.method = req.method;
    e.request.url = recording_base(role) + req.path_and_query();
    e.request.headers = req.headers;
    if (!req.body.empty()) {
      e.request.headers.emplace_back("Content-Type", "application/json");
    }
    e.request.body = req.body;
    e.response.status = resp.status;
    e.response.content_type = resp.content_type;
    e.response.headers = {{"Content-Type", resp.content_type}};
    e.response.body = resp.body;
    recording.entries.push_back(std::move(e));
  };

  auto app_call = [&](GymRequest req) {
    GymResponse resp = core.handle_app(req);
    record_exchange(kRoleAppServer, req, resp);
    return resp;
  };

  auto synthetic = [&](const std::string& method, const std::string& url, int status,
                       const std::string& content_type, const std::string& body,
                       har::HeaderList req_headers = {}) {
    har::HarEntry e;
    e.started_at = stamp();
    e.request.method = method;
    e.request.url = url;
    e.request.headers = std::move(req_headers);
    e.response.status = status;
    e.response.content_type = content_type;
    e.response.headers = {{"Content-Type", content_type}};
    e.response.body = body;
    recording.entries.push_back(std::move(e));
  };

  util::DeterministicRng rng("noise:" + scenario.id);
  int noise_total = scenario.recording.noise_entries;
  auto emit_noise = [&](int count) {
    for (int i = 0; i < count; ++i) {
      const auto& tpl = kNoise[rng.next_below(std::size(kNoise))];
      synthetic(tpl.method, format_noise_url(tpl.url, static_cast<unsigned>(rng.next_below(9000) + 100)),
                tpl.status, tpl.content_type, tpl.body);
    }
  };

  if (scenario.has_app_server()) {
    app_call({"GET", "/api/config", "", {}, ""});
  }
  emit_noise(noise_total / 2);

  std::string token;
  if (scenario.token_auth()) {
    if (scenario.recording.record_mint_entry) {
      GymRequest mint;
      mint.method = "POST";
      if (scenario.quota.token_oracle == TokenOracle::Open) {
        mint.path = "/auth/guest";
        mint.body = "{}";
      } else {
        mint.path = "/auth/purchase";
        mint.body = json{{"receipt", scenario.receipt()}}.dump();
      }
      GymResponse resp = app_call(mint);
      if (resp.status != 200) throw Error(scenario.id + ": recording mint failed");
      token = json::parse(resp.body).at("token").get<std::string>();
    } else {
      // Provisioned out-of-band: valid on the backend, absent from traffic.
      token = core.record_mint();
    }
  }

  if (scenario.recording.unrelated_token_call) {
    synthetic("POST", recording_base(kRoleAppServer) + "/api/profile", 200,
              "application/json", "{\"ok\":true}",
              {{"Authorization", "Bearer unrelated-" + util::hex32_of(scenario.id)}});
  }

  if (scenario.recording.log_beacon && scenario.has_app_server()) {
    GymRequest beacon;
    beacon.method = "POST";
    beacon.path = "/log";
    beacon.body = json{{"event", "lm_query"}, {"text", q.text}}.dump();
    app_call(beacon);
  }

  for (int i = 0; i < scenario.recording.queries; ++i) {
    if (scenario.topology == model::Topology::DirectThirdParty) {
      GymRequest req;
      req.method = "POST";
      req.path = profile.chat_path;
      std::string body_template = profile.request_template;
      auto slot = body_template.find("{user_query}");
      body_template.replace(slot, 12, json_escape(q.text));
      req.body = body_template;
      if (!profile.auth_header.empty()) {
        req.headers.emplace_back(profile.auth_header,
                                 profile.auth_value_prefix + scenario.provider_key());
      } else if (!profile.key_query_param.empty()) {
        req.query_string = profile.key_query_param + "=" + scenario.provider_key();
      }
      GymResponse resp = core.handle_lm(req);
      record_exchange(kRoleLmStub, req, resp);
      continue;
    }

    // The app-side message the scripted session types. Input boxes limited
    // only in the UI truncate here; the server would accept more.
    std::string message = q.text;
    if (scenario.input_length.enforcement == InputEnforcement::UiOnly &&
        scenario.input_length.limit > 0 &&
        message.size() > static_cast<std::size_t>(scenario.input_length.limit)) {
      message = message.substr(0, static_cast<std::size_t>(scenario.input_length.limit));
    }

    if (scenario.moderation.mode == ModerationMode::DedicatedClientRouted) {
      GymRequest mod;
      mod.method = "POST";
      mod.path = "/v1/moderate";
      mod.body = json{{"text", message}}.dump();
      GymResponse resp = core.handle_moderation(mod);
      record_exchange(kRoleModeration, mod, resp);
    }

    GymRequest chat;
    chat.method = "POST";
    chat.path = "/api/chat";

    json body;
    if (!scenario.topic.choices.empty()) {
      body = json{{"choice", scenario.topic.choices.front()}, {"note", message}};
    } else if (scenario.topic.enforcement == TopicEnforcement::StructuredInput &&
               scenario.topic.policy == TopicPolicy::Restricted) {
      body = json{{"input",
                   {{"code", message},
                    {"language", "python"},
                    {"errorMessage", ""},
                    {"courseTitle", "Introduction"},
                    {"instructions", "solve the exercise"}}}};
    } else if (scenario.topic.enforcement == TopicEnforcement::NoInput &&
               scenario.topic.policy == TopicPolicy::Restricted) {
      body = json{{"action", "daily_tip"}, {"prompt", message}};
    } else {
      std::string text = message;
      if (scenario.preprompt.location == PrepromptLocation::App) {
        text = scenario.preprompt_text() + " " + text;
      }
      body = json{{"message", text}};
      if (scenario.token_cap_active() &&
          scenario.output.max_tokens_source == MaxTokensSource::Client) {
        body["max_tokens"] = scenario.output.max_tokens;
      }
    }
    chat.body = body.dump();

    if (scenario.token_binding.content_bound) {
      chat.headers.emplace_back("X-Query-Token", core.content_token(message));
    } else if (!token.empty()) {
      chat.headers.emplace_back("Authorization", "Bearer " + token);
    }
    GymResponse resp = app_call(chat);
    if (resp.status != 200) {
      throw Error(scenario.id + ": recording query failed with status " +
                  std::to_string(resp.status));
    }
  }

  emit_noise(noise_total - noise_total / 2);

  recording.final_state = core.state_snapshot();
  recording.final_state.lm_bound_requests = 0;  // recording traffic is the app's own
  return recording;
}

std::string emit_fixture_har(const GymScenario& scenario, const har::CanonicalQuery& q) {
  return har::make_har_document(run_recording(scenario, q).entries);
}

namespace {

void write_tree_file(const std::filesystem::path& root, const std::string& relative,
                     const std::string& content) {
  util::write_file_atomic(root / relative, content);
}

std::string provider_fixture_url(const providers::ProviderProfile& profile) {
  std::string host = profile.url_marker.substr(0, profile.url_marker.find('/'));
  return "https://" + host + profile.chat_path;
}

}  // namespace

void emit_fixture_tree(const GymScenario& scenario, const std::filesystem::path& out_dir,
                       const TreeOptions& options) {
  const auto& profile = providers::profile_for(scenario.credentials.provider);
  util::DeterministicRng rng("tree:" + scenario.id + ":" + std::to_string(options.seed));
  std::string pkg = "com.app" + util::hex64(rng.next()).substr(0, 6);
  std::string pkg_path = "sources/" + pkg;
  for (auto& c : pkg_path) {
    if (c == '.') c = '/';
  }

  std::string url = provider_fixture_url(profile);
  std::string key = scenario.provider_key();

  std::string client;
  client += "package " + pkg + ".network;\n\n";
  client += "public final class LmClient {\n";
  if (options.split_string_obfuscation) {
    std::size_t cut = url.size() / 2;
    client += "    private static final String U1 = \"" + url.substr(0, cut) + "\";\n";
    client += "    private static final String U2 = \"" + url.substr(cut) + "\";\n";
    client += "    private static final String API_URL = U1 + U2;\n";
    if (scenario.credentials.hardcoded_key) {
      std::size_t kcut = key.size() / 2;
      client += "    private static final String K1 = \"" + key.substr(0, kcut) + "\";\n";
      client += "    private static final String K2 = \"" + key.substr(kcut) + "\";\n";
      client += "    private static final String API_KEY = K1 + K2;\n";
    }
  } else {
    client += "    private static final String API_URL = \"" + url + "\";\n";
    if (scenario.credentials.hardcoded_key && options.layout == TreeLayout::InlineJava) {
      client += "    private static final String API_KEY = \"" + key + "\";\n";
    }
  }
  client += "\n    public String endpoint() { return API_URL; }\n";
  client += "}\n";
  write_tree_file(out_dir, pkg_path + "/network/LmClient.java", client);

  if (scenario.credentials.hardcoded_key && options.layout == TreeLayout::Resources &&
      !options.split_string_obfuscation) {
    std::string strings_xml;
    strings_xml += "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<resources>\n";
    strings_xml += "    <string name=\"app_name\">Assistant</string>\n";
    strings_xml += "    <string name=\"lm_api_key\">" + key + "</string>\n";
    strings_xml += "</resources>\n";
    write_tree_file(out_dir, "res/values/strings.xml", strings_xml);
  } else {
    write_tree_file(out_dir, "res/values/strings.xml",
                    "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<resources>\n    <string "
                    "name=\"app_name\">Assistant</string>\n</resources>\n");
  }

  write_tree_file(out_dir, pkg_path + "/MainActivity.java",
                  "package " + pkg +
                      ";\n\npublic class MainActivity {\n    // decompiled stub\n    "
                      "void onCreate() { }\n}\n");
  write_tree_file(out_dir, "AndroidManifest.xml",
                  "<manifest package=\"" + pkg + "\">\n  <application/>\n</manifest>\n");
  write_tree_file(out_dir, "assets/config.json",
                  json{{"flavor", "release"}, {"build", rng.next_below(4000) + 100}}.dump(2) +
                      "\n");
  write_tree_file(out_dir, "README.txt",
                  "Decompiled with jadx (fixture). Package: " + pkg + "\n");
  // a binary-ish resource the line scanner must stream over without choking
  std::string blob;
  for (int i = 0; i < 64; ++i) blob += static_cast<char>(rng.next_below(256));
  write_tree_file(out_dir, "assets/blob.bin", blob);
}

void emit_fixture_bundle(const GymScenario& scenario, const std::filesystem::path& out_dir,
                         const har::CanonicalQuery& q) {
  Recording recording = run_recording(scenario, q);
  util::write_file_atomic(out_dir / "traffic.har",
                          har::make_har_document(recording.entries));
  json manifest = recording.manifest;
  util::write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  if (scenario.credentials.hardcoded_key) {
    emit_fixture_tree(scenario, out_dir / "tree");
  }
}

}  // namespace lmaudit::gym
