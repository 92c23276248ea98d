#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lmaudit/gym/core.hpp"
#include "lmaudit/har/model.hpp"

namespace lmaudit::gym {

/// Role names used in fixture manifests and target bindings.
inline constexpr const char* kRoleAppServer = "app_server";
inline constexpr const char* kRoleLmStub = "lm_stub";
inline constexpr const char* kRoleModeration = "moderation";
inline constexpr const char* kRoleApiServer = "api_server";

/// Fixed synthetic hosts used in recorded fixtures. Verification instances
/// bind to fresh ports; the manifest maps recorded hosts back to roles.
std::map<std::string, std::string> recording_host_roles();
std::string recording_base(const std::string& role);

struct FixtureManifest {
  std::string scenario_id;
  std::map<std::string, std::string> host_roles;  // "127.0.0.1:18080" -> role

  std::string role_for_host(const std::string& host_port) const;
};

void to_json(json& j, const FixtureManifest& m);
void from_json(const json& j, FixtureManifest& m);

/// The scripted app session: entries the instrumented app would produce
/// (launch chatter, noise, token mint, canonical queries) and the backend
/// state it leaves behind. serve() starts from exactly this state, so a
/// fixture and its live target stay consistent.
struct Recording {
  std::vector<har::HarEntry> entries;
  GymState final_state;
  FixtureManifest manifest;
};

Recording run_recording(const GymScenario& scenario,
                        const har::CanonicalQuery& q = har::default_canonical_query());

/// HAR 1.2 document of the scripted session (noise included).
std::string emit_fixture_har(const GymScenario& scenario,
                             const har::CanonicalQuery& q = har::default_canonical_query());

enum class TreeLayout { InlineJava, Resources };

struct TreeOptions {
  TreeLayout layout = TreeLayout::InlineJava;
  unsigned seed = 0;
  bool split_string_obfuscation = false;  // the documented static-scan miss
};

/// Write a plausible decompiled-app source tree; embeds the provider's URL
/// marker always and the scenario key iff credentials.hardcoded_key.
void emit_fixture_tree(const GymScenario& scenario, const std::filesystem::path& out_dir,
                       const TreeOptions& options = {});

/// Write traffic.har, manifest.json, and tree/ under out_dir.
void emit_fixture_bundle(const GymScenario& scenario, const std::filesystem::path& out_dir,
                         const har::CanonicalQuery& q = har::default_canonical_query());

}  // namespace lmaudit::gym
