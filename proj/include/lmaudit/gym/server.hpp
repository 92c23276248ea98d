#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "lmaudit/gym/core.hpp"

namespace lmaudit::gym {

struct GymBaseUrls {
  std::string app_server;
  std::string lm_stub;
  std::string moderation;
  std::string api_server;
  std::string token_endpoint;  // app_server + /auth

  std::map<std::string, std::string> role_map() const;
};

struct GymPorts {
  int app_server = 0;  // 0 picks a free port
  int lm_stub = 0;
  int moderation = 0;
  int api_server = 0;
};

/// A running scenario: four listeners backed by one GymCore. Unless an
/// explicit state is supplied, the instance starts from the state the
/// scripted fixture session left behind, so fixture HARs and the live
/// target describe the same world.
class GymInstance {
 public:
  static std::unique_ptr<GymInstance> serve(
      const GymScenario& scenario,
      const har::CanonicalQuery& q = har::default_canonical_query(),
      std::optional<GymState> state = std::nullopt, const GymPorts& ports = {});

  ~GymInstance();
  GymInstance(const GymInstance&) = delete;
  GymInstance& operator=(const GymInstance&) = delete;

  void stop();

  const GymBaseUrls& base_urls() const { return urls_; }
  GymCore& core() { return *core_; }

  struct Listener;

 private:
  GymInstance() = default;

  std::unique_ptr<GymCore> core_;
  std::vector<std::unique_ptr<Listener>> listeners_;
  GymBaseUrls urls_;
};

}  // namespace lmaudit::gym
