#include "lmaudit/gym/server.hpp"

#include <chrono>
#include <functional>
#include <thread>

#include <httplib.h>

#include "lmaudit/gym/fixtures.hpp"
#include "lmaudit/model/error.hpp"

namespace lmaudit::gym {

std::map<std::string, std::string> GymBaseUrls::role_map() const {
  return {
      {kRoleAppServer, app_server},
      {kRoleLmStub, lm_stub},
      {kRoleModeration, moderation},
      {kRoleApiServer, api_server},
  };
}

struct GymInstance::Listener {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  ~Listener() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

namespace {

GymRequest to_gym_request(const httplib::Request& req) {
  GymRequest out;
  out.method = req.method;
  out.path = req.path;
  auto qpos = req.target.find('?');
  if (qpos != std::string::npos) out.query_string = req.target.substr(qpos + 1);
  for (const auto& [name, value] : req.headers) out.headers.emplace_back(name, value);
  out.body = req.body;
  return out;
}

std::unique_ptr<GymInstance::Listener> start_listener(
    GymCore& core, GymResponse (GymCore::*handler)(const GymRequest&), int port) {
  auto listener = std::make_unique<GymInstance::Listener>();
  auto handle = [&core, handler](const httplib::Request& req, httplib::Response& res) {
    GymResponse out = (core.*handler)(to_gym_request(req));
    res.status = out.status;
    if (!out.body.empty() || out.status != 204) {
      res.set_content(out.body, out.content_type);
    }
  };
  listener->server.Get(".*", handle);
  listener->server.Post(".*", handle);

  if (port == 0) {
    listener->port = listener->server.bind_to_any_port("127.0.0.1");
    if (listener->port <= 0) throw IoError("gym listener failed to bind");
  } else {
    if (!listener->server.bind_to_port("127.0.0.1", port)) {
      throw IoError("gym listener failed to bind port " + std::to_string(port));
    }
    listener->port = port;
  }
  listener->thread = std::thread([l = listener.get()] { l->server.listen_after_bind(); });
  for (int i = 0; i < 2000 && !listener->server.is_running(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  if (!listener->server.is_running()) throw IoError("gym listener did not start");
  return listener;
}

std::string base_of(int port) { return "http://127.0.0.1:" + std::to_string(port); }

}  // namespace

std::unique_ptr<GymInstance> GymInstance::serve(const GymScenario& scenario,
                                                const har::CanonicalQuery& q,
                                                std::optional<GymState> state,
                                                const GymPorts& ports) {
  scenario.validate();
  GymState initial = state ? std::move(*state)
                           : run_recording(scenario, q).final_state;

  auto instance = std::unique_ptr<GymInstance>(new GymInstance());
  instance->core_ =
      std::make_unique<GymCore>(scenario, GymMode::Serving, q, std::move(initial));

  instance->listeners_.push_back(
      start_listener(*instance->core_, &GymCore::handle_app, ports.app_server));
  instance->listeners_.push_back(
      start_listener(*instance->core_, &GymCore::handle_lm, ports.lm_stub));
  instance->listeners_.push_back(
      start_listener(*instance->core_, &GymCore::handle_moderation, ports.moderation));
  instance->listeners_.push_back(
      start_listener(*instance->core_, &GymCore::handle_api, ports.api_server));

  instance->urls_.app_server = base_of(instance->listeners_[0]->port);
  instance->urls_.lm_stub = base_of(instance->listeners_[1]->port);
  instance->urls_.moderation = base_of(instance->listeners_[2]->port);
  instance->urls_.api_server = base_of(instance->listeners_[3]->port);
  instance->urls_.token_endpoint = instance->urls_.app_server + "/auth";
  return instance;
}

GymInstance::~GymInstance() { stop(); }

void GymInstance::stop() { listeners_.clear(); }

}  // namespace lmaudit::gym
