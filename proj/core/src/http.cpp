#include <httplib.h>

#include "cbkb/service.hpp"

namespace cbkb {

namespace {

void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(2), "application/json");
}

bool agent_of(const httplib::Request& req, httplib::Response& res, std::string& agent) {
  agent = req.get_header_value("X-User");
  if (agent.empty()) {
    reply(res, {401, nlohmann::json{{"status", "error"}, {"error", "not-registered"},
                                    {"message", "X-User header required"}}});
    return false;
  }
  return true;
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  httplib::Server& server = impl_->server;

  server.Post("/command", [&](const httplib::Request& req, httplib::Response& res) {
    std::string agent;
    if (agent_of(req, res, agent)) reply(res, service.command(agent, req.body));
  });
  server.Post("/dry-run", [&](const httplib::Request& req, httplib::Response& res) {
    std::string agent;
    if (agent_of(req, res, agent)) reply(res, service.dry_run(agent, req.body));
  });
  server.Get(R"(/object/(.+))", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.object(req.matches[1]));
  });
  server.Get("/spec", [&](const httplib::Request& req, httplib::Response& res) {
    std::string root = req.has_param("root") ? req.get_param_value("root") : "thing";
    unsigned depth = 0;
    if (req.has_param("depth")) {
      try {
        depth = static_cast<unsigned>(std::stoul(req.get_param_value("depth")));
      } catch (const std::exception&) {
        reply(res, {400, nlohmann::json{{"status", "error"}, {"error", "parse-error"},
                                        {"message", "depth must be a number"}}});
        return;
      }
    }
    reply(res, service.spec(root, depth));
  });
  server.Get("/ratings", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.ratings(req.get_param_value("object")));
  });
  server.Put("/ratings", [&](const httplib::Request& req, httplib::Response& res) {
    std::string agent;
    if (!agent_of(req, res, agent)) return;
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("object") ||
        !body["object"].is_string() || !body.contains("criterion") ||
        !body["criterion"].is_string() || !body.contains("value") ||
        !body["value"].is_number()) {
      reply(res, {400, nlohmann::json{{"status", "error"}, {"error", "parse-error"},
                                      {"message", "expected {object, criterion, value}"}}});
      return;
    }
    std::string cmd = "rate " + body["object"].get<std::string>() + " " +
                      body["criterion"].get<std::string>() + " " +
                      nlohmann::json(body["value"].get<double>()).dump() + ";";
    reply(res, service.command(agent, cmd));
  });
  server.Get("/users", [&](const httplib::Request&, httplib::Response& res) {
    reply(res, service.users());
  });

}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void serve_http(Service& service, const std::string& host, int port) {
  HttpServer server(service);
  server.bind(host, port);
  server.run();
}

}  // namespace cbkb
