#include "qoelab/orch/http_api.hpp"

#include <string>

#include <httplib.h>

namespace qoelab::orch {

namespace {

void reply(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

std::unique_ptr<httplib::Server> make_http_server(RatingService& service) {
  auto server = std::make_unique<httplib::Server>();
  server->Get(R"(/sessions/(\d+)/parts/(\d+)/playlist)",
              [&service](const httplib::Request& req, httplib::Response& res) {
                reply(res, service.playlist(std::stoi(req.matches[1]), std::stoi(req.matches[2])));
              });
  server->Post(R"(/sessions/(\d+)/parts/(\d+)/items/(\d+)/start)",
               [&service](const httplib::Request& req, httplib::Response& res) {
                 reply(res, service.item_start(std::stoi(req.matches[1]),
                                               std::stoi(req.matches[2]),
                                               std::stoi(req.matches[3]), req.body));
               });
  server->Get(R"(/media/([^/]+)/manifest)",
              [&service](const httplib::Request& req, httplib::Response& res) {
                reply(res, service.manifest(req.matches[1].str()));
              });
  server->Post("/ratings", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.post_rating(req.body));
  });
  server->Get(R"(/progress/([^/]+))",
              [&service](const httplib::Request& req, httplib::Response& res) {
                reply(res, service.progress(req.matches[1].str()));
              });
  server->Get("/export", [&service](const httplib::Request&, httplib::Response& res) {
    reply(res, service.export_ratings());
  });
  return server;
}

}  // namespace qoelab::orch
