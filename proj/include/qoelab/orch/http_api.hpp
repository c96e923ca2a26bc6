#pragma once

#include <memory>

#include "qoelab/orch/ratings.hpp"

namespace httplib {
class Server;
}

namespace qoelab::orch {

// Routes:
//   GET  /sessions/{s}/parts/{p}/playlist
//   POST /sessions/{s}/parts/{p}/items/{n}/start
//   GET  /media/{run_id}/manifest
//   POST /ratings
//   GET  /progress/{rater_id}
//   GET  /export
// The service must outlive the server.
std::unique_ptr<httplib::Server> make_http_server(RatingService& service);

}  // namespace qoelab::orch
