#pragma once

// Eigen before httplib: <resolv.h>, pulled in by httplib, defines a `_res`
// macro that clashes with Eigen parameter names.
#include "feqtee/service.hpp"

#include <httplib.h>

namespace feqtee {

/// Forward every request of `server` to `service`.
inline void bind_service(httplib::Server& server, SessionService& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const Reply r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/.*)", forward);
  server.Post(R"(/.*)", forward);
  server.Delete(R"(/.*)", forward);
}

}  // namespace feqtee
