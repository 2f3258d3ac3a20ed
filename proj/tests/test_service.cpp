#include <gtest/gtest.h>

#include <thread>

#include "feqtee/service_http.hpp"

using namespace feqtee;
using nlohmann::json;

namespace {

json call(SessionService& s, const std::string& method, const std::string& path, const json& body = json::object(),
          int expect = 200) {
  const Reply r = s.handle(method, path, body.dump());
  EXPECT_EQ(r.status, expect) << method << " " << path << ": " << r.body;
  return json::parse(r.body);
}

int top_face(const json& mesh) {
  const auto& v = mesh["vertices"];
  const auto& f = mesh["faces"];
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool top = true;
    for (int id : f[i]) top = top && v[id][2].get<double>() > 0.99;
    if (top) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

TEST(Service, CubePickApplyUndo) {
  SessionService svc;
  const json created = call(svc, "POST", "/sessions", {{"preset", "cube"}}, 201);
  const std::string id = created["session"];
  const json got = call(svc, "GET", "/sessions/" + id + "/mesh");
  EXPECT_EQ(got["mesh"]["vertices"].size(), 8u);
  EXPECT_EQ(got["mesh"]["faces"].size(), 6u);
  EXPECT_EQ(got["mesh"]["format"], kWireFormat);

  const json libs = call(svc, "GET", "/libraries");
  ASSERT_EQ(libs["libraries"][0]["name"], "demo");

  const int top = top_face(got["mesh"]);
  const json picked = call(svc, "POST", "/sessions/" + id + "/pick", {{"faces", {top}}});
  EXPECT_TRUE(picked["valid"].get<bool>());
  EXPECT_EQ(picked["boundary"].size(), 4u);

  const json applied = call(svc, "POST", "/sessions/" + id + "/apply", {{"library", "demo"}, {"record", 0}});
  EXPECT_EQ(applied["mesh"]["faces"].size(), 10u);
  EXPECT_EQ(applied["trace"][0]["faces"], 10);
  EXPECT_TRUE(mesh_from_wire(applied["mesh"]).is_closed());

  const json undone = call(svc, "POST", "/sessions/" + id + "/undo");
  EXPECT_EQ(undone["mesh"], got["mesh"]);
  call(svc, "POST", "/sessions/" + id + "/undo", json::object(), 409);
}

TEST(Service, StepThroughAProgram) {
  SessionService svc;
  const std::string id = call(svc, "POST", "/sessions", json::object(), 201)["session"];
  const int top = top_face(call(svc, "GET", "/sessions/" + id + "/mesh")["mesh"]);
  call(svc, "POST", "/sessions/" + id + "/pick", {{"faces", {top}}});
  call(svc, "POST", "/sessions/" + id + "/program", {{"tee", "E0 E0"}});
  const json s1 = call(svc, "POST", "/sessions/" + id + "/step");
  EXPECT_EQ(s1["mesh"]["faces"].size(), 10u);
  EXPECT_FALSE(s1["done"].get<bool>());
  const json s2 = call(svc, "POST", "/sessions/" + id + "/step");
  EXPECT_EQ(s2["mesh"]["faces"].size(), 14u);
  EXPECT_TRUE(s2["done"].get<bool>());
  call(svc, "POST", "/sessions/" + id + "/step", json::object(), 422);
  const json back = call(svc, "POST", "/sessions/" + id + "/undo");
  EXPECT_EQ(back["mesh"], s1["mesh"]);
  const json again = call(svc, "POST", "/sessions/" + id + "/step");
  EXPECT_EQ(again["mesh"], s2["mesh"]);

  // Exported OBJ describes the served mesh.
  const Reply obj = svc.handle("GET", "/sessions/" + id + "/export", "");
  EXPECT_EQ(obj.content_type, "text/plain");
  EXPECT_EQ(mesh_to_wire(parse_obj(obj.body)), again["mesh"]);
}

TEST(Service, StructuredErrors) {
  SessionService svc;
  call(svc, "GET", "/sessions/nope/mesh", json::object(), 404);
  call(svc, "GET", "/nothing", json::object(), 404);
  const std::string id = call(svc, "POST", "/sessions", {{"preset", "cube"}}, 201)["session"];
  const json bad = call(svc, "POST", "/sessions/" + id + "/pick", {{"faces", {0, 1, 2, 3, 4, 5}}}, 422);
  EXPECT_FALSE(bad["valid"].get<bool>());
  call(svc, "POST", "/sessions/" + id + "/pick", {{"faces", {0, 2}}}, 200);
  const json unknown = call(svc, "POST", "/sessions/" + id + "/apply", {{"record", 42}}, 422);
  EXPECT_EQ(unknown["error"]["kind"], "unknown-extrusion");
  const json syntax = call(svc, "POST", "/sessions/" + id + "/apply", {{"tee", "E0 zz"}}, 422);
  EXPECT_EQ(syntax["error"]["kind"], "syntax");
  EXPECT_EQ(syntax["error"]["position"], 3);
  EXPECT_EQ(svc.handle("POST", "/sessions/" + id + "/pick", "{not json").status, 400);
  EXPECT_EQ(svc.handle("POST", "/sessions", "v 0 0 0\nf 1 2 3\n").status, 422);
  // The failed mutations left the mesh untouched.
  EXPECT_EQ(call(svc, "GET", "/sessions/" + id + "/mesh")["mesh"]["faces"].size(), 6u);
}

TEST(Service, OverHttp) {
  SessionService svc;
  httplib::Server server;
  bind_service(server, svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/sessions", R"({"preset":"cube"})", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const std::string id = json::parse(created->body)["session"];
  auto mesh = client.Get("/sessions/" + id + "/mesh");
  ASSERT_TRUE(mesh);
  EXPECT_EQ(json::parse(mesh->body)["mesh"]["faces"].size(), 6u);
  auto missing = client.Get("/sessions/zzz/mesh");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  server.stop();
  t.join();
}
