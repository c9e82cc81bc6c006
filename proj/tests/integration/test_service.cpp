#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include "schema_check.hpp"
#include "spurlens/service.hpp"
#include "support.hpp"

using namespace spurlens;

namespace {

const testing::SchemaCheck& schema() {
  static const testing::SchemaCheck s(Json::parse(testing::read_text(SCHEMA_PATH)));
  return s;
}

struct Client {
  Service& svc;

  Response call(std::string_view method, std::string_view path, const Json& body = nullptr,
                const Service::Query& q = {}) {
    return svc.handle(method, path, q, body.is_null() ? "" : body.dump());
  }
  Response raw(std::string_view method, std::string_view path, std::string_view body) {
    return svc.handle(method, path, {}, body);
  }
};

void check_error_body(const Response& r) {
  CHECK(r.status >= 400);
  CHECK(schema().valid(r.body, "error"));
}

std::string upload(Client& c, const std::string& file) {
  const auto r = c.raw("POST", "/datasets", testing::read_text(testing::data_path(file)));
  REQUIRE(r.status == 201);
  return r.body["dataset_id"].get<std::string>();
}

std::string session(Client& c, const Json& body) {
  const auto r = c.call("POST", "/sessions", body);
  REQUIRE(r.status == 201);
  return r.body["session_id"].get<std::string>();
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("upload and session validation") {
  Service svc;
  Client c{svc};
  const auto up = c.raw("POST", "/datasets", testing::read_text(testing::data_path("lalonde_psid.csv")));
  REQUIRE(up.status == 201);
  CHECK(schema().valid(up.body, "dataset"));
  CHECK(up.body["n_rows"] == 614);
  const std::string id = up.body["dataset_id"];
  CHECK(id.starts_with("ds-"));

  const auto same = c.call("POST", "/sessions", {{"dataset_id", id}, {"cause", "re78"}, {"outcome", "re78"}});
  CHECK(same.status == 400);
  CHECK(same.body["message"] == "cause equals outcome");
  check_error_body(same);

  const auto missing = c.call("POST", "/sessions", {{"dataset_id", "ds-nope"}, {"cause", "treat"}, {"outcome", "re78"}});
  CHECK(missing.status == 404);
  check_error_body(missing);

  const auto bad = c.call("POST", "/sessions", {{"dataset_id", id}, {"cause", "treat"}, {"outcome", "nope"}});
  CHECK(bad.status == 400);
  check_error_body(bad);

  const auto garbage = c.raw("POST", "/sessions", "{not json");
  CHECK(garbage.status == 400);
  CHECK(garbage.body["error_code"] == "parse_error");
  check_error_body(garbage);

  const auto ragged = c.raw("POST", "/datasets", "a,b\n1,2\n3\n");
  CHECK(ragged.status == 400);
  check_error_body(ragged);
}

TEST_CASE("state machine and unknown ids") {
  Service svc;
  Client c{svc};
  const std::string ds = upload(c, "reversal.csv");
  const std::string s = session(c, {{"dataset_id", ds}, {"cause", "treated"}, {"outcome", "recovered"}});

  const auto early = c.call("GET", "/sessions/" + s + "/diagnosis", nullptr, {{"subgroup", "1"}, {"B", "200"}});
  CHECK(early.status == 409);
  CHECK(early.body["error_code"] == "partition_required");
  check_error_body(early);
  CHECK(c.call("GET", "/sessions/" + s + "/subgroups").status == 409);

  const auto pop = c.call("GET", "/sessions/" + s + "/diagnosis", nullptr, {{"B", "200"}});
  CHECK(pop.status == 200);
  CHECK(schema().valid(pop.body, "diagnosis"));

  for (const auto& r : {c.call("GET", "/sessions/s-99/confounders"), c.call("GET", "/nowhere"),
                        c.call("DELETE", "/sessions/" + s + "/confounders")}) {
    CHECK(r.status == 404);
    check_error_body(r);
  }

  const auto rules = c.call("POST", "/sessions/" + s + "/partition", {{"manual", {{"rules", {{{"covariate", "nope"}}}}}}});
  CHECK(rules.status == 400);
  check_error_body(rules);
  const auto both = c.call("POST", "/sessions/" + s + "/partition", {{"manual", Json::array()}, {"auto", Json::object()}});
  CHECK(both.status == 400);

  const auto names = c.call("PUT", "/sessions/" + s + "/confounders", {{"names", {"recovered"}}});
  CHECK(names.status == 400);
  check_error_body(names);
  const auto ok = c.call("PUT", "/sessions/" + s + "/confounders", {{"names", {"stratum"}}});
  CHECK(ok.status == 200);
  CHECK(ok.body["confounders"] == Json{"stratum"});
  CHECK(schema().valid(ok.body, "config"));

  const auto part = c.call("POST", "/sessions/" + s + "/partition",
                           {{"manual", Json::parse(testing::read_text(testing::data_path("reversal_rules.json")))}});
  REQUIRE(part.status == 200);
  CHECK(schema().valid(part.body, "partition"));
  CHECK(part.body["subgroups"].size() == 2);
  for (int g : {1, 2}) {
    const auto d = c.call("GET", "/sessions/" + s + "/diagnosis", nullptr, {{"subgroup", std::to_string(g)}, {"B", "200"}});
    REQUIRE(d.status == 200);
    CHECK(d.body["simpson_warning"]["flag"] == true);
    CHECK(d.body["simpson_warning"]["message"] == "Simpson's Paradox");
  }
  const auto nosuch = c.call("GET", "/sessions/" + s + "/diagnosis", nullptr, {{"subgroup", "7"}, {"B", "200"}});
  CHECK(nosuch.status == 404);
  const auto fewb = c.call("GET", "/sessions/" + s + "/diagnosis", nullptr, {{"B", "10"}});
  CHECK(fewb.status == 400);
  check_error_body(fewb);
  const auto badq = c.call("GET", "/sessions/" + s + "/storyboard", nullptr, {{"L", "four"}});
  CHECK(badq.status == 400);
  check_error_body(badq);
}

TEST_CASE("degenerate analyses return 422 with the engine error name") {
  Service svc;
  Client c{svc};
  const auto up = c.raw("POST", "/datasets", "x,y,z\n0,1,5\n1,2,5\n0,3,5\n1,4,5\n0,5,5\n1,6,5\n");
  REQUIRE(up.status == 201);
  const std::string s = session(c, {{"dataset_id", up.body["dataset_id"]}, {"cause", "x"}, {"outcome", "y"}});
  const auto r = c.call("POST", "/sessions/" + s + "/partition", {{"auto", {{"target_leaves", 2}, {"min_leaf_size", 2}}}});
  CHECK(r.status == 422);
  check_error_body(r);
  CHECK(r.body["error_code"] == "single_leaf");
}

TEST_CASE("payload cap returns 413") {
  ServiceConfig cfg;
  cfg.max_upload_bytes = 64;
  Service svc(cfg);
  Client c{svc};
  const auto r = c.raw("POST", "/datasets", std::string(200, 'a'));
  CHECK(r.status == 413);
  CHECK(r.body["error_code"] == "payload_too_large");
  check_error_body(r);

  ServiceConfig rows;
  rows.max_rows = 3;
  Service small(rows);
  Client sc{small};
  const auto many = sc.raw("POST", "/datasets", "a,b\n1,2\n3,4\n5,6\n7,8\n");
  CHECK(many.status == 413);
  check_error_body(many);
}

TEST_CASE("full Lalonde flow is 2xx and schema-valid") {
  Service svc;
  Client c{svc};
  const std::string ds = upload(c, "lalonde_psid.csv");
  const std::string s = session(c, {{"dataset_id", ds}, {"cause", "treat"}, {"outcome", "re78"}, {"seed", 7}});
  const std::string base = "/sessions/" + s;

  const auto ranking = c.call("GET", base + "/confounders");
  REQUIRE(ranking.status == 200);
  CHECK(schema().valid(ranking.body, "ranking"));
  CHECK(ranking.body["entries"].size() == 8);

  const auto part = c.call("POST", base + "/partition", {{"auto", {{"target_leaves", 4}, {"min_leaf_size", 20}}}});
  REQUIRE(part.status == 200);
  CHECK(schema().errors(part.body, "partition").empty());
  CHECK(part.body["subgroups"].size() == 4);

  const auto viewer = c.call("GET", base + "/subgroups");
  REQUIRE(viewer.status == 200);
  CHECK(schema().errors(viewer.body, "viewer").empty());

  const auto story = c.call("GET", base + "/storyboard", nullptr, {{"L", "4"}});
  REQUIRE(story.status == 200);
  CHECK(schema().errors(story.body, "storyboard").empty());
  CHECK(story.body["subgroups"].size() == 4);

  for (int g = 0; g <= 4; ++g) {
    Service::Query q{{"B", "200"}};
    if (g) q["subgroup"] = std::to_string(g);
    const auto d = c.call("GET", base + "/diagnosis", nullptr, q);
    REQUIRE(d.status == 200);
    const auto errs = schema().errors(d.body, "diagnosis");
    CHECK_MESSAGE(errs.empty(), (errs.empty() ? "" : errs.front()));
  }
}

TEST_CASE("identical request sequences give identical payloads") {
  auto run = [] {
    Service svc;
    Client c{svc};
    const std::string ds = upload(c, "lalonde_psid.csv");
    const std::string s = session(c, {{"dataset_id", ds}, {"cause", "treat"}, {"outcome", "re78"}, {"seed", 3}});
    const std::string base = "/sessions/" + s;
    std::string out;
    out += c.call("POST", base + "/partition", {{"auto", {{"target_leaves", 3}, {"min_leaf_size", 20}}}}).body.dump();
    out += c.call("GET", base + "/confounders").body.dump();
    out += c.call("GET", base + "/subgroups").body.dump();
    out += c.call("GET", base + "/storyboard").body.dump();
    out += c.call("GET", base + "/diagnosis", nullptr, {{"subgroup", "2"}, {"B", "300"}}).body.dump();
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("sessions survive a restart through snapshots") {
  const auto dir = std::filesystem::temp_directory_path() / ("spurlens-snap-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  ServiceConfig cfg;
  cfg.data_dir = dir;
  std::string ds, s, before;
  {
    Service svc(cfg);
    Client c{svc};
    ds = upload(c, "reversal.csv");
    s = session(c, {{"dataset_id", ds}, {"cause", "treated"}, {"outcome", "recovered"}});
    c.call("POST", "/sessions/" + s + "/partition", {{"manual", {{"rules", {{{"covariate", "stratum"}}}}}}});
    before = c.call("GET", "/sessions/" + s + "/storyboard").body.dump();
  }
  Service again(cfg);
  Client c{again};
  const auto after = c.call("GET", "/sessions/" + s + "/storyboard");
  CHECK(after.status == 200);
  CHECK(after.body.dump() == before);
  CHECK(session(c, {{"dataset_id", ds}, {"cause", "treated"}, {"outcome", "recovered"}}) != s);
  std::filesystem::remove_all(dir);
}

TEST_CASE("loopback HTTP round trip") {
  Service svc;
  httplib::Server server;
  mount(svc, server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  const auto up = cli.Post("/datasets", testing::read_text(testing::data_path("reversal.csv")), "text/csv");
  REQUIRE(up);
  CHECK(up->status == 201);
  const Json ds = Json::parse(up->body);
  const Json req{{"dataset_id", ds["dataset_id"]}, {"cause", "treated"}, {"outcome", "recovered"}};
  const auto sess = cli.Post("/sessions", req.dump(), "application/json");
  REQUIRE(sess);
  CHECK(sess->status == 201);
  const std::string sid = Json::parse(sess->body)["session_id"];

  const auto diag = cli.Get("/sessions/" + sid + "/diagnosis?B=200");
  REQUIRE(diag);
  CHECK(diag->status == 200);
  const auto direct = svc.handle("GET", "/sessions/" + sid + "/diagnosis", {{"B", "200"}}, "");
  CHECK(diag->body == direct.body.dump());

  const auto missing = cli.Get("/sessions/" + sid + "/subgroups");
  REQUIRE(missing);
  CHECK(missing->status == 409);
  CHECK(schema().valid(Json::parse(missing->body), "error"));

  server.stop();
  t.join();
}

}
