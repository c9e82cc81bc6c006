#include "spurlens/service.hpp"

#include <httplib.h>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spurlens/kernels.hpp"

namespace spurlens {

namespace fs = std::filesystem;

namespace {

Response error_response(const Error& e) { return {http_status(e.kind()), error_json(e)}; }

Json parse_body(std::string_view body) {
  try {
    return Json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse_error, "request body is not valid JSON", e.what());
  }
}

template <class T>
T parse_param(const Service::Query& q, const std::string& key, T fallback) {
  auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return fallback;
  T v{};
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorCode::invalid_argument, "query parameter '" + key + "' is not an integer", s);
  return v;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  return std::to_string(secs);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class T>
std::vector<T> string_list(const Json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return {};
  try {
    return body.at(key).get<std::vector<T>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("'") + key + "' must be a list of names", e.what());
  }
}

std::string required_string(const Json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body.at(key).is_string())
    throw Error(ErrorCode::invalid_config, std::string("'") + key + "' is required", key);
  return body.at(key).get<std::string>();
}

}  // namespace

int http_status(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation: return 400;
    case ErrorKind::degenerate: return 422;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::too_large: return 413;
  }
  return 500;
}

ServiceConfig service_config_from_env() {
  ServiceConfig c;
  if (const char* p = std::getenv("PORT")) c.port = std::atoi(p);
  if (const char* d = std::getenv("DATA_DIR"); d && *d) c.data_dir = fs::path(d);
  if (const char* m = std::getenv("MAX_UPLOAD_BYTES")) c.max_upload_bytes = std::strtoull(m, nullptr, 10);
  return c;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.data_dir) restore();
}

Response Service::handle(std::string_view method, std::string_view path, const Query& query,
                         std::string_view body) {
  try {
    if (body.size() > config_.max_upload_bytes)
      throw Error(ErrorCode::payload_too_large, "request body exceeds the upload cap",
                  std::to_string(config_.max_upload_bytes));
    if (path == "/datasets" && method == "POST") return upload(body);
    if (path == "/sessions" && method == "POST") return create_session(parse_body(body));
    constexpr std::string_view prefix = "/sessions/";
    if (path.starts_with(prefix)) {
      std::string_view tail = path.substr(prefix.size());
      const auto slash = tail.find('/');
      if (slash != std::string_view::npos)
        return route_session(method, tail.substr(0, slash), tail.substr(slash + 1), query, body);
    }
    throw Error(ErrorCode::not_found, "no such route", std::string(method) + " " + std::string(path));
  } catch (const Error& e) {
    return error_response(e);
  }
}

Response Service::upload(std::string_view body) {
  LoadOptions lo;
  lo.max_rows = config_.max_rows;
  auto ds = std::make_shared<const Dataset>(load_table(body, lo));
  {
    std::unique_lock lock(registry_mutex_);
    datasets_.try_emplace(ds->id(), ds);
  }
  if (config_.data_dir) {
    fs::create_directories(*config_.data_dir / "datasets");
    std::ofstream(*config_.data_dir / "datasets" / (ds->id() + ".csv"), std::ios::binary) << body;
  }
  return {201, dataset_json(*ds)};
}

Response Service::create_session(const Json& body) {
  if (!body.is_object()) throw Error(ErrorCode::invalid_argument, "session request must be an object");
  auto s = std::make_shared<Session>();
  s->dataset = find_dataset(required_string(body, "dataset_id"));
  s->cfg = make_config(*s->dataset, required_string(body, "cause"), required_string(body, "outcome"),
                       string_list<std::string>(body, "covariates"));
  if (body.contains("seed") && !body.at("seed").is_null()) {
    if (!body.at("seed").is_number_unsigned())
      throw Error(ErrorCode::invalid_argument, "'seed' must be a non-negative integer");
    s->seed = body.at("seed").get<std::uint64_t>();
  }
  s->created_at = timestamp();
  {
    std::unique_lock lock(registry_mutex_);
    s->id = "s-" + std::to_string(next_session_++);
    sessions_.emplace(s->id, s);
  }
  snapshot(*s);
  return {201, Json{{"session_id", s->id}}};
}

Response Service::route_session(std::string_view method, std::string_view id, std::string_view rest,
                                const Query& query, std::string_view body) {
  auto s = find_session(id);
  AnalysisOptions opts;
  opts.seed = s->seed;

  if (rest == "confounders" && method == "PUT") {
    const Json j = parse_body(body);
    if (!j.is_object() || !j.contains("names"))
      throw Error(ErrorCode::invalid_argument, "'names' is required", "names");
    std::unique_lock lock(s->mutex);
    CausalConfig next = s->cfg;
    next.confounders = string_list<std::string>(j, "names");
    validate_config(*s->dataset, next);
    s->cfg = std::move(next);
    snapshot(*s);
    return {200, config_json(s->cfg)};
  }
  if (rest == "confounders" && method == "GET") {
    std::shared_lock lock(s->mutex);
    return {200, ranking_payload(*s->dataset, s->cfg, opts)};
  }
  if (rest == "partition" && method == "POST") {
    const Json j = parse_body(body);
    std::unique_lock lock(s->mutex);
    s->partition = run_partition(*s->dataset, s->cfg, j, s->seed);
    s->partition_request = j;
    snapshot(*s);
    return {200, partition_json(*s->partition)};
  }
  if (rest == "subgroups" && method == "GET") {
    std::shared_lock lock(s->mutex);
    if (!s->partition)
      throw Error(ErrorCode::partition_required, "partition the session before viewing subgroups");
    return {200, viewer_payload(*s->dataset, s->cfg, *s->partition, opts)};
  }
  if (rest == "storyboard" && method == "GET") {
    opts.cause_bins = parse_param<std::size_t>(query, "L", kDefaultCauseBins);
    std::shared_lock lock(s->mutex);
    return {200, storyboard_payload(*s->dataset, s->cfg, s->partition ? &*s->partition : nullptr, opts)};
  }
  if (rest == "diagnosis" && method == "GET") {
    opts.replicates = parse_param<std::size_t>(query, "B", kDefaultReplicates);
    if (opts.replicates < kMinReplicates)
      throw Error(ErrorCode::invalid_argument, "'B' must be at least 100", std::to_string(opts.replicates));
    std::optional<int> subgroup;
    if (query.contains("subgroup") && !query.at("subgroup").empty())
      subgroup = parse_param<int>(query, "subgroup", 0);
    std::shared_lock lock(s->mutex);
    return {200, diagnosis_payload(*s->dataset, s->cfg, s->partition ? &*s->partition : nullptr,
                                   subgroup, opts)};
  }
  throw Error(ErrorCode::not_found, "no such route",
              std::string(method) + " /sessions/" + std::string(id) + "/" + std::string(rest));
}

std::shared_ptr<const Dataset> Service::find_dataset(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = datasets_.find(id);
  if (it == datasets_.end()) throw Error(ErrorCode::not_found, "unknown dataset", id);
  return it->second;
}

std::shared_ptr<Service::Session> Service::find_session(std::string_view id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(std::string(id));
  if (it == sessions_.end()) throw Error(ErrorCode::not_found, "unknown session", std::string(id));
  return it->second;
}

void Service::snapshot(const Session& s) const {
  if (!config_.data_dir) return;
  const fs::path dir = *config_.data_dir / "sessions";
  fs::create_directories(dir);
  Json j{{"id", s.id},
         {"dataset_id", s.dataset->id()},
         {"config", config_json(s.cfg)},
         {"partition_request", s.partition ? s.partition_request : Json(nullptr)},
         {"seed", s.seed},
         {"created_at", s.created_at}};
  const fs::path tmp = dir / (s.id + ".json.tmp");
  std::ofstream(tmp) << j.dump(2);
  fs::rename(tmp, dir / (s.id + ".json"));
}

void Service::restore() {
  const fs::path root = *config_.data_dir;
  if (fs::is_directory(root / "datasets")) {
    for (const auto& entry : fs::directory_iterator(root / "datasets")) {
      if (entry.path().extension() != ".csv") continue;
      try {
        auto ds = std::make_shared<const Dataset>(load_table(read_file(entry.path())));
        datasets_.try_emplace(ds->id(), ds);
      } catch (const Error&) {
      }
    }
  }
  if (!fs::is_directory(root / "sessions")) return;
  for (const auto& entry : fs::directory_iterator(root / "sessions")) {
    if (entry.path().extension() != ".json") continue;
    try {
      const Json j = Json::parse(read_file(entry.path()));
      auto s = std::make_shared<Session>();
      s->id = j.at("id").get<std::string>();
      s->dataset = find_dataset(j.at("dataset_id").get<std::string>());
      const Json& c = j.at("config");
      s->cfg = CausalConfig{c.at("cause"), c.at("outcome"), c.at("covariates"), c.at("confounders")};
      validate_config(*s->dataset, s->cfg);
      s->seed = j.at("seed").get<std::uint64_t>();
      s->created_at = j.value("created_at", "");
      if (!j.at("partition_request").is_null()) {
        s->partition_request = j.at("partition_request");
        s->partition = run_partition(*s->dataset, s->cfg, s->partition_request, s->seed);
      }
      const auto num = s->id.rfind('-');
      if (num != std::string::npos)
        next_session_ = std::max<std::uint64_t>(next_session_, std::stoull(s->id.substr(num + 1)) + 1);
      sessions_.emplace(s->id, s);
    } catch (const std::exception&) {
    }
  }
}

void mount(Service& service, httplib::Server& server) {
  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    Service::Query q;
    for (const auto& [k, v] : req.params) q.emplace(k, v);
    const Response r = service.handle(req.method, req.path, q, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  const std::string any = R"(/.*)";
  server.Get(any, dispatch);
  server.Post(any, dispatch);
  server.Put(any, dispatch);
  server.set_payload_max_length(service.config().max_upload_bytes);
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const ErrorCode code = res.status == 413 ? ErrorCode::payload_too_large : ErrorCode::not_found;
    const Error e(code, "request rejected", std::to_string(res.status));
    res.set_content(error_json(e).dump(), "application/json");
  });
}

}  // namespace spurlens
