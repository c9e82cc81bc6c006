#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "spurlens/pipeline.hpp"

namespace httplib {
class Server;
}

namespace spurlens {

struct ServiceConfig {
  int port = 8642;
  std::size_t max_upload_bytes = 50u * 1024u * 1024u;
  std::size_t max_rows = 1'000'000;
  std::optional<std::filesystem::path> data_dir;  // snapshots when set
};

/// Reads PORT, DATA_DIR and MAX_UPLOAD_BYTES.
ServiceConfig service_config_from_env();

struct Response {
  int status = 200;
  Json body;
};

int http_status(ErrorKind kind) noexcept;

/// In-memory analysis sessions. Requests on different sessions run in
/// parallel; mutations of one session are serialized.
class Service {
 public:
  using Query = std::map<std::string, std::string>;

  explicit Service(ServiceConfig config = {});

  Response handle(std::string_view method, std::string_view path, const Query& query,
                  std::string_view body);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Session {
    std::string id;
    std::shared_ptr<const Dataset> dataset;
    CausalConfig cfg;
    std::optional<Partition> partition;
    Json partition_request;
    std::uint64_t seed = kDefaultSeed;
    std::string created_at;
    mutable std::shared_mutex mutex;
  };

  Response upload(std::string_view body);
  Response create_session(const Json& body);
  Response route_session(std::string_view method, std::string_view id, std::string_view rest,
                         const Query& query, std::string_view body);

  std::shared_ptr<const Dataset> find_dataset(const std::string& id) const;
  std::shared_ptr<Session> find_session(std::string_view id) const;
  void snapshot(const Session& s) const;
  void restore();

  ServiceConfig config_;
  mutable std::shared_mutex registry_mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Dataset>> datasets_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
};

/// Routes every endpoint of `service` through `server`.
void mount(Service& service, httplib::Server& server);

}  // namespace spurlens
