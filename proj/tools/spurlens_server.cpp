#include <httplib.h>

#include <iostream>

#include "spurlens/service.hpp"

int main() {
  const auto config = spurlens::service_config_from_env();
  spurlens::Service service(config);
  httplib::Server server;
  spurlens::mount(service, server);
  std::cerr << "listening on port " << config.port << '\n';
  if (!server.listen("0.0.0.0", config.port)) {
    std::cerr << "cannot bind port " << config.port << '\n';
    return 1;
  }
}
