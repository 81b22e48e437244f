#pragma once

#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "rider/app/pipeline.hpp"
#include "rider/harness/plant.hpp"
#include "rider/warehouse/store.hpp"

namespace httplib {
class Server;
}

namespace rider::app {

/// HTTP surface over a store (read only) or a live pipeline (reads plus
/// POST /v1/ticks). Reads run concurrently; a tick batch holds the writer lock.
class Service {
 public:
  explicit Service(std::unique_ptr<warehouse::Store> store, std::optional<harness::HarnessConfig> plant = {});
  explicit Service(std::unique_ptr<Pipeline> pipeline);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to host:port; port 0 picks a free one. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();

 private:
  void routes();
  const warehouse::Warehouse& warehouse() const;
  std::vector<ingest::ExceptionRecord> quarantine() const;
  const harness::HarnessConfig* plant() const;

  std::unique_ptr<warehouse::Store> store_;
  std::unique_ptr<Pipeline> pipeline_;
  std::optional<harness::HarnessConfig> plant_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace rider::app
