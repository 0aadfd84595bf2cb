#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "masksearch/catalog.hpp"
#include "masksearch/chi.hpp"
#include "masksearch/engine.hpp"
#include "masksearch/mask_source.hpp"

namespace httplib {
class Server;
}

namespace masksearch {

struct ServiceOptions {
  std::filesystem::path data_root = ".";
  std::size_t session_cap = 64;
  std::chrono::milliseconds timeout{120000};
  unsigned threads = 1;
};

/// A transport-free response; the HTTP layer copies it verbatim.
struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Registered datasets, query sessions and the REST routes over them.
/// Endpoint schemas are in docs/http_api.md.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Re-registers datasets listed in data_root/datasets.json. Entries that
  /// fail to load are skipped and reported in the returned messages.
  std::vector<std::string> restore();

  // Handlers, callable without a socket.
  HttpResponse list_datasets() const;
  HttpResponse register_dataset(const std::string& body);
  HttpResponse confusion(const std::string& dataset_id, const std::optional<std::string>& model_id) const;
  HttpResponse images(const std::string& dataset_id, const std::optional<std::string>& ids) const;
  HttpResponse query(const std::string& dataset_id, const std::string& body);
  HttpResponse detail(const std::string& session_id) const;
  HttpResponse augment(const std::string& dataset_id, const std::string& body) const;
  HttpResponse mask_file(const std::string& dataset_id, const std::string& mask_id) const;
  HttpResponse image_file(const std::string& dataset_id, const std::string& image_id) const;
  HttpResponse parse_echo(const std::string& body) const;

  /// Installs every route on `server`.
  void mount(httplib::Server& server);

  /// Blocks serving on host:port until stop(). Returns false if binding fails.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Dataset {
    std::string id;
    std::filesystem::path catalog_path;
    std::filesystem::path index_path;  // empty when the index lives only in memory
    Catalog catalog;
    std::unique_ptr<Chi> chi;
    std::unique_ptr<MaskSource> source;
  };
  struct Session {
    std::string id;
    std::string dataset_id;
    std::string sql;
    QueryResult result;
  };

  std::shared_ptr<Dataset> find_dataset(const std::string& id) const;
  std::shared_ptr<Dataset> load_dataset(const nlohmann::json& request, nlohmann::json& record);
  void persist_registry() const;
  void remember(std::shared_ptr<const Session> session);

  ServiceOptions options_;

  mutable std::shared_mutex datasets_mutex_;
  std::mutex register_mutex_;
  std::map<std::string, std::shared_ptr<Dataset>> datasets_;
  nlohmann::json registry_ = nlohmann::json::array();

  mutable std::mutex sessions_mutex_;
  mutable std::list<std::shared_ptr<const Session>> lru_;  // most recent first
  mutable std::unordered_map<std::string, std::list<std::shared_ptr<const Session>>::iterator> sessions_;
  std::uint64_t session_counter_ = 0;

  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<std::thread> server_thread_;
};

}  // namespace masksearch
