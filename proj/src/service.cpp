#include "masksearch/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "masksearch/error.hpp"
#include "masksearch/image.hpp"
#include "masksearch/json_io.hpp"
#include "masksearch/parser.hpp"

namespace masksearch {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

HttpResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_response(int status, std::string_view code, const std::string& message, json extra = {}) {
  json err = {{"code", code}, {"message", message}};
  if (extra.is_object()) err.update(extra);
  return json_response(status, {{"error", std::move(err)}});
}

HttpResponse not_found(std::string_view what, const std::string& id) {
  return error_response(404, "not_found", std::string(what) + " '" + id + "' not found");
}

std::optional<std::int64_t> parse_id(const std::string& text) {
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

json parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

std::string content_type_for(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "MSK1")) return "application/x-msk1";
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return "image/x-portable-graymap";
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return "image/x-portable-pixmap";
  return "application/octet-stream";
}

Bindings bindings_from(const json& params) {
  Bindings out;
  if (params.is_null()) return out;
  if (!params.is_object()) throw ValidationError("params must be an object");
  for (const auto& [name, value] : params.items()) {
    out[name] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return out;
}

std::string join_ids(const std::vector<std::int64_t>& ids, std::size_t cap = 20) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < cap; ++i) {
    if (i) out += ", ";
    out += std::to_string(ids[i]);
  }
  if (ids.size() > cap) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

fs::path augmented_path(const fs::path& source, std::uint64_t seed) {
  return source.parent_path() / (source.stem().string() + ".aug-" + std::to_string(seed) + source.extension().string());
}

// Typed storage failures become 500s; everything the caller can fix is a 4xx.
template <typename F>
HttpResponse guarded(F&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    return error_response(422, "parse_error", e.what(), {{"line", e.line()}, {"column", e.column()}});
  } catch (const ValidationError& e) {
    return error_response(422, "validation_error", e.what());
  } catch (const QueryTimeout& e) {
    return error_response(504, "timeout", e.what());
  } catch (const IoError& e) {
    return error_response(500, "storage_error", e.what());
  } catch (const FormatError& e) {
    return error_response(500, "storage_error", e.what());
  } catch (const IndexError& e) {
    return error_response(500, "index_error", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.session_cap == 0) options_.session_cap = 1;
}

Service::~Service() { stop(); }

std::shared_ptr<Service::Dataset> Service::find_dataset(const std::string& id) const {
  std::shared_lock lock(datasets_mutex_);
  const auto it = datasets_.find(id);
  return it == datasets_.end() ? nullptr : it->second;
}

// Loads catalog and index for a registration request. `record` receives the
// persisted form. Throws CatalogError (400-class) or IoError / FormatError.
std::shared_ptr<Service::Dataset> Service::load_dataset(const json& request, json& record) {
  auto ds = std::make_shared<Dataset>();
  ds->id = request.at("id").get<std::string>();
  const auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : options_.data_root / path;
  };
  ds->catalog_path = resolve(request.at("catalog").get<std::string>());
  ds->catalog = Catalog::load(ds->catalog_path);

  std::vector<std::int64_t> missing;
  for (const MaskRecord& m : ds->catalog.masks()) {
    std::error_code ec;
    if (!fs::is_regular_file(ds->catalog.resolve(m.path), ec)) missing.push_back(m.mask_id);
  }
  if (!missing.empty()) {
    throw CatalogError("catalog references missing mask files for mask_id " + join_ids(missing));
  }

  ChiConfig cfg;
  cfg.buckets = request.value("buckets", cfg.buckets);
  if (request.contains("cell")) {
    const json& cell = request["cell"];
    cfg.cell_h = cell.at(0).get<std::uint32_t>();
    cfg.cell_w = cell.at(1).get<std::uint32_t>();
  }
  const bool has_index = request.contains("index") && request["index"].is_string();
  const bool build = request.value("build_index", !has_index);
  record = {{"id", ds->id}, {"catalog", ds->catalog_path.string()}};
  if (has_index) {
    ds->index_path = resolve(request["index"].get<std::string>());
    if (build || !fs::exists(ds->index_path)) {
      if (!build) throw IoError("index file " + ds->index_path.string() + " does not exist");
    } else {
      ds->chi = std::make_unique<Chi>(Chi::load(ds->index_path));
    }
  }
  if (!ds->chi && build) {
    cfg.validate();
    std::vector<BuildFailure> failures;
    ds->chi = std::make_unique<Chi>(build_index(ds->catalog, cfg, &failures));
    if (!failures.empty()) {
      std::vector<std::int64_t> ids;
      for (const auto& f : failures) ids.push_back(f.mask_id);
      throw CatalogError("could not index mask_id " + join_ids(ids) + ": " + failures.front().message);
    }
    if (ds->index_path.empty()) ds->index_path = options_.data_root / "indexes" / (ds->id + ".chi");
    fs::create_directories(ds->index_path.parent_path());
    ds->chi->save(ds->index_path);
  }
  if (!ds->chi) {
    cfg.validate();
    ds->chi = std::make_unique<Chi>(cfg);  // empty; queries fall back to [0, area] bounds
  }
  if (!ds->index_path.empty()) record["index"] = ds->index_path.string();
  record["build_index"] = false;
  record["buckets"] = ds->chi->config().buckets;
  record["cell"] = {ds->chi->config().cell_h, ds->chi->config().cell_w};
  ds->source = std::make_unique<MaskSource>(ds->catalog);
  return ds;
}

void Service::persist_registry() const {
  std::error_code ec;
  fs::create_directories(options_.data_root, ec);
  const fs::path target = options_.data_root / "datasets.json";
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << registry_.dump(2) << '\n';
  }
  fs::rename(tmp, target);
}

std::vector<std::string> Service::restore() {
  std::vector<std::string> messages;
  const fs::path file = options_.data_root / "datasets.json";
  if (!fs::exists(file)) return messages;
  std::ifstream in(file);
  json records = json::parse(in, nullptr, false);
  if (!records.is_array()) {
    messages.push_back(file.string() + " is not a JSON array; ignored");
    return messages;
  }
  std::lock_guard reg(register_mutex_);
  for (const json& r : records) {
    try {
      json record;
      auto ds = load_dataset(r, record);
      std::unique_lock lock(datasets_mutex_);
      if (datasets_.contains(ds->id)) continue;
      datasets_[ds->id] = ds;
      registry_.push_back(record);
    } catch (const std::exception& e) {
      messages.push_back("dataset " + r.value("id", std::string("?")) + ": " + e.what());
    }
  }
  return messages;
}

HttpResponse Service::list_datasets() const {
  json out = json::array();
  std::shared_lock lock(datasets_mutex_);
  for (const auto& [id, ds] : datasets_) {
    out.push_back({{"id", id},
                   {"masks", ds->catalog.masks().size()},
                   {"images", ds->catalog.images().size()},
                   {"indexed", ds->chi->size()},
                   {"legend", ds->catalog.legend()}});
  }
  return json_response(200, {{"datasets", std::move(out)}});
}

HttpResponse Service::register_dataset(const std::string& body) {
  return guarded([&]() -> HttpResponse {
    json request = parse_body(body);
    if (!request.contains("catalog") || !request["catalog"].is_string()) {
      return error_response(400, "bad_request", "field 'catalog' (path) is required");
    }
    std::lock_guard reg(register_mutex_);
    if (!request.contains("id")) {
      std::shared_lock lock(datasets_mutex_);
      std::size_t n = datasets_.size();
      while (datasets_.contains("ds-" + std::to_string(n))) ++n;
      request["id"] = "ds-" + std::to_string(n);
    }
    if (!request["id"].is_string() || request["id"].get<std::string>().empty()) {
      return error_response(400, "bad_request", "field 'id' must be a non-empty string");
    }
    const std::string id = request["id"];
    if (find_dataset(id)) return error_response(409, "duplicate_id", "dataset '" + id + "' already registered");

    std::shared_ptr<Dataset> ds;
    json record;
    try {
      ds = load_dataset(request, record);
    } catch (const CatalogError& e) {
      return error_response(400, "bad_catalog", e.what());
    } catch (const FormatError& e) {
      return error_response(400, "bad_format", e.what());
    } catch (const IoError& e) {
      return error_response(400, "missing_file", e.what());
    } catch (const ValidationError& e) {
      return error_response(400, "bad_config", e.what());
    } catch (const json::exception& e) {
      return error_response(400, "bad_request", e.what());
    }
    {
      std::unique_lock lock(datasets_mutex_);
      datasets_[id] = ds;
      registry_.push_back(record);
    }
    persist_registry();
    return json_response(201, {{"id", id},
                               {"masks", ds->catalog.masks().size()},
                               {"images", ds->catalog.images().size()},
                               {"indexed", ds->chi->size()},
                               {"index", ds->index_path.string()}});
  });
}

HttpResponse Service::confusion(const std::string& dataset_id, const std::optional<std::string>& model_id) const {
  const auto ds = find_dataset(dataset_id);
  if (!ds) return not_found("dataset", dataset_id);
  std::optional<std::int64_t> model;
  if (model_id && !model_id->empty()) {
    model = parse_id(*model_id);
    if (!model) return error_response(400, "bad_request", "model_id must be an integer");
  }
  json out = to_json(confusion_matrix(ds->catalog, model));
  out["legend"] = ds->catalog.legend();
  return json_response(200, out);
}

HttpResponse Service::images(const std::string& dataset_id, const std::optional<std::string>& ids) const {
  const auto ds = find_dataset(dataset_id);
  if (!ds) return not_found("dataset", dataset_id);
  std::vector<const ImageRecord*> selected;
  if (ids && !ids->empty()) {
    std::stringstream ss(*ids);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto id = parse_id(tok);
      if (!id) return error_response(400, "bad_request", "ids must be comma-separated integers");
      const ImageRecord* img = ds->catalog.find_image(*id);
      if (!img) return not_found("image", tok);
      selected.push_back(img);
    }
  } else {
    for (const ImageRecord& img : ds->catalog.images()) selected.push_back(&img);
  }
  std::map<std::int64_t, json> masks_by_image;
  for (const MaskRecord& m : ds->catalog.masks()) {
    masks_by_image[m.image_id].push_back(
        {{"mask_id", m.mask_id}, {"model_id", m.model_id}, {"mask_type", m.mask_type},
         {"url", "/datasets/" + dataset_id + "/masks/" + std::to_string(m.mask_id)}});
  }
  json out = json::array();
  for (const ImageRecord* img : selected) {
    json j = to_json(*img);
    j["url"] = img->path ? json("/datasets/" + dataset_id + "/images/" + std::to_string(img->image_id)) : json(nullptr);
    const auto it = masks_by_image.find(img->image_id);
    j["masks"] = it == masks_by_image.end() ? json::array() : it->second;
    out.push_back(std::move(j));
  }
  return json_response(200, {{"images", std::move(out)}});
}

void Service::remember(std::shared_ptr<const Session> session) {
  std::lock_guard lock(sessions_mutex_);
  lru_.push_front(session);
  sessions_[session->id] = lru_.begin();
  while (lru_.size() > options_.session_cap) {
    sessions_.erase(lru_.back()->id);
    lru_.pop_back();
  }
}

HttpResponse Service::query(const std::string& dataset_id, const std::string& body) {
  const auto ds = find_dataset(dataset_id);
  if (!ds) return not_found("dataset", dataset_id);
  return guarded([&]() -> HttpResponse {
    const json request = parse_body(body);
    if (!request.contains("sql") || !request["sql"].is_string()) throw ValidationError("field 'sql' is required");
    const std::string sql = request["sql"];
    const Bindings bindings = bindings_from(request.value("params", json()));
    const QueryPlan plan = parse(sql, bindings);
    const CheckedPlan checked = validate(plan, ds->catalog);

    ExecOptions opts;
    opts.mode = parse_index_mode(request.value("mode", std::string("full")));
    opts.threads = std::max(1u, request.value("threads", options_.threads));
    opts.timeout = options_.timeout;
    Engine engine(ds->catalog, *ds->chi, *ds->source);
    QueryResult result = engine.eval(checked, opts);

    std::map<std::int64_t, const std::vector<std::int64_t>*> members;
    for (const auto& g : checked.groups) members[g.image_id] = &g.members;
    json overlays = json::array();
    for (const ResultRow& row : result.rows) {
      std::int64_t image_id = row.key;
      std::vector<std::int64_t> mask_ids;
      if (plan.group_by_image) {
        if (const auto it = members.find(row.key); it != members.end()) mask_ids = *it->second;
      } else {
        mask_ids.push_back(row.key);
        image_id = ds->catalog.find_mask(row.key)->image_id;
      }
      json urls = json::array();
      for (const std::int64_t id : mask_ids) urls.push_back("/datasets/" + dataset_id + "/masks/" + std::to_string(id));
      const ImageRecord* img = ds->catalog.find_image(image_id);
      overlays.push_back(
          {{"key", row.key},
           {"image_id", image_id},
           {"mask_ids", mask_ids},
           {"mask_urls", std::move(urls)},
           {"image_url", img && img->path ? json("/datasets/" + dataset_id + "/images/" + std::to_string(image_id))
                                          : json(nullptr)},
           {"object_roi", img && img->object_roi ? to_json(*img->object_roi) : json(nullptr)}});
    }

    auto session = std::make_shared<Session>();
    {
      std::lock_guard lock(sessions_mutex_);
      std::random_device rd;
      std::ostringstream id;
      id << "q" << ++session_counter_ << '-' << std::hex << (static_cast<std::uint64_t>(rd()) << 32 | rd());
      session->id = id.str();
    }
    session->dataset_id = dataset_id;
    session->sql = render(plan);
    session->result = std::move(result);
    json out = {{"session_id", session->id},
                {"kind", to_string(plan.kind)},
                {"sql", session->sql},
                {"rows", rows_to_json(session->result.rows)},
                {"overlays", std::move(overlays)},
                {"stats", stats_to_json(session->result.stats)}};
    remember(std::move(session));
    return json_response(200, out);
  });
}

HttpResponse Service::detail(const std::string& session_id) const {
  std::shared_ptr<const Session> session;
  {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return not_found("session", session_id);
    lru_.splice(lru_.begin(), lru_, it->second);
    session = *it->second;
  }
  json out = stats_to_json(session->result.stats, true);
  out["session_id"] = session->id;
  out["dataset_id"] = session->dataset_id;
  out["sql"] = session->sql;
  return json_response(200, out);
}

HttpResponse Service::augment(const std::string& dataset_id, const std::string& body) const {
  const auto ds = find_dataset(dataset_id);
  if (!ds) return not_found("dataset", dataset_id);
  return guarded([&]() -> HttpResponse {
    const json request = parse_body(body);
    if (!request.contains("image_ids") || !request["image_ids"].is_array()) {
      throw ValidationError("field 'image_ids' (array) is required");
    }
    const std::string roi_source = request.value("roi_source", std::string("object"));
    if (roi_source != "object" && roi_source != "constant") {
      throw ValidationError("roi_source must be 'object' or 'constant'");
    }
    if (!request.contains("seed") || !request["seed"].is_number_integer()) {
      throw ValidationError("field 'seed' (integer) is required");
    }
    const auto seed = request["seed"].get<std::uint64_t>();
    std::optional<Roi> constant;
    if (roi_source == "constant") {
      if (!request.contains("roi")) throw ValidationError("roi_source 'constant' needs a roi");
      constant = roi_from_json(request["roi"]);
    }

    struct Job {
      const ImageRecord* record;
      Roi roi;
      Image image;
      fs::path source;
    };
    std::vector<Job> jobs;
    for (const json& j : request["image_ids"]) {
      if (!j.is_number_integer()) throw ValidationError("image_ids must be integers");
      const auto id = j.get<std::int64_t>();
      const ImageRecord* img = ds->catalog.find_image(id);
      if (!img || !img->path) return not_found("image", std::to_string(id));
      if (!constant && !img->object_roi) {
        return error_response(422, "unresolvable_roi", "image_id " + std::to_string(id) + " has no object_roi");
      }
      jobs.push_back({img, constant ? *constant : *img->object_roi, {}, ds->catalog.resolve(*img->path)});
    }
    for (Job& job : jobs) {
      job.image = load_pnm(job.source);
      if (!job.roi.valid_for(job.image.height, job.image.width)) {
        return error_response(422, "unresolvable_roi",
                              "roi " + to_string(job.roi) + " is outside image_id " +
                                  std::to_string(job.record->image_id));
      }
    }
    json outputs = json::array();
    for (const Job& job : jobs) {
      const fs::path out = augmented_path(job.source, seed);
      save_pnm(augment_image(job.image, job.roi, seed), out);
      outputs.push_back({{"image_id", job.record->image_id},
                         {"source", *job.record->path},
                         {"output", augmented_path(*job.record->path, seed).generic_string()},
                         {"roi", to_json(job.roi)}});
    }
    return json_response(200, {{"seed", seed}, {"outputs", std::move(outputs)}});
  });
}

HttpResponse Service::mask_file(const std::string& dataset_id, const std::string& mask_id) const {
  const auto ds = find_dataset(dataset_id);
  if (!ds) return not_found("dataset", dataset_id);
  const auto id = parse_id(mask_id);
  const MaskRecord* rec = id ? ds->catalog.find_mask(*id) : nullptr;
  if (!rec) return not_found("mask", mask_id);
  try {
    auto bytes = read_file(ds->catalog.resolve(rec->path));
    std::string type = content_type_for(bytes);
    return {200, std::string(bytes.begin(), bytes.end()), std::move(type)};
  } catch (const IoError& e) {
    return error_response(404, "not_found", e.what());
  }
}

HttpResponse Service::image_file(const std::string& dataset_id, const std::string& image_id) const {
  const auto ds = find_dataset(dataset_id);
  if (!ds) return not_found("dataset", dataset_id);
  const auto id = parse_id(image_id);
  const ImageRecord* rec = id ? ds->catalog.find_image(*id) : nullptr;
  if (!rec || !rec->path) return not_found("image", image_id);
  try {
    auto bytes = read_file(ds->catalog.resolve(*rec->path));
    std::string type = content_type_for(bytes);
    return {200, std::string(bytes.begin(), bytes.end()), std::move(type)};
  } catch (const IoError& e) {
    return error_response(404, "not_found", e.what());
  }
}

HttpResponse Service::parse_echo(const std::string& body) const {
  return guarded([&]() -> HttpResponse {
    const json request = parse_body(body);
    if (!request.contains("sql") || !request["sql"].is_string()) throw ValidationError("field 'sql' is required");
    const QueryPlan plan = parse(request["sql"].get<std::string>(), bindings_from(request.value("params", json())));
    return json_response(200, {{"kind", to_string(plan.kind)}, {"sql", render(plan)}});
  });
}

void Service::mount(httplib::Server& server) {
  const auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  const auto param = [](const httplib::Request& req, const char* name) -> std::optional<std::string> {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
  };
  server.Get("/datasets", [=, this](const httplib::Request&, httplib::Response& res) { send(res, list_datasets()); });
  server.Post("/datasets", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, register_dataset(req.body));
  });
  server.Get(R"(/datasets/([^/]+)/confusion)", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, confusion(req.matches[1], param(req, "model_id")));
  });
  server.Get(R"(/datasets/([^/]+)/images)", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, images(req.matches[1], param(req, "ids")));
  });
  server.Post(R"(/datasets/([^/]+)/query)", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, query(req.matches[1], req.body));
  });
  server.Get(R"(/query/([^/]+)/detail)", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, detail(req.matches[1]));
  });
  server.Post(R"(/datasets/([^/]+)/augment)", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, augment(req.matches[1], req.body));
  });
  server.Get(R"(/datasets/([^/]+)/masks/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, mask_file(req.matches[1], req.matches[2]));
  });
  server.Get(R"(/datasets/([^/]+)/images/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, image_file(req.matches[1], req.matches[2]));
  });
  server.Post("/parse", [=, this](const httplib::Request& req, httplib::Response& res) { send(res, parse_echo(req.body)); });
  server.set_error_handler([=](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const HttpResponse r =
        res.status == 404 ? error_response(404, "not_found", "no route for " + req.method + " " + req.path)
                          : error_response(res.status, "http_error", "request failed with status " +
                                                                          std::to_string(res.status));
    res.set_content(r.body, r.content_type);
  });
  server.set_exception_handler([=](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send(res, error_response(500, "internal", message));
  });
}

bool Service::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  return server_->listen(host, port);
}

int Service::start_background(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw IoError("cannot bind a port on " + host);
  server_thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  if (server_) server_->stop();
  if (server_thread_ && server_thread_->joinable()) server_thread_->join();
  server_thread_.reset();
}

}  // namespace masksearch
