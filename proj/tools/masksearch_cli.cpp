// masksearch command line: ingest, index, query, bench, generate, serve.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <pthread.h>
#include <unistd.h>

#include "masksearch/catalog.hpp"
#include "masksearch/chi.hpp"
#include "masksearch/engine.hpp"
#include "masksearch/error.hpp"
#include "masksearch/json_io.hpp"
#include "masksearch/oracle.hpp"
#include "masksearch/parser.hpp"
#include "masksearch/service.hpp"
#include "masksearch/synth.hpp"
#include "masksearch/workload.hpp"

namespace fs = std::filesystem;
using namespace masksearch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::int64_t to_int(const std::string& field, const std::string& context) {
  std::int64_t v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw UsageError(context + ": '" + field + "' is not an integer");
  }
  return v;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// Rows of integer fields; a first line whose first field is not an integer is
// taken as a header and skipped.
std::vector<std::vector<std::int64_t>> read_int_csv(const fs::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<std::int64_t>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    if (line_no == 1 && !fields.empty() && !fields[0].empty() && !std::isdigit(static_cast<unsigned char>(fields[0][0])) &&
        fields[0][0] != '-') {
      continue;
    }
    const std::string ctx = path.filename().string() + " line " + std::to_string(line_no);
    if (fields.size() != columns) {
      throw UsageError(ctx + ": expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    }
    std::vector<std::int64_t> row;
    for (const auto& field : fields) row.push_back(to_int(field, ctx));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Row>
void check_unique(const std::vector<Row>& rows, const std::string& what) {
  std::set<std::int64_t> seen;
  for (const auto& r : rows) {
    if (!seen.insert(r[0]).second) throw UsageError("duplicate id " + std::to_string(r[0]) + " in " + what);
  }
}

std::pair<int, int> parse_dims(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw UsageError("expected HxW, got '" + text + "'");
  const auto h = to_int(text.substr(0, x), "dims");
  const auto w = to_int(text.substr(x + 1), "dims");
  if (h < 1 || w < 1) throw UsageError("dimensions must be positive: '" + text + "'");
  return {static_cast<int>(h), static_cast<int>(w)};
}

Bindings parse_params(const std::vector<std::string>& params) {
  Bindings out;
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects NAME=VALUE, got '" + p + "'");
    out[p.substr(0, eq)] = p.substr(eq + 1);
  }
  return out;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_value(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, *v);
  return {buf, res.ptr};
}

bool values_match(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return *a == *b || std::abs(*a - *b) <= 1e-9 * std::max(std::abs(*a), std::abs(*b));
}

bool rows_match(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].key != b[i].key || !values_match(a[i].value, b[i].value)) return false;
  }
  return true;
}

Chi open_index(const std::string& path, IndexMode mode, const Catalog& catalog) {
  if (!path.empty() && fs::exists(path)) return Chi::load(path);
  if (mode == IndexMode::incremental) return Chi(ChiConfig{});
  if (path.empty()) return build_index(catalog, ChiConfig{});
  throw IoError("index file " + path + " does not exist");
}

// ---- ingest

struct IngestArgs {
  std::string masks_dir;
  std::string catalog;
  std::string labels;
  std::string rois;
  std::string meta;
  std::string images_dir;
};

int run_ingest(const IngestArgs& a) {
  if (!fs::is_directory(a.masks_dir)) throw IoError("mask directory " + a.masks_dir + " does not exist");
  const fs::path out = fs::absolute(a.catalog);
  const fs::path base = out.parent_path();

  std::map<std::int64_t, std::vector<std::int64_t>> meta;
  if (!a.meta.empty()) {
    auto rows = read_int_csv(a.meta, 4);
    check_unique(rows, a.meta);
    for (auto& r : rows) meta[r[0]] = r;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.masks_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no mask files in " + a.masks_dir);

  Catalog catalog(base);
  std::set<std::int64_t> image_ids;
  std::size_t failed = 0;
  for (const fs::path& file : files) {
    try {
      const std::string stem = file.filename().string().substr(0, file.filename().string().find('.'));
      const std::int64_t mask_id = to_int(stem, file.filename().string());
      const MaskHeader header = probe_mask(file);
      MaskRecord rec;
      rec.mask_id = mask_id;
      rec.image_id = mask_id;
      rec.model_id = 1;
      rec.mask_type = 1;
      if (const auto it = meta.find(mask_id); it != meta.end()) {
        rec.image_id = it->second[1];
        rec.model_id = it->second[2];
        rec.mask_type = it->second[3];
      }
      rec.path = fs::relative(fs::absolute(file), base).generic_string();
      rec.height = header.height;
      rec.width = header.width;
      catalog.add_mask(rec);
      image_ids.insert(rec.image_id);
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << file.string() << ": " << e.what() << '\n';
      ++failed;
    }
  }
  if (failed == files.size()) throw IoError("no readable masks in " + a.masks_dir);

  std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> labels;
  if (!a.labels.empty()) {
    auto rows = read_int_csv(a.labels, 3);
    check_unique(rows, a.labels);
    for (auto& r : rows) labels[r[0]] = {r[1], r[2]};
  }
  std::map<std::int64_t, Roi> rois;
  if (!a.rois.empty()) {
    auto rows = read_int_csv(a.rois, 5);
    check_unique(rows, a.rois);
    for (auto& r : rows) {
      rois[r[0]] = {static_cast<int>(r[1]), static_cast<int>(r[2]), static_cast<int>(r[3]), static_cast<int>(r[4])};
    }
  }
  for (const std::int64_t id : image_ids) {
    ImageRecord img;
    img.image_id = id;
    if (const auto it = labels.find(id); it != labels.end()) std::tie(img.true_label, img.pred_label) = it->second;
    if (const auto it = rois.find(id); it != rois.end()) img.object_roi = it->second;
    if (!a.images_dir.empty()) {
      for (const char* ext : {".ppm", ".pgm"}) {
        const fs::path p = fs::path(a.images_dir) / (std::to_string(id) + ext);
        if (fs::exists(p)) img.path = fs::relative(fs::absolute(p), base).generic_string();
      }
    }
    catalog.add_image(img);
  }
  catalog.save(out);
  std::cerr << "ingested " << catalog.masks().size() << " masks, " << catalog.images().size() << " images";
  if (failed) std::cerr << " (" << failed << " skipped)";
  std::cerr << '\n';
  return kExitOk;
}

// ---- index

std::uintmax_t raw_mask_bytes(const Catalog& catalog) {
  std::uintmax_t total = 0;
  for (const MaskRecord& m : catalog.masks()) {
    std::error_code ec;
    const auto size = fs::file_size(catalog.resolve(m.path), ec);
    if (!ec) total += size;
  }
  return total;
}

int run_index_build(const std::string& catalog_path, const std::string& out, std::uint32_t buckets,
                    const std::string& cell) {
  const auto [ch, cw] = parse_dims(cell);
  ChiConfig cfg{buckets, static_cast<std::uint32_t>(ch), static_cast<std::uint32_t>(cw)};
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const Catalog catalog = Catalog::load(catalog_path);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<BuildFailure> failures;
  const Chi chi = build_index(catalog, cfg, &failures);
  for (const auto& f : failures) std::cerr << "warning: mask_id " << f.mask_id << ": " << f.message << '\n';
  chi.save(out);
  std::cerr << "indexed " << chi.size() << " masks in " << std::fixed << std::setprecision(1) << ms_since(t0)
            << " ms\n";
  if (!failures.empty() && chi.size() == 0) return kExitIo;
  return kExitOk;
}

int run_index_stats(const std::string& index_path, const std::string& catalog_path) {
  const Chi chi = Chi::load(index_path);
  const auto index_bytes = fs::file_size(index_path);
  std::cout << "entries\t" << chi.size() << '\n'
            << "buckets\t" << chi.config().buckets << '\n'
            << "cell\t" << chi.config().cell_h << 'x' << chi.config().cell_w << '\n'
            << "index_bytes\t" << index_bytes << '\n';
  if (!catalog_path.empty()) {
    const Catalog catalog = Catalog::load(catalog_path);
    const auto raw = raw_mask_bytes(catalog);
    std::cout << "raw_mask_bytes\t" << raw << '\n';
    if (raw > 0) {
      std::cout << "size_ratio\t" << std::setprecision(6)
                << static_cast<double>(index_bytes) / static_cast<double>(raw) << '\n';
    }
  }
  return kExitOk;
}

// ---- query

struct QueryArgs {
  std::string catalog;
  std::string index;
  std::string sql;
  std::string mode = "full";
  std::vector<std::string> params;
  bool stats = false;
  bool oracle = false;
  bool json = false;
  unsigned threads = 1;
};

int run_query(const QueryArgs& a) {
  QueryPlan plan;
  CheckedPlan checked;
  const Catalog catalog = Catalog::load(a.catalog);
  try {
    plan = parse(a.sql, parse_params(a.params));
    checked = validate(plan, catalog);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "invalid query: " << e.what() << '\n';
    return kExitUsage;
  }
  const IndexMode mode = parse_index_mode(a.mode);
  Chi chi = open_index(a.index, mode, catalog);
  const MaskSource source(catalog);
  Engine engine(catalog, chi, source);
  ExecOptions opts;
  opts.mode = mode;
  opts.threads = std::max(1u, a.threads);
  const QueryResult result = engine.eval(checked, opts);

  if (a.json) {
    std::cout << nlohmann::json{{"sql", render(plan)},
                                {"rows", rows_to_json(result.rows)},
                                {"stats", stats_to_json(result.stats)}}
                     .dump()
              << '\n';
  } else {
    for (const ResultRow& r : result.rows) std::cout << r.key << '\t' << format_value(r.value) << '\n';
  }
  if (a.stats) std::cerr << stats_to_json(result.stats).dump() << '\n';
  if (a.oracle) {
    const QueryResult naive = eval_naive(checked, source);
    if (rows_match(result.rows, naive.rows)) {
      std::cerr << "MATCH\n";
    } else {
      std::cerr << "MISMATCH: engine " << result.rows.size() << " rows, oracle " << naive.rows.size() << " rows\n";
      return kExitFailure;
    }
  }
  return kExitOk;
}

// ---- bench

struct BenchArgs {
  std::string catalog;
  std::string index;
  std::size_t queries = 10;
  std::uint64_t seed = 1;
  bool compare_naive = false;
  bool cold = false;
  std::string workload = "random";
  std::string mode = "full";
  unsigned threads = 1;
  std::string synth_dir;
  int synth_images = 250;
  std::string size = "64x64";
  std::string dist = "blobs";
};

int run_bench(const BenchArgs& a) {
  std::string catalog_path = a.catalog;
  if (catalog_path.empty()) {
    if (a.synth_dir.empty()) throw UsageError("bench needs --catalog or --synthetic DIR");
    SynthConfig cfg;
    cfg.images = a.synth_images;
    std::tie(cfg.height, cfg.width) = parse_dims(a.size);
    cfg.seed = a.seed;
    cfg.distribution = parse_distribution(a.dist);
    generate_dataset(a.synth_dir, cfg);
    catalog_path = (fs::path(a.synth_dir) / "catalog.jsonl").string();
  }
  const Catalog catalog = Catalog::load(catalog_path);
  if (catalog.masks().empty()) throw UsageError("catalog has no masks");
  const auto [h, w] = catalog.mask_dims(catalog.masks().front());
  const IndexMode mode = parse_index_mode(a.mode);

  const auto t_build = std::chrono::steady_clock::now();
  Chi chi = open_index(a.index, mode, catalog);
  const double build_ms = ms_since(t_build);

  WorkloadOptions wopts;
  wopts.height = h;
  wopts.width = w;
  wopts.index = chi.config();
  wopts.aligned = a.workload == "aligned";
  if (a.workload != "random" && a.workload != "aligned") throw UsageError("--workload must be random or aligned");
  std::set<std::int64_t> types;
  bool all_rois = true;
  for (const auto& m : catalog.masks()) types.insert(m.mask_type);
  for (const auto& img : catalog.images()) all_rois = all_rois && img.object_roi.has_value();
  wopts.grouped = types.contains(1) && types.contains(2);
  wopts.object_roi = all_rois && !catalog.images().empty();
  const auto queries = generate_workload(a.queries, a.seed, wopts);

  const MaskSource source(catalog, a.cold);
  Engine engine(catalog, chi, source);
  ExecOptions opts;
  opts.mode = mode;
  opts.threads = std::max(1u, a.threads);

  std::cout << "# index_ms\t" << std::fixed << std::setprecision(3) << build_ms << '\n';
  std::cout << "query\tkind\twall_ms\tmasks_loaded\ttotal\tfml";
  if (a.compare_naive) std::cout << "\tnaive_ms\tspeedup\tmatch";
  std::cout << '\n';
  double total_ms = 0;
  double total_naive = 0;
  std::size_t loaded = 0;
  std::size_t candidates = 0;
  bool all_match = true;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const CheckedPlan checked = validate(parse(queries[i]), catalog);
    const auto t0 = std::chrono::steady_clock::now();
    const QueryResult r = engine.eval(checked, opts);
    const double ms = ms_since(t0);
    total_ms += ms;
    loaded += r.stats.masks_loaded;
    candidates += r.stats.total_candidates;
    std::cout << i << '\t' << to_string(checked.plan.kind) << '\t' << std::setprecision(3) << ms << '\t'
              << r.stats.masks_loaded << '\t' << r.stats.total_candidates << '\t' << std::setprecision(4)
              << r.stats.fml();
    if (a.compare_naive) {
      const auto t1 = std::chrono::steady_clock::now();
      const QueryResult n = eval_naive(checked, source);
      const double naive_ms = ms_since(t1);
      total_naive += naive_ms;
      const bool match = rows_match(r.rows, n.rows);
      all_match = all_match && match;
      std::cout << '\t' << std::setprecision(3) << naive_ms << '\t' << std::setprecision(2)
                << (ms > 0 ? naive_ms / ms : 0.0) << '\t' << (match ? "yes" : "no");
    }
    std::cout << '\n';
  }
  std::cout << "# total_ms\t" << std::setprecision(3) << total_ms << '\n'
            << "# fml\t" << std::setprecision(4)
            << (candidates ? static_cast<double>(loaded) / static_cast<double>(candidates) : 0.0) << '\n';
  if (a.compare_naive) {
    std::cout << "# naive_ms\t" << std::setprecision(3) << total_naive << '\n'
              << "# speedup\t" << std::setprecision(2) << (total_ms > 0 ? total_naive / total_ms : 0.0) << '\n';
    if (!all_match) {
      std::cerr << "MISMATCH between engine and full scan\n";
      return kExitFailure;
    }
  }
  return kExitOk;
}

// ---- generate

int run_generate(const std::string& out, const SynthConfig& cfg) {
  generate_dataset(out, cfg);
  std::cerr << "wrote " << cfg.images * cfg.masks_per_image << " masks to " << out << '\n';
  return kExitOk;
}

// ---- serve

int run_serve(int port, const std::string& data_root, const std::string& host, unsigned threads, long timeout_ms,
              std::size_t session_cap) {
  if (port < 1 || port > 65535) {
    std::cerr << "error: port must be in 1..65535\n";
    return kExitFailure;
  }
  ServiceOptions opts;
  opts.data_root = data_root;
  opts.threads = std::max(1u, threads);
  opts.timeout = std::chrono::milliseconds(timeout_ms);
  opts.session_cap = session_cap;
  Service service(opts);
  for (const auto& msg : service.restore()) std::cerr << "warning: " << msg << '\n';

  // Signals are taken synchronously on this thread; the server runs on another.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  std::atomic<bool> bound{true};
  std::thread server([&] {
    if (!service.listen(host, port)) {
      bound = false;
      std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
      kill(getpid(), SIGTERM);
    }
  });
  std::cerr << "serving on http://" << host << ':' << port << " (data root " << data_root << ")\n";
  int sig = 0;
  sigwait(&set, &sig);
  service.stop();
  server.join();
  if (!bound) return kExitFailure;
  std::cerr << "shut down\n";
  return kExitOk;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masksearch: query image masks by pixel counts"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a catalog from a directory of <mask_id>.* mask files");
  ingest_cmd->add_option("--masks", ingest.masks_dir, "Directory of MSK1/PGM masks")->required();
  ingest_cmd->add_option("--catalog", ingest.catalog, "Output JSON Lines catalog")->required();
  ingest_cmd->add_option("--labels", ingest.labels, "CSV image_id,true_label,pred_label");
  ingest_cmd->add_option("--rois", ingest.rois, "CSV image_id,r0,c0,r1,c1");
  ingest_cmd->add_option("--meta", ingest.meta, "CSV mask_id,image_id,model_id,mask_type");
  ingest_cmd->add_option("--images", ingest.images_dir, "Directory of <image_id>.ppm/.pgm images");

  auto* index_cmd = app.add_subcommand("index", "Build or inspect a CHI1 index");
  index_cmd->require_subcommand(1);
  std::string build_catalog;
  std::string build_out;
  std::uint32_t buckets = 16;
  std::string cell = "32x32";
  auto* build_cmd = index_cmd->add_subcommand("build", "Index every mask of a catalog");
  build_cmd->add_option("--catalog", build_catalog)->required();
  build_cmd->add_option("--out", build_out)->required();
  build_cmd->add_option("--buckets", buckets, "Histogram buckets (>= 2)");
  build_cmd->add_option("--cell", cell, "Grid cell size HxW");
  std::string stats_index;
  std::string stats_catalog;
  auto* stats_cmd = index_cmd->add_subcommand("stats", "Print index size and ratio to raw mask bytes");
  stats_cmd->add_option("--index", stats_index)->required();
  stats_cmd->add_option("--catalog", stats_catalog, "Catalog for the raw-size ratio");

  QueryArgs query;
  auto* query_cmd = app.add_subcommand("query", "Run one statement; rows to stdout as TSV");
  query_cmd->add_option("--catalog", query.catalog)->required();
  query_cmd->add_option("--index", query.index, "CHI1 file (built in memory when omitted)");
  query_cmd->add_option("--sql", query.sql)->required();
  query_cmd->add_option("--mode", query.mode, "full or incremental")->check(CLI::IsMember({"full", "incremental"}));
  query_cmd->add_option("--param", query.params, "Placeholder binding NAME=VALUE (repeatable)");
  query_cmd->add_option("--threads", query.threads);
  query_cmd->add_flag("--stats", query.stats, "Print execution stats to stderr");
  query_cmd->add_flag("--oracle", query.oracle, "Also run a full scan and report MATCH or MISMATCH");
  query_cmd->add_flag("--json", query.json, "Print rows and stats as one JSON object");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time a generated workload");
  bench_cmd->add_option("--catalog", bench.catalog);
  bench_cmd->add_option("--index", bench.index);
  bench_cmd->add_option("--queries", bench.queries);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--workload", bench.workload, "random or aligned");
  bench_cmd->add_option("--mode", bench.mode)->check(CLI::IsMember({"full", "incremental"}));
  bench_cmd->add_option("--threads", bench.threads);
  bench_cmd->add_flag("--compare-naive", bench.compare_naive, "Also time a full scan per query");
  bench_cmd->add_flag("--cold", bench.cold, "Evict each mask file from the page cache before reading");
  bench_cmd->add_option("--synthetic", bench.synth_dir, "Generate a dataset into DIR when --catalog is absent");
  bench_cmd->add_option("--images", bench.synth_images, "Synthetic image count");
  bench_cmd->add_option("--size", bench.size, "Synthetic mask size HxW");
  bench_cmd->add_option("--dist", bench.dist, "blobs, bimodal or uniform");

  std::string gen_out;
  SynthConfig synth;
  std::string gen_size = "64x64";
  std::string gen_dist = "blobs";
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset");
  gen_cmd->add_option("--out", gen_out)->required();
  gen_cmd->add_option("--images", synth.images);
  gen_cmd->add_option("--masks-per-image", synth.masks_per_image);
  gen_cmd->add_option("--size", gen_size, "HxW");
  gen_cmd->add_option("--labels", synth.labels, "Number of class labels");
  gen_cmd->add_option("--seed", synth.seed);
  gen_cmd->add_option("--dist", gen_dist, "blobs, bimodal or uniform");
  gen_cmd->add_flag("--write-images", synth.write_images, "Also write P6 images");

  int port = 0;
  std::string data_root;
  std::string host = "127.0.0.1";
  unsigned serve_threads = 1;
  long timeout_ms = 120000;
  std::size_t session_cap = 64;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");
  serve_cmd->add_option("--port", port, "Defaults to $MASKSEARCH_PORT or 8080");
  serve_cmd->add_option("--data-root", data_root, "Defaults to $MASKSEARCH_DATA_ROOT or .");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--threads", serve_threads, "Engine threads per query");
  serve_cmd->add_option("--timeout-ms", timeout_ms);
  serve_cmd->add_option("--session-cap", session_cap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*build_cmd) return run_index_build(build_catalog, build_out, buckets, cell);
    if (*stats_cmd) return run_index_stats(stats_index, stats_catalog);
    if (*query_cmd) return run_query(query);
    if (*bench_cmd) return run_bench(bench);
    if (*gen_cmd) {
      std::tie(synth.height, synth.width) = parse_dims(gen_size);
      synth.distribution = parse_distribution(gen_dist);
      return run_generate(gen_out, synth);
    }
    if (*serve_cmd) {
      if (port == 0) port = static_cast<int>(std::strtol(env_or("MASKSEARCH_PORT", "8080").c_str(), nullptr, 10));
      if (data_root.empty()) data_root = env_or("MASKSEARCH_DATA_ROOT", ".");
      return run_serve(port, data_root, host, serve_threads, timeout_ms, session_cap);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
