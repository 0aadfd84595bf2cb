#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "masksearch/catalog.hpp"
#include "masksearch/chi.hpp"
#include "masksearch/engine.hpp"
#include "masksearch/error.hpp"
#include "masksearch/image.hpp"
#include "masksearch/json_io.hpp"
#include "masksearch/oracle.hpp"
#include "masksearch/parser.hpp"
#include "masksearch/synth.hpp"

namespace py = pybind11;
using namespace masksearch;

namespace {

Mask mask_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ValidationError("mask array must be 2-D");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return {h, w, std::vector<float>(a.data(), a.data() + a.size())};
}

py::array_t<float> mask_to_array(const Mask& m) {
  py::array_t<float> out({m.height(), m.width()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Roi roi_from_tuple(const std::tuple<std::tuple<int, int>, std::tuple<int, int>>& t) {
  return {std::get<0>(std::get<0>(t)), std::get<1>(std::get<0>(t)), std::get<0>(std::get<1>(t)),
          std::get<1>(std::get<1>(t))};
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict result_to_py(const QueryResult& r) {
  py::list rows;
  for (const ResultRow& row : r.rows) {
    rows.append(py::make_tuple(row.key, row.value ? py::cast(*row.value) : py::none()));
  }
  py::dict out;
  out["rows"] = rows;
  out["stats"] = to_py(stats_to_json(r.stats, true));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pixel-count queries over image masks";

  auto base = py::register_exception<Error>(m, "MaskSearchError");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("load_mask", [](const std::filesystem::path& p) { return mask_to_array(load_mask(p)); },
        "Decode an MSK1 or PGM mask file into a float32 array.");
  m.def("save_mask", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
                        const std::filesystem::path& p) { save_mask(mask_from_array(a), p); });
  m.def(
      "cp",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
         const std::tuple<std::tuple<int, int>, std::tuple<int, int>>& roi, double lv, double uv) {
        return cp_exact(mask_from_array(a), roi_from_tuple(roi), ValueRange(lv, uv));
      },
      py::arg("mask"), py::arg("roi"), py::arg("lv"), py::arg("uv"),
      "Exact count of pixels in roi ((r0, c0), (r1, c1)) with value in the range.");

  py::class_<ChiConfig>(m, "ChiConfig")
      .def(py::init([](std::uint32_t buckets, std::uint32_t cell_h, std::uint32_t cell_w) {
             ChiConfig c{buckets, cell_h, cell_w};
             c.validate();
             return c;
           }),
           py::arg("buckets") = 16, py::arg("cell_h") = 32, py::arg("cell_w") = 32)
      .def_readonly("buckets", &ChiConfig::buckets)
      .def_readonly("cell_h", &ChiConfig::cell_h)
      .def_readonly("cell_w", &ChiConfig::cell_w);

  py::class_<Catalog>(m, "Catalog")
      .def_static("load", &Catalog::load)
      .def_property_readonly("mask_ids",
                             [](const Catalog& c) {
                               std::vector<std::int64_t> ids;
                               for (const auto& r : c.masks()) ids.push_back(r.mask_id);
                               return ids;
                             })
      .def_property_readonly("image_ids", [](const Catalog& c) {
        std::vector<std::int64_t> ids;
        for (const auto& r : c.images()) ids.push_back(r.image_id);
        return ids;
      });

  py::class_<Chi>(m, "Index")
      .def(py::init<ChiConfig>(), py::arg("config") = ChiConfig{})
      .def_static("build", [](const Catalog& c, const ChiConfig& cfg) { return build_index(c, cfg); },
                  py::arg("catalog"), py::arg("config") = ChiConfig{})
      .def_static("load", &Chi::load)
      .def("save", &Chi::save)
      .def("__len__", &Chi::size)
      .def_property_readonly("config", &Chi::config)
      .def(
          "bounds",
          [](const Chi& chi, std::int64_t mask_id, const std::tuple<std::tuple<int, int>, std::tuple<int, int>>& roi,
             double lv, double uv) {
            const BoundPair b = bounds(chi, mask_id, roi_from_tuple(roi), ValueRange(lv, uv));
            return py::make_tuple(b.lower, b.upper);
          },
          py::arg("mask_id"), py::arg("roi"), py::arg("lv"), py::arg("uv"));

  m.def(
      "parse", [](const std::string& sql, const Bindings& params) { return render(parse(sql, params)); },
      py::arg("sql"), py::arg("params") = Bindings{}, "Parse a statement and return its canonical text.");

  m.def(
      "query",
      [](const Catalog& catalog, Chi& chi, const std::string& sql, const std::string& mode, const Bindings& params,
         unsigned threads) {
        const CheckedPlan checked = validate(parse(sql, params), catalog);
        const MaskSource source(catalog);
        Engine engine(catalog, chi, source);
        ExecOptions opts;
        opts.mode = parse_index_mode(mode);
        opts.threads = std::max(1u, threads);
        QueryResult r;
        {
          py::gil_scoped_release release;
          r = engine.eval(checked, opts);
        }
        return result_to_py(r);
      },
      py::arg("catalog"), py::arg("index"), py::arg("sql"), py::arg("mode") = "full", py::arg("params") = Bindings{},
      py::arg("threads") = 1, "Run a statement; returns {'rows': [(key, value)], 'stats': {...}}.");

  m.def(
      "query_naive",
      [](const Catalog& catalog, const std::string& sql, const Bindings& params) {
        const CheckedPlan checked = validate(parse(sql, params), catalog);
        const MaskSource source(catalog);
        return result_to_py(eval_naive(checked, source));
      },
      py::arg("catalog"), py::arg("sql"), py::arg("params") = Bindings{},
      "Full-scan reference evaluation of a statement.");

  m.def("confusion_matrix", [](const Catalog& c, std::optional<std::int64_t> model_id) {
    return to_py(to_json(confusion_matrix(c, model_id)));
  }, py::arg("catalog"), py::arg("model_id") = py::none());

  m.def(
      "generate",
      [](const std::filesystem::path& dir, int images, int height, int width, std::uint64_t seed,
         const std::string& dist, bool write_images) {
        SynthConfig cfg;
        cfg.images = images;
        cfg.height = height;
        cfg.width = width;
        cfg.seed = seed;
        cfg.distribution = parse_distribution(dist);
        cfg.write_images = write_images;
        return generate_dataset(dir, cfg);
      },
      py::arg("dir"), py::arg("images") = 50, py::arg("height") = 64, py::arg("width") = 64, py::arg("seed") = 1,
      py::arg("distribution") = "blobs", py::arg("write_images") = false,
      "Write a synthetic dataset and return its catalog.");

  m.def(
      "augment",
      [](const std::filesystem::path& src, const std::filesystem::path& dst,
         const std::tuple<std::tuple<int, int>, std::tuple<int, int>>& roi, std::uint64_t seed) {
        save_pnm(augment_image(load_pnm(src), roi_from_tuple(roi), seed), dst);
      },
      py::arg("src"), py::arg("dst"), py::arg("roi"), py::arg("seed"),
      "Replace pixels outside roi with seeded noise.");
}
