#include "masksearch/catalog.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "masksearch/error.hpp"

namespace masksearch {

namespace {

using nlohmann::json;

std::int64_t require_int(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw FormatError(FormatError::Kind::malformed,
                      "catalog line " + std::to_string(line) + ": missing integer field '" + key + "'");
  }
  return j.at(key).get<std::int64_t>();
}

std::optional<int> optional_dim(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number_integer() || j.at(key).get<std::int64_t>() < 1) {
    throw FormatError(FormatError::Kind::malformed,
                      "catalog line " + std::to_string(line) + ": field '" + key + "' must be a positive integer");
  }
  return static_cast<int>(j.at(key).get<std::int64_t>());
}

Roi parse_roi(const json& j, std::size_t line) {
  if (!j.is_object()) {
    throw FormatError(FormatError::Kind::malformed,
                      "catalog line " + std::to_string(line) + ": object_roi must be an object");
  }
  Roi roi{static_cast<int>(require_int(j, "r0", line)), static_cast<int>(require_int(j, "c0", line)),
          static_cast<int>(require_int(j, "r1", line)), static_cast<int>(require_int(j, "c1", line))};
  if (roi.empty() || roi.r0 < 0 || roi.c0 < 0) {
    throw FormatError(FormatError::Kind::malformed,
                      "catalog line " + std::to_string(line) + ": object_roi is empty or negative");
  }
  return roi;
}

struct ParsedLines {
  std::vector<MaskRecord> masks;
  std::vector<ImageRecord> images;
  std::vector<std::pair<std::int64_t, std::string>> legend;
};

ParsedLines parse_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open catalog " + file.string());
  ParsedLines out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(FormatError::Kind::malformed,
                        "catalog line " + std::to_string(line) + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
      throw FormatError(FormatError::Kind::malformed,
                        "catalog line " + std::to_string(line) + ": missing 'kind'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mask") {
      MaskRecord rec;
      rec.mask_id = require_int(j, "mask_id", line);
      rec.image_id = require_int(j, "image_id", line);
      rec.model_id = require_int(j, "model_id", line);
      rec.mask_type = require_int(j, "mask_type", line);
      if (!j.contains("path") || !j.at("path").is_string()) {
        throw FormatError(FormatError::Kind::malformed,
                          "catalog line " + std::to_string(line) + ": mask record needs 'path'");
      }
      rec.path = j.at("path").get<std::string>();
      rec.height = optional_dim(j, "height", line);
      rec.width = optional_dim(j, "width", line);
      out.masks.push_back(std::move(rec));
    } else if (kind == "image") {
      ImageRecord rec;
      rec.image_id = require_int(j, "image_id", line);
      rec.true_label = require_int(j, "true_label", line);
      rec.pred_label = require_int(j, "pred_label", line);
      if (j.contains("path") && !j.at("path").is_null()) rec.path = j.at("path").get<std::string>();
      if (j.contains("object_roi") && !j.at("object_roi").is_null()) {
        rec.object_roi = parse_roi(j.at("object_roi"), line);
      }
      out.images.push_back(std::move(rec));
    } else if (kind == "legend") {
      out.legend.emplace_back(require_int(j, "mask_type", line), j.value("name", std::string{}));
    } else {
      throw FormatError(FormatError::Kind::malformed,
                        "catalog line " + std::to_string(line) + ": unknown kind '" + kind + "'");
    }
  }
  return out;
}

}  // namespace

Catalog Catalog::load(const std::filesystem::path& file) {
  Catalog cat(file.parent_path());
  cat.append(file);
  return cat;
}

void Catalog::append(const std::filesystem::path& file) {
  ParsedLines parsed = parse_file(file);
  Catalog next = *this;
  for (auto& rec : parsed.masks) {
    if (!rec.height || !rec.width) {
      try {
        const MaskHeader hdr = probe_mask(next.resolve(rec.path));
        rec.height = hdr.height;
        rec.width = hdr.width;
      } catch (const Error&) {
        // Left unknown; queries touching this mask report the storage error.
      }
    }
    next.add_mask(std::move(rec));
  }
  for (auto& rec : parsed.images) next.add_image(std::move(rec));
  for (auto& [type, name] : parsed.legend) next.set_legend(type, std::move(name));
  *this = std::move(next);
}

void Catalog::add_mask(MaskRecord rec) {
  if (mask_index_.contains(rec.mask_id)) {
    throw CatalogError("duplicate mask_id " + std::to_string(rec.mask_id));
  }
  mask_index_.emplace(rec.mask_id, masks_.size());
  masks_.push_back(std::move(rec));
}

void Catalog::add_image(ImageRecord rec) {
  if (image_index_.contains(rec.image_id)) {
    throw CatalogError("duplicate image_id " + std::to_string(rec.image_id));
  }
  image_index_.emplace(rec.image_id, images_.size());
  images_.push_back(std::move(rec));
}

void Catalog::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write catalog " + file.string());
  for (const auto& [type, name] : legend_) {
    out << json{{"kind", "legend"}, {"mask_type", type}, {"name", name}}.dump() << '\n';
  }
  for (const auto& img : images_) {
    json j{{"kind", "image"},           {"image_id", img.image_id}, {"true_label", img.true_label},
           {"pred_label", img.pred_label}, {"path", nullptr},         {"object_roi", nullptr}};
    if (img.path) j["path"] = *img.path;
    if (img.object_roi) {
      const Roi& r = *img.object_roi;
      j["object_roi"] = json{{"r0", r.r0}, {"c0", r.c0}, {"r1", r.r1}, {"c1", r.c1}};
    }
    out << j.dump() << '\n';
  }
  for (const auto& m : masks_) {
    json j{{"kind", "mask"},         {"mask_id", m.mask_id},     {"image_id", m.image_id},
           {"model_id", m.model_id}, {"mask_type", m.mask_type}, {"path", m.path}};
    if (m.height) j["height"] = *m.height;
    if (m.width) j["width"] = *m.width;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + file.string());
}

const MaskRecord* Catalog::find_mask(std::int64_t mask_id) const {
  const auto it = mask_index_.find(mask_id);
  return it == mask_index_.end() ? nullptr : &masks_[it->second];
}

const ImageRecord* Catalog::find_image(std::int64_t image_id) const {
  const auto it = image_index_.find(image_id);
  return it == image_index_.end() ? nullptr : &images_[it->second];
}

std::filesystem::path Catalog::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir_ / p;
}

std::pair<int, int> Catalog::mask_dims(const MaskRecord& rec) const {
  if (!rec.height || !rec.width) {
    throw IoError("dimensions unknown for mask_id " + std::to_string(rec.mask_id) + " (" + rec.path + ")");
  }
  return {*rec.height, *rec.width};
}

}  // namespace masksearch
