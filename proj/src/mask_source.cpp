#include "masksearch/mask_source.hpp"

#include "masksearch/error.hpp"

namespace masksearch {

Mask MaskSource::load(std::int64_t mask_id) const {
  const MaskRecord* rec = catalog_->find_mask(mask_id);
  if (!rec) throw IoError("mask_id " + std::to_string(mask_id) + " not in catalog");
  ++loads_;
  try {
    Mask m = decode_mask(read_file(catalog_->resolve(rec->path), cold_reads_));
    if ((rec->height && *rec->height != m.height()) || (rec->width && *rec->width != m.width())) {
      throw FormatError(FormatError::Kind::malformed, "dimensions differ from catalog record");
    }
    return m;
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), "mask_id " + std::to_string(mask_id) + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError("mask_id " + std::to_string(mask_id) + ": " + e.what());
  }
}

}  // namespace masksearch
