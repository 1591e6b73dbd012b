#pragma once

#include <cstdint>
#include <string>

#include "nser/param_store.hpp"

namespace nser {

// Binary checkpoint layout:
//   magic "NSER\x01"
//   u8  kind_len, kind bytes            ("model" / "teacher" / ...)
//   u32 record count
//   per record, sorted by name:
//     u16 name_len, name bytes
//     u32 rank, u32 dims[rank]
//     u64 byte offset into payload
//   u64 payload byte count
//   payload: row-major little-endian f32, records concatenated in
//            manifest order
//   u32 CRC32 (IEEE) of payload
//
// All integers little-endian. Writing the same store twice yields identical
// bytes.
void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::string& kind);

// Loads parameters (values only; grads and momentum zeroed). Throws on bad
// magic, wrong kind, or CRC mismatch.
ParamStore load_checkpoint(const std::string& path, const std::string& kind);

// Reads just the kind tag; throws on bad magic.
std::string checkpoint_kind(const std::string& path);

uint32_t crc32_ieee(const uint8_t* data, size_t len);

}  // namespace nser
