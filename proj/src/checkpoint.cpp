#include "nser/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <vector>

#include "nser/error.hpp"

namespace nser {

namespace {

constexpr char kMagic[5] = {'N', 'S', 'E', 'R', '\x01'};

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
  const uint8_t* p;
  size_t n;
  size_t pos = 0;
  void need(size_t k) const {
    if (pos + k > n) throw Error("checkpoint: truncated file");
  }
  uint8_t u8() { need(1); return p[pos++]; }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(p[pos] | (p[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  std::string bytes(size_t k) {
    need(k);
    std::string s(reinterpret_cast<const char*>(p + pos), k);
    pos += k;
    return s;
  }
};

}  // namespace

uint32_t crc32_ieee(const uint8_t* data, size_t len) {
  static uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    init = true;
  }
  uint32_t crc = 0xFFFFFFFFu;
  for (size_t i = 0; i < len; ++i)
    crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::string& kind) {
  std::vector<const ParamStore::Entry*> recs;
  for (const auto& e : store.entries()) recs.push_back(&e);
  std::sort(recs.begin(), recs.end(),
            [](const auto* a, const auto* b) { return a->name < b->name; });

  std::string payload;
  std::string manifest;
  put_u32(manifest, static_cast<uint32_t>(recs.size()));
  for (const auto* e : recs) {
    put_u16(manifest, static_cast<uint16_t>(e->name.size()));
    manifest += e->name;
    put_u32(manifest, static_cast<uint32_t>(e->value.rank()));
    for (int d : e->value.shape) put_u32(manifest, static_cast<uint32_t>(d));
    put_u64(manifest, payload.size());
    for (float v : e->value.data) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_u32(payload, bits);
    }
  }

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  out.push_back(static_cast<char>(kind.size()));
  out += kind;
  out += manifest;
  put_u64(out, payload.size());
  out += payload;
  put_u32(out, crc32_ieee(reinterpret_cast<const uint8_t*>(payload.data()),
                          payload.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("checkpoint: cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("checkpoint: write failed for " + path);
}

static std::vector<uint8_t> read_all(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("checkpoint: cannot open " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
  return buf;
}

std::string checkpoint_kind(const std::string& path) {
  std::vector<uint8_t> buf = read_all(path);
  Reader r{buf.data(), buf.size()};
  if (r.bytes(5) != std::string(kMagic, 5))
    throw Error("checkpoint: bad magic in " + path);
  return r.bytes(r.u8());
}

ParamStore load_checkpoint(const std::string& path, const std::string& kind) {
  std::vector<uint8_t> buf = read_all(path);
  Reader r{buf.data(), buf.size()};
  if (r.bytes(5) != std::string(kMagic, 5))
    throw Error("checkpoint: bad magic in " + path);
  std::string file_kind = r.bytes(r.u8());
  if (file_kind != kind)
    throw Error("checkpoint: " + path + " holds a '" + file_kind +
                "' checkpoint, expected '" + kind + "'");
  uint32_t count = r.u32();
  struct Rec {
    std::string name;
    std::vector<int> shape;
    uint64_t offset;
  };
  std::vector<Rec> recs;
  for (uint32_t i = 0; i < count; ++i) {
    Rec rec;
    rec.name = r.bytes(r.u16());
    uint32_t rank = r.u32();
    for (uint32_t k = 0; k < rank; ++k)
      rec.shape.push_back(static_cast<int>(r.u32()));
    rec.offset = r.u64();
    recs.push_back(std::move(rec));
  }
  uint64_t payload_bytes = r.u64();
  size_t payload_pos = r.pos;
  std::string payload = r.bytes(payload_bytes);
  uint32_t stored_crc = r.u32();
  uint32_t actual_crc =
      crc32_ieee(buf.data() + payload_pos, static_cast<size_t>(payload_bytes));
  if (stored_crc != actual_crc)
    throw Error("checkpoint: CRC mismatch in " + path);

  ParamStore store;
  for (const Rec& rec : recs) {
    size_t n = shape_numel(rec.shape);
    if (rec.offset + n * 4 > payload_bytes)
      throw Error("checkpoint: record " + rec.name + " overruns payload");
    Tensor t = Tensor::zeros(rec.shape);
    for (size_t i = 0; i < n; ++i) {
      uint32_t bits = 0;
      for (int k = 0; k < 4; ++k)
        bits |= static_cast<uint32_t>(static_cast<uint8_t>(
                    payload[rec.offset + i * 4 + k]))
                << (8 * k);
      std::memcpy(&t.data[i], &bits, 4);
    }
    store.add(rec.name, std::move(t));
  }
  return store;
}

}  // namespace nser
