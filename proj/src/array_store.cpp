#include "array_store.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

namespace tcpa {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'P', 'W'};

void write_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void write_u16(std::ostream& os, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  write_bytes(os, b, 2);
}

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  write_bytes(os, b, 4);
}

void write_f64(std::ostream& os, double v) {
  const uint64_t u = std::bit_cast<uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  write_bytes(os, b, 8);
}

bool read_exact(std::istream& is, void* p, size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  return static_cast<size_t>(is.gcount()) == n;
}

bool read_u16(std::istream& is, uint16_t& v) {
  unsigned char b[2];
  if (!read_exact(is, b, 2)) return false;
  v = static_cast<uint16_t>(b[0] | (b[1] << 8));
  return true;
}

bool read_u32(std::istream& is, uint32_t& v) {
  unsigned char b[4];
  if (!read_exact(is, b, 4)) return false;
  v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return true;
}

bool read_f64(std::istream& is, double& v) {
  unsigned char b[8];
  if (!read_exact(is, b, 8)) return false;
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  v = std::bit_cast<double>(u);
  return true;
}

}  // namespace

void save_array_store(const ArrayStore& store, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(IoError::Kind::open, "cannot open for writing: " + path);
  write_bytes(os, kMagic, 4);
  write_u32(os, kWeightFormatVersion);
  write_u32(os, static_cast<uint32_t>(store.size()));
  for (const NamedArray& a : store) {
    write_u16(os, static_cast<uint16_t>(a.name.size()));
    write_bytes(os, a.name.data(), a.name.size());
    unsigned char rank = static_cast<unsigned char>(a.shape.size());
    write_bytes(os, &rank, 1);
    for (int e : a.shape) write_u32(os, static_cast<uint32_t>(e));
    for (double v : a.data) write_f64(os, v);
  }
  os.flush();
  if (!os) throw IoError(IoError::Kind::write, "write failed: " + path);
}

ArrayStore load_array_store(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(IoError::Kind::open, "cannot open: " + path);
  char magic[4];
  if (!read_exact(is, magic, 4))
    throw IoError(IoError::Kind::truncation, "file shorter than header: " + path);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw IoError(IoError::Kind::magic, "bad magic bytes in " + path);
  uint32_t version = 0;
  if (!read_u32(is, version))
    throw IoError(IoError::Kind::truncation, "file shorter than header: " + path);
  if (version != kWeightFormatVersion)
    throw IoError(IoError::Kind::version,
                  "unsupported weight container version " + std::to_string(version));
  uint32_t count = 0;
  if (!read_u32(is, count))
    throw IoError(IoError::Kind::truncation, "file shorter than header: " + path);

  ArrayStore store;
  store.reserve(count);
  std::set<std::string> seen;
  for (uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    uint16_t name_len = 0;
    if (!read_u16(is, name_len))
      throw IoError(IoError::Kind::truncation,
                    "truncated at record " + std::to_string(i) + " name length");
    a.name.resize(name_len);
    if (name_len > 0 && !read_exact(is, a.name.data(), name_len))
      throw IoError(IoError::Kind::truncation, "truncated while reading array name");
    if (name_len == 0 || !seen.insert(a.name).second)
      throw IoError(IoError::Kind::shape_table, "empty or duplicate array name: '" + a.name + "'");
    unsigned char rank = 0;
    if (!read_exact(is, &rank, 1))
      throw IoError(IoError::Kind::truncation, "truncated rank for array '" + a.name + "'");
    if (rank == 0)
      throw IoError(IoError::Kind::shape_table, "rank-0 array '" + a.name + "'");
    int64_t n = 1;
    for (int r = 0; r < rank; ++r) {
      uint32_t e = 0;
      if (!read_u32(is, e))
        throw IoError(IoError::Kind::truncation, "truncated extents for array '" + a.name + "'");
      if (e == 0 || n * e > (int64_t{1} << 32))
        throw IoError(IoError::Kind::shape_table,
                      "invalid extent " + std::to_string(e) + " in array '" + a.name + "'");
      a.shape.push_back(static_cast<int>(e));
      n *= e;
    }
    a.data.resize(static_cast<size_t>(n));
    for (int64_t k = 0; k < n; ++k) {
      if (!read_f64(is, a.data[static_cast<size_t>(k)]))
        throw IoError(IoError::Kind::truncation, "truncated payload in array '" + a.name + "'");
    }
    store.push_back(std::move(a));
  }
  // Trailing bytes mean the header's array count disagrees with the payload.
  char extra;
  if (is.read(&extra, 1); is.gcount() == 1)
    throw IoError(IoError::Kind::shape_table, "trailing bytes after last array");
  return store;
}

}  // namespace tcpa
