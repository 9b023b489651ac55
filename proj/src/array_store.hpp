#pragma once

#include <string>
#include <vector>

#include "errors.hpp"
#include "tensor.hpp"

namespace tcpa {

// "TCPW" container: little-endian, magic + u32 version + u32 array count,
// then per array u16 name-length, UTF-8 name, u8 rank, u32 extents, raw
// 64-bit floats row-major. No padding between records.

struct NamedArray {
  std::string name;
  std::vector<int> shape;
  std::vector<double> data;
};

using ArrayStore = std::vector<NamedArray>;

void save_array_store(const ArrayStore& store, const std::string& path);
ArrayStore load_array_store(const std::string& path);

constexpr uint32_t kWeightFormatVersion = 1;

}  // namespace tcpa
