#include "dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rng.hpp"

namespace tcpa {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'P', 'D'};

// Stream ids for Rng::stream so generator and shuffle draws never interleave.
constexpr uint64_t kStreamTemplates = 1;
constexpr uint64_t kStreamNoise = 2;
constexpr uint64_t kStreamShuffleBase = 1000;

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

bool read_u8(std::istream& is, uint8_t& v) { return read_exact(is, &v, 1); }

bool read_f64(std::istream& is, double& v) {
  unsigned char b[8];
  if (!read_exact(is, b, 8)) return false;
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  v = std::bit_cast<double>(u);
  return true;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(IoError::Kind::open, "cannot open for writing: " + path);
  write_bytes(os, kMagic, 4);
  write_u32(os, kDatasetFormatVersion);
  write_u32(os, static_cast<uint32_t>(ds.size()));
  write_u16(os, static_cast<uint16_t>(ds.image_h));
  write_u16(os, static_cast<uint16_t>(ds.image_w));
  unsigned char c = static_cast<unsigned char>(ds.channels);
  write_bytes(os, &c, 1);
  write_u16(os, static_cast<uint16_t>(ds.num_classes));
  for (const Tensor& img : ds.images)
    for (double v : *img.data) write_f64(os, v);
  for (int label : ds.labels) write_u16(os, static_cast<uint16_t>(label));
  os.flush();
  if (!os) throw IoError(IoError::Kind::write, "write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
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
  if (version != kDatasetFormatVersion)
    throw IoError(IoError::Kind::version,
                  "unsupported dataset container version " + std::to_string(version));

  uint32_t samples = 0;
  uint16_t h = 0, w = 0, classes = 0;
  uint8_t c = 0;
  if (!read_u32(is, samples) || !read_u16(is, h) || !read_u16(is, w) || !read_u8(is, c) ||
      !read_u16(is, classes))
    throw IoError(IoError::Kind::truncation, "file shorter than header: " + path);
  if (h == 0 || w == 0 || c == 0 || classes == 0)
    throw IoError(IoError::Kind::shape_table, "zero extent in dataset header");

  Dataset ds;
  ds.image_h = h;
  ds.image_w = w;
  ds.channels = c;
  ds.num_classes = classes;
  const int64_t pixels = int64_t{h} * w * c;
  ds.images.reserve(samples);
  for (uint32_t s = 0; s < samples; ++s) {
    Tensor img = Tensor::zeros({h, w, c});
    for (int64_t k = 0; k < pixels; ++k) {
      double v = 0.0;
      if (!read_f64(is, v))
        throw IoError(IoError::Kind::truncation,
                      "truncated image payload at sample " + std::to_string(s));
      if (!(v >= 0.0 && v <= 1.0))
        throw IoError(IoError::Kind::value_range,
                      "image value outside [0,1] at sample " + std::to_string(s));
      (*img.data)[static_cast<size_t>(k)] = v;
    }
    ds.images.push_back(std::move(img));
  }
  ds.labels.resize(samples);
  for (uint32_t s = 0; s < samples; ++s) {
    uint16_t label = 0;
    if (!read_u16(is, label))
      throw IoError(IoError::Kind::truncation,
                    "truncated label payload at sample " + std::to_string(s));
    if (label >= classes)
      throw IoError(IoError::Kind::label_range, "label " + std::to_string(label) +
                                                    " >= num_classes at sample " +
                                                    std::to_string(s));
    ds.labels[s] = label;
  }
  char extra;
  if (is.read(&extra, 1); is.gcount() == 1)
    throw IoError(IoError::Kind::shape_table, "trailing bytes after label table");
  return ds;
}

std::vector<Tensor> synthetic_templates(const SynthSpec& spec) {
  if (spec.classes < 2) throw ContractError("gen_synthetic: classes must be >= 2");
  Rng rng = Rng::stream(spec.seed, kStreamTemplates);

  // Block grid independent of any model patching; 8x8 blocks at default size.
  const int block_h = std::max(1, spec.image_h / 8);
  const int block_w = std::max(1, spec.image_w / 8);
  const int grid_h = spec.image_h / block_h;
  const int grid_w = spec.image_w / block_w;
  const int n_blocks = grid_h * grid_w;
  const int n_glyphs = spec.classes;

  // Shared glyph set; values keep clearance for noise before clipping.
  std::vector<std::vector<double>> glyphs(static_cast<size_t>(n_glyphs));
  for (auto& g : glyphs) {
    g.resize(static_cast<size_t>(block_h) * block_w * spec.channels);
    for (auto& v : g) v = rng.uniform(0.2, 0.8);
  }

  std::vector<Tensor> templates;
  templates.reserve(static_cast<size_t>(spec.classes));
  for (int k = 0; k < spec.classes; ++k) {
    Tensor t = Tensor::zeros({spec.image_h, spec.image_w, spec.channels});
    for (int b = 0; b < n_blocks; ++b) {
      const int glyph = (b + k) % n_glyphs;
      const int by = (b / grid_w) * block_h;
      const int bx = (b % grid_w) * block_w;
      for (int y = 0; y < block_h; ++y) {
        const int iy = by + y;
        if (iy >= spec.image_h) continue;
        for (int x = 0; x < block_w; ++x) {
          const int ix = bx + x;
          if (ix >= spec.image_w) continue;
          for (int ch = 0; ch < spec.channels; ++ch) {
            const size_t src = (static_cast<size_t>(y) * block_w + x) * spec.channels + ch;
            const size_t dst =
                (static_cast<size_t>(iy) * spec.image_w + ix) * spec.channels + ch;
            (*t.data)[dst] = glyphs[static_cast<size_t>(glyph)][src];
          }
        }
      }
    }
    templates.push_back(std::move(t));
  }
  return templates;
}

Dataset gen_synthetic(const SynthSpec& spec) {
  std::vector<Tensor> templates = synthetic_templates(spec);
  Rng rng = Rng::stream(spec.seed, kStreamNoise);

  Dataset ds;
  ds.image_h = spec.image_h;
  ds.image_w = spec.image_w;
  ds.channels = spec.channels;
  ds.num_classes = spec.classes;
  for (int k = 0; k < spec.classes; ++k) {
    for (int s = 0; s < spec.samples_per_class; ++s) {
      Tensor img = templates[static_cast<size_t>(k)].detach();
      if (spec.noise_std > 0.0) {
        for (auto& v : *img.data) {
          v = std::clamp(v + spec.noise_std * rng.gaussian(), 0.0, 1.0);
        }
      }
      ds.images.push_back(std::move(img));
      ds.labels.push_back(k);
    }
  }
  return ds;
}

std::vector<std::vector<int>> batch_iter(int dataset_size, int batch_size, uint64_t seed,
                                         int epoch) {
  if (batch_size < 1) throw ContractError("batch_iter: batch_size must be >= 1");
  std::vector<int> order(static_cast<size_t>(dataset_size));
  for (int i = 0; i < dataset_size; ++i) order[static_cast<size_t>(i)] = i;
  Rng rng = Rng::stream(seed, kStreamShuffleBase + static_cast<uint64_t>(epoch));
  rng.shuffle(order);

  std::vector<std::vector<int>> batches;
  for (int start = 0; start < dataset_size; start += batch_size) {
    const int count = std::min(batch_size, dataset_size - start);
    batches.emplace_back(order.begin() + start, order.begin() + start + count);
  }
  return batches;
}

}  // namespace tcpa
