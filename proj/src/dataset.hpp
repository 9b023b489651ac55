#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace tcpa {

// Immutable after load/generation; images hold values in [0, 1].
struct Dataset {
  int image_h = 0;
  int image_w = 0;
  int channels = 0;
  int num_classes = 0;
  std::vector<Tensor> images;  // each [H×W×C]
  std::vector<int> labels;
  std::string split = "train";

  int size() const { return static_cast<int>(images.size()); }
};

// "TCPD" container: magic, u32 version=1, u32 S, u16 H, u16 W, u8 C,
// u16 num_classes, S images as f64 row-major, then S labels as u16.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

struct SynthSpec {
  int classes = 4;
  int samples_per_class = 64;
  double noise_std = 0.05;
  uint64_t seed = 0;
  int image_h = 32;
  int image_w = 32;
  int channels = 3;
};

// Class templates are built from a shared glyph set arranged class-specifically
// (cyclic shift over a block grid), so class means over positions coincide and
// class identity lives in the spatial arrangement. Samples add clipped
// Gaussian noise on top.
Dataset gen_synthetic(const SynthSpec& spec);

// The noiseless per-class templates the generator draws around.
std::vector<Tensor> synthetic_templates(const SynthSpec& spec);

// Deterministic permutation of {0..size-1} split into batches; the final
// short batch is kept.
std::vector<std::vector<int>> batch_iter(int dataset_size, int batch_size, uint64_t seed,
                                         int epoch);

constexpr uint32_t kDatasetFormatVersion = 1;

}  // namespace tcpa
