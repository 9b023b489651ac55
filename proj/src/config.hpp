#pragma once

#include <cstdint>
#include <string>

#include "errors.hpp"

namespace tcpa {

enum class MatchDirection { most_similar, paper_literal_largest_distance };
enum class MaskMode { post_softmax_multiplicative, pre_softmax_additive };
enum class Variant { tcpa, linear_probe, dense_prompt };
enum class OptimizerKind { adamw, sgd };
enum class ScheduleKind { cosine_annealing };

struct ModelConfig {
  int image_h = 32;
  int image_w = 32;
  int channels = 3;
  int patch_h = 4;
  int patch_w = 4;
  int embed_dim = 64;
  int num_layers = 4;
  int num_heads = 4;
  int ffn_dim = 256;
  int num_classes = 4;

  int num_patches() const { return (image_h / patch_h) * (image_w / patch_w); }
  int patch_dim() const { return patch_h * patch_w * channels; }
  int head_dim() const { return embed_dim / num_heads; }

  void validate() const;
};

struct TcpaConfig {
  int prompt_len = 1;
  int cls_pool_size = 10;
  int img_pool_size = 20;
  int cls_top_k = 1;
  int img_top_k = 2;
  MatchDirection match_direction = MatchDirection::most_similar;
  MaskMode mask_mode = MaskMode::post_softmax_multiplicative;

  // Sequence length of the single-pass attention input.
  int total_tokens(int n_patches) const {
    return 1 + cls_pool_size * prompt_len + img_pool_size * prompt_len + n_patches;
  }

  void validate() const;
};

struct TrainConfig {
  double lambda_i = 0.5;
  double lambda_c = 0.5;
  int epochs = 100;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  int batch_size = 16;
  uint64_t seed = 0;
  ScheduleKind schedule = ScheduleKind::cosine_annealing;
  OptimizerKind optimizer = OptimizerKind::adamw;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

std::string to_string(MatchDirection d);
std::string to_string(MaskMode m);
std::string to_string(Variant v);
std::string to_string(OptimizerKind o);
std::string to_string(ScheduleKind s);

MatchDirection match_direction_from_string(const std::string& s);
MaskMode mask_mode_from_string(const std::string& s);
Variant variant_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);
ScheduleKind schedule_from_string(const std::string& s);

}  // namespace tcpa
