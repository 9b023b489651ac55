#include "config.hpp"

namespace tcpa {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(image_h, "image_h");
  positive(image_w, "image_w");
  positive(channels, "channels");
  positive(patch_h, "patch_h");
  positive(patch_w, "patch_w");
  positive(embed_dim, "embed_dim");
  positive(num_layers, "num_layers");
  positive(num_heads, "num_heads");
  positive(ffn_dim, "ffn_dim");
  positive(num_classes, "num_classes");
  if (image_h % patch_h != 0)
    throw ConfigError("image_h must be divisible by patch_h");
  if (image_w % patch_w != 0)
    throw ConfigError("image_w must be divisible by patch_w");
  if (embed_dim % num_heads != 0)
    throw ConfigError("embed_dim must be divisible by num_heads");
}

void TcpaConfig::validate() const {
  if (prompt_len < 1) throw ConfigError("prompt_len must be >= 1");
  if (cls_pool_size < 1 || img_pool_size < 1)
    throw ConfigError("pool sizes must be >= 1");
  if (cls_top_k < 1 || cls_top_k > cls_pool_size)
    throw ConfigError("cls_top_k must satisfy 1 <= K_c <= N_c");
  if (img_top_k < 1 || img_top_k > img_pool_size)
    throw ConfigError("img_top_k must satisfy 1 <= K_i <= N_i");
}

void TrainConfig::validate() const {
  if (lambda_i < 0.0 || lambda_c < 0.0) throw ConfigError("lambda weights must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

std::string to_string(MatchDirection d) {
  return d == MatchDirection::most_similar ? "most_similar" : "paper_literal_largest_distance";
}

std::string to_string(MaskMode m) {
  return m == MaskMode::post_softmax_multiplicative ? "post_softmax_multiplicative"
                                                    : "pre_softmax_additive";
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::tcpa: return "tcpa";
    case Variant::linear_probe: return "linear_probe";
    case Variant::dense_prompt: return "dense_prompt";
  }
  return "tcpa";
}

std::string to_string(OptimizerKind o) {
  return o == OptimizerKind::adamw ? "adamw" : "sgd";
}

std::string to_string(ScheduleKind) { return "cosine_annealing"; }

MatchDirection match_direction_from_string(const std::string& s) {
  if (s == "most_similar") return MatchDirection::most_similar;
  if (s == "paper_literal_largest_distance") return MatchDirection::paper_literal_largest_distance;
  throw ConfigError("unknown match_direction: " + s);
}

MaskMode mask_mode_from_string(const std::string& s) {
  if (s == "post_softmax_multiplicative") return MaskMode::post_softmax_multiplicative;
  if (s == "pre_softmax_additive") return MaskMode::pre_softmax_additive;
  throw ConfigError("unknown mask_mode: " + s);
}

Variant variant_from_string(const std::string& s) {
  if (s == "tcpa") return Variant::tcpa;
  if (s == "linear_probe") return Variant::linear_probe;
  if (s == "dense_prompt") return Variant::dense_prompt;
  throw ConfigError("unknown variant: " + s);
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adamw") return OptimizerKind::adamw;
  if (s == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer: " + s);
}

ScheduleKind schedule_from_string(const std::string& s) {
  if (s == "cosine_annealing") return ScheduleKind::cosine_annealing;
  throw ConfigError("unknown schedule: " + s);
}

}  // namespace tcpa
