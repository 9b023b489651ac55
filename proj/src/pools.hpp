#pragma once

#include <vector>

#include "config.hpp"
#include "tensor.hpp"

namespace tcpa {

enum class PromptRole { cls, image };

struct PoolEntry {
  Tensor prompt;  // [L_p×D]
  Tensor key;     // [D]
};

struct PromptPool {
  PromptRole role = PromptRole::image;
  int layer_index = 1;
  std::vector<PoolEntry> entries;
};

// 1 - cos(u, v) in [0, 2]; either norm below the guard yields the
// uninformative value 1. Never NaN.
double cosine_distance(const std::vector<double>& u, const std::vector<double>& v);

struct MatchResult {
  Tensor affinity;                         // [rows×pool]
  Tensor binarized;                        // [rows×pool], 0/1
  std::vector<std::vector<int>> selected;  // per row, ascending pool indices
};

// A[m][k] = cosine_distance(token_m, key_k). Reads raw values only; no
// gradient flows into tokens or keys through the matching.
MatchResult build_affinity(const Tensor& tokens, const PromptPool& pool);

// Fills `binarized`/`selected` with the per-row top-k. most_similar keeps the
// k smallest distances; paper_literal_largest_distance keeps the k largest.
// Ties break toward the lowest pool index.
void binarize_topk(MatchResult& match, int top_k, MatchDirection direction);

// Fixed slot order of the single-pass sequence and its 0/1 attention mask.
// Token rows attend all token columns; the CLS row additionally attends its
// selected CLS-prompt blocks and each patch row its selected image-prompt
// blocks. Prompt rows are all-zero (their outputs are discarded).
struct MaskMatrix {
  int prompt_len = 1;
  int n_cls_entries = 0;
  int n_img_entries = 0;
  int n_patches = 0;
  Tensor mask;  // [T×T]

  int total() const { return 1 + (n_cls_entries + n_img_entries) * prompt_len + n_patches; }
  int cls_prompt_begin() const { return 1; }
  int img_prompt_begin() const { return 1 + n_cls_entries * prompt_len; }
  int patch_begin() const { return 1 + (n_cls_entries + n_img_entries) * prompt_len; }
};

MaskMatrix assemble_mask(const MatchResult& cls_match, const MatchResult& img_match,
                         const TcpaConfig& config, int n_patches);

// All-ones over token rows and every prompt column: the shared-prompt
// (VPT-style) attention pattern used by the dense_prompt variant.
MaskMatrix dense_prompt_mask(const TcpaConfig& config, int n_patches);

}  // namespace tcpa
