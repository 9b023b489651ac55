#pragma once

#include <functional>

#include "config.hpp"
#include "tensor.hpp"

namespace tcpa {

struct AttnProj {
  Tensor wq, bq;  // [D×D], [D]
  Tensor wk, bk;
  Tensor wv, bv;
  Tensor wo, bo;
};

struct BlockParams {
  Tensor ln1_gain, ln1_bias;
  AttnProj proj;
  Tensor ln2_gain, ln2_bias;
  Tensor ffn_w1, ffn_b1;  // [D×F], [F]
  Tensor ffn_w2, ffn_b2;  // [F×D], [D]
};

struct BackboneParams {
  Tensor embed_w;  // [h·w·C × D]
  Tensor embed_b;  // [D]
  Tensor pos;      // [(N+1)×D], row 0 is the CLS slot
  Tensor cls;      // [D]
  std::vector<BlockParams> blocks;
};

struct HeadParams {
  Tensor w;  // [D×num_classes]
  Tensor b;  // [num_classes]
};

struct TokenState {
  Tensor cls;      // [1×D]
  Tensor patches;  // [N×D]
  int layer_index = 1;
};

// Deterministic truncated-normal(0, 0.02) init for weight matrices, position
// encodings, and the CLS vector; biases zero; LayerNorm gains one. Bit-exact
// for a given seed.
BackboneParams init_backbone(const ModelConfig& config, uint64_t seed);
HeadParams init_head(const ModelConfig& config, uint64_t seed);

// Flattens patches row-major over the patch grid (then pixel row, column,
// channel), applies the embedding affine map, and adds position encodings.
TokenState patch_embed(const Tensor& image, const BackboneParams& params,
                       const ModelConfig& config);

// The hook receives the LayerNorm'd token sequence plus the raw pre-norm
// tokens (prompt matching keys off the latter) and returns one output row per
// token.
using AttentionHook =
    std::function<Tensor(const Tensor& normed, const Tensor& raw, const AttnProj& proj)>;

// Pre-norm transformer block: LN -> hook -> residual -> LN -> FFN -> residual.
TokenState block_forward(const TokenState& state, const BlockParams& block,
                         const AttentionHook& hook);

// y = head(cls_final); logits only, no softmax.
Tensor classify(const Tensor& cls_final, const HeadParams& head);

// Plain dense multi-head attention over the given sequence.
Tensor dense_attention(const Tensor& seq, const AttnProj& proj, int num_heads);

}  // namespace tcpa
