#pragma once

#include <utility>
#include <vector>

#include "backbone.hpp"
#include "pools.hpp"

namespace tcpa {

// Per-head [T×T] attention maps captured for diagnostics: the map before any
// masking and the one actually applied to the values. Stored detached.
struct AttentionSnapshot {
  std::vector<Tensor> pre_mask;
  std::vector<Tensor> effective;
};

// Multi-head attention over a sequence laid out per MaskMatrix. In
// post_softmax_multiplicative mode the softmax'd map is multiplied by the
// mask with no renormalization; in pre_softmax_additive mode masked logits
// get -1e30 before the softmax so unmasked rows stay row-stochastic.
Tensor masked_attention(const Tensor& seq, const MaskMatrix& mask, const AttnProj& proj,
                        int num_heads, MaskMode mode, AttentionSnapshot* snapshot = nullptr);

// Matched (token snapshot, key handle) pairs feeding the pull terms.
using PullPairList = std::vector<std::pair<std::vector<double>, Tensor>>;

struct TcpaAttentionResult {
  Tensor tokens_out;  // [(1+N)×D]; prompt output rows already discarded
  MaskMatrix mask;
  MatchResult cls_match;
  MatchResult img_match;
  PullPairList cls_pairs;
  PullPairList img_pairs;
  AttentionSnapshot snapshot;  // filled when capture was requested
};

// Single-pass TCPA attention: matches the raw CLS/patch tokens against their
// pools, assembles the coordination mask, attends once over
// [CLS | CLS prompts | image prompts | patches], and keeps only the CLS and
// patch output rows.
TcpaAttentionResult tcpa_block_attention(const Tensor& normed, const Tensor& raw,
                                         const PromptPool& cls_pool, const PromptPool& img_pool,
                                         const TcpaConfig& config, const AttnProj& proj,
                                         int num_heads, bool capture = false);

// Shared-prompt attention over the same slot layout with no selection; used
// by the dense_prompt variant.
TcpaAttentionResult dense_prompt_attention(const Tensor& normed, const PromptPool& cls_pool,
                                           const PromptPool& img_pool, const TcpaConfig& config,
                                           const AttnProj& proj, int num_heads,
                                           bool capture = false);

// Two dense attention passes with one prompt per role: pass 1 attends
// [c, p_cls, h_1..h_N] and keeps the CLS output, pass 2 attends
// [c, p_img, h_1..h_N] and keeps the patch outputs. The discarded rows are
// computed and dropped.
TokenState reference_two_pass(const TokenState& state, const Tensor& cls_prompt,
                              const Tensor& img_prompt, const AttnProj& proj, int num_heads);

}  // namespace tcpa
