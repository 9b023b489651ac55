#include "attention.hpp"

#include <cmath>

#include "ops.hpp"

namespace tcpa {

namespace {

constexpr double kMaskNegInf = -1e30;

Tensor additive_mask_constant(const MaskMatrix& mask) {
  Tensor c = Tensor::zeros(mask.mask.shape);
  for (size_t i = 0; i < c.data->size(); ++i)
    (*c.data)[i] = (*mask.mask.data)[i] == 0.0 ? kMaskNegInf : 0.0;
  return c;
}

Tensor prompt_block(const PromptPool& pool) {
  std::vector<Tensor> rows;
  rows.reserve(pool.entries.size());
  for (const PoolEntry& e : pool.entries) rows.push_back(e.prompt);
  return concat_rows(rows);
}

PullPairList collect_pairs(const Tensor& raw_tokens, int row_offset, const MatchResult& match,
                           const PromptPool& pool) {
  PullPairList pairs;
  const int d = raw_tokens.cols();
  for (size_t m = 0; m < match.selected.size(); ++m) {
    std::vector<double> token(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j)
      token[static_cast<size_t>(j)] = raw_tokens.at(row_offset + static_cast<int>(m), j);
    for (int k : match.selected[m])
      pairs.emplace_back(token, pool.entries[static_cast<size_t>(k)].key);
  }
  return pairs;
}

}  // namespace

Tensor masked_attention(const Tensor& seq, const MaskMatrix& mask, const AttnProj& proj,
                        int num_heads, MaskMode mode, AttentionSnapshot* snapshot) {
  const int t = seq.rows();
  const int d = seq.cols();
  if (t != mask.total()) throw DimensionError("masked_attention: sequence/mask extent mismatch");
  if (d % num_heads != 0) throw DimensionError("masked_attention: D not divisible by heads");
  const int dk = d / num_heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dk));

  Tensor q = add_row_broadcast(matmul(seq, proj.wq), proj.bq);
  Tensor k = add_row_broadcast(matmul(seq, proj.wk), proj.bk);
  Tensor v = add_row_broadcast(matmul(seq, proj.wv), proj.bv);

  Tensor additive;
  if (mode == MaskMode::pre_softmax_additive) additive = additive_mask_constant(mask);

  std::vector<Tensor> heads;
  heads.reserve(static_cast<size_t>(num_heads));
  for (int h = 0; h < num_heads; ++h) {
    Tensor qh = slice_cols(q, h * dk, dk);
    Tensor kh = slice_cols(k, h * dk, dk);
    Tensor vh = slice_cols(v, h * dk, dk);
    Tensor scores = scale(matmul(qh, transpose(kh)), inv_scale);

    Tensor effective;
    if (mode == MaskMode::post_softmax_multiplicative) {
      Tensor attn = softmax_rows(scores);
      effective = mul(attn, mask.mask);
      if (snapshot) {
        snapshot->pre_mask.push_back(attn.detach());
        snapshot->effective.push_back(effective.detach());
      }
    } else {
      effective = softmax_rows(add(scores, additive));
      if (snapshot) {
        snapshot->pre_mask.push_back(softmax_rows(scores.detach()));
        snapshot->effective.push_back(effective.detach());
      }
    }
    heads.push_back(matmul(effective, vh));
  }
  Tensor merged = concat_cols(heads);
  return add_row_broadcast(matmul(merged, proj.wo), proj.bo);
}

TcpaAttentionResult tcpa_block_attention(const Tensor& normed, const Tensor& raw,
                                         const PromptPool& cls_pool, const PromptPool& img_pool,
                                         const TcpaConfig& config, const AttnProj& proj,
                                         int num_heads, bool capture) {
  const int n = raw.rows() - 1;
  if (n < 1) throw DimensionError("tcpa_block_attention: need at least one patch token");

  TcpaAttentionResult res;
  // Matching reads the raw pre-norm tokens; gradients never flow through it.
  res.cls_match = build_affinity(slice_rows(raw, 0, 1).detach(), cls_pool);
  binarize_topk(res.cls_match, config.cls_top_k, config.match_direction);
  res.img_match = build_affinity(slice_rows(raw, 1, n).detach(), img_pool);
  binarize_topk(res.img_match, config.img_top_k, config.match_direction);

  res.mask = assemble_mask(res.cls_match, res.img_match, config, n);
  res.cls_pairs = collect_pairs(raw, 0, res.cls_match, cls_pool);
  res.img_pairs = collect_pairs(raw, 1, res.img_match, img_pool);

  Tensor seq = concat_rows({slice_rows(normed, 0, 1), prompt_block(cls_pool),
                            prompt_block(img_pool), slice_rows(normed, 1, n)});
  Tensor out_full = masked_attention(seq, res.mask, proj, num_heads, config.mask_mode,
                                     capture ? &res.snapshot : nullptr);
  res.tokens_out =
      concat_rows({slice_rows(out_full, 0, 1), slice_rows(out_full, res.mask.patch_begin(), n)});
  return res;
}

TcpaAttentionResult dense_prompt_attention(const Tensor& normed, const PromptPool& cls_pool,
                                           const PromptPool& img_pool, const TcpaConfig& config,
                                           const AttnProj& proj, int num_heads, bool capture) {
  const int n = normed.rows() - 1;
  TcpaAttentionResult res;
  res.mask = dense_prompt_mask(config, n);
  Tensor seq = concat_rows({slice_rows(normed, 0, 1), prompt_block(cls_pool),
                            prompt_block(img_pool), slice_rows(normed, 1, n)});
  Tensor out_full = masked_attention(seq, res.mask, proj, num_heads, config.mask_mode,
                                     capture ? &res.snapshot : nullptr);
  res.tokens_out =
      concat_rows({slice_rows(out_full, 0, 1), slice_rows(out_full, res.mask.patch_begin(), n)});
  return res;
}

TokenState reference_two_pass(const TokenState& state, const Tensor& cls_prompt,
                              const Tensor& img_prompt, const AttnProj& proj, int num_heads) {
  const int n = state.patches.rows();
  const int lp = cls_prompt.rows();

  Tensor seq1 = concat_rows({state.cls, cls_prompt, state.patches});
  Tensor out1 = dense_attention(seq1, proj, num_heads);

  Tensor seq2 = concat_rows({state.cls, img_prompt, state.patches});
  Tensor out2 = dense_attention(seq2, proj, num_heads);

  TokenState result;
  result.cls = slice_rows(out1, 0, 1);
  result.patches = slice_rows(out2, 1 + img_prompt.rows(), n);
  result.layer_index = state.layer_index;
  (void)lp;
  return result;
}

}  // namespace tcpa
