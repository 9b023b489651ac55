#include "backbone.hpp"

#include <cmath>

#include "ops.hpp"
#include "rng.hpp"

namespace tcpa {

namespace {

constexpr double kInitStd = 0.02;

Tensor draw_matrix(Rng& rng, int rows, int cols) {
  Tensor t = Tensor::zeros({rows, cols});
  for (auto& v : *t.data) v = rng.truncated_normal(kInitStd);
  return t;
}

Tensor draw_vector(Rng& rng, int n) {
  Tensor t = Tensor::zeros({n});
  for (auto& v : *t.data) v = rng.truncated_normal(kInitStd);
  return t;
}

}  // namespace

BackboneParams init_backbone(const ModelConfig& config, uint64_t seed) {
  config.validate();
  Rng rng = Rng::stream(seed, 10);
  const int d = config.embed_dim;
  const int n = config.num_patches();

  BackboneParams p;
  p.embed_w = draw_matrix(rng, config.patch_dim(), d);
  p.embed_b = Tensor::zeros({d});
  p.pos = draw_matrix(rng, n + 1, d);
  p.cls = draw_vector(rng, d);

  p.blocks.resize(static_cast<size_t>(config.num_layers));
  for (BlockParams& b : p.blocks) {
    b.ln1_gain = Tensor::full({d}, 1.0);
    b.ln1_bias = Tensor::zeros({d});
    b.proj.wq = draw_matrix(rng, d, d);
    b.proj.bq = Tensor::zeros({d});
    b.proj.wk = draw_matrix(rng, d, d);
    b.proj.bk = Tensor::zeros({d});
    b.proj.wv = draw_matrix(rng, d, d);
    b.proj.bv = Tensor::zeros({d});
    b.proj.wo = draw_matrix(rng, d, d);
    b.proj.bo = Tensor::zeros({d});
    b.ln2_gain = Tensor::full({d}, 1.0);
    b.ln2_bias = Tensor::zeros({d});
    b.ffn_w1 = draw_matrix(rng, d, config.ffn_dim);
    b.ffn_b1 = Tensor::zeros({config.ffn_dim});
    b.ffn_w2 = draw_matrix(rng, config.ffn_dim, d);
    b.ffn_b2 = Tensor::zeros({d});
  }
  return p;
}

HeadParams init_head(const ModelConfig& config, uint64_t seed) {
  Rng rng = Rng::stream(seed, 11);
  HeadParams h;
  h.w = draw_matrix(rng, config.embed_dim, config.num_classes);
  h.b = Tensor::zeros({config.num_classes});
  return h;
}

TokenState patch_embed(const Tensor& image, const BackboneParams& params,
                       const ModelConfig& config) {
  if (image.shape != std::vector<int>{config.image_h, config.image_w, config.channels})
    throw DimensionError("patch_embed: image extents do not match the model config");

  const int ph = config.patch_h, pw = config.patch_w, c = config.channels;
  const int grid_w = config.image_w / pw;
  const int n = config.num_patches();
  const int pd = config.patch_dim();

  // Row-major patch grid; within a patch: pixel row, pixel column, channel.
  Tensor flat = Tensor::zeros({n, pd});
  for (int p = 0; p < n; ++p) {
    const int gy = p / grid_w, gx = p % grid_w;
    for (int y = 0; y < ph; ++y)
      for (int x = 0; x < pw; ++x)
        for (int ch = 0; ch < c; ++ch) {
          const size_t src =
              (static_cast<size_t>(gy * ph + y) * config.image_w + (gx * pw + x)) * c + ch;
          flat.at(p, (y * pw + x) * c + ch) = (*image.data)[src];
        }
  }

  Tensor tokens = add_row_broadcast(matmul(flat, params.embed_w), params.embed_b);
  Tensor pos_patches = slice_rows(params.pos, 1, n);
  TokenState st;
  st.patches = add(tokens, pos_patches);

  Tensor cls_row = Tensor::zeros({1, config.embed_dim});
  for (int j = 0; j < config.embed_dim; ++j) cls_row.at(0, j) = params.cls.at(j);
  st.cls = add(cls_row, slice_rows(params.pos, 0, 1));
  st.layer_index = 1;
  return st;
}

TokenState block_forward(const TokenState& state, const BlockParams& block,
                         const AttentionHook& hook) {
  const int n = state.patches.rows();
  Tensor raw = concat_rows({state.cls, state.patches});
  Tensor normed = layer_norm(raw, block.ln1_gain, block.ln1_bias);
  Tensor attn = hook(normed, raw, block.proj);
  if (attn.rows() != raw.rows() || attn.cols() != raw.cols())
    throw DimensionError("block_forward: attention hook changed the token extent");
  Tensor res1 = add(raw, attn);
  Tensor normed2 = layer_norm(res1, block.ln2_gain, block.ln2_bias);
  Tensor hidden = gelu(add_row_broadcast(matmul(normed2, block.ffn_w1), block.ffn_b1));
  Tensor ffn = add_row_broadcast(matmul(hidden, block.ffn_w2), block.ffn_b2);
  Tensor out = add(res1, ffn);

  TokenState next;
  next.cls = slice_rows(out, 0, 1);
  next.patches = slice_rows(out, 1, n);
  next.layer_index = state.layer_index + 1;
  return next;
}

Tensor classify(const Tensor& cls_final, const HeadParams& head) {
  return add_row_broadcast(matmul(cls_final, head.w), head.b);
}

Tensor dense_attention(const Tensor& seq, const AttnProj& proj, int num_heads) {
  const int d = seq.cols();
  if (d % num_heads != 0) throw DimensionError("dense_attention: D not divisible by heads");
  const int dk = d / num_heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dk));

  Tensor q = add_row_broadcast(matmul(seq, proj.wq), proj.bq);
  Tensor k = add_row_broadcast(matmul(seq, proj.wk), proj.bk);
  Tensor v = add_row_broadcast(matmul(seq, proj.wv), proj.bv);

  std::vector<Tensor> heads;
  heads.reserve(static_cast<size_t>(num_heads));
  for (int h = 0; h < num_heads; ++h) {
    Tensor qh = slice_cols(q, h * dk, dk);
    Tensor kh = slice_cols(k, h * dk, dk);
    Tensor vh = slice_cols(v, h * dk, dk);
    Tensor scores = scale(matmul(qh, transpose(kh)), inv_scale);
    Tensor attn = softmax_rows(scores);
    heads.push_back(matmul(attn, vh));
  }
  Tensor merged = concat_cols(heads);
  return add_row_broadcast(matmul(merged, proj.wo), proj.bo);
}

}  // namespace tcpa
