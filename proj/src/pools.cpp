#include "pools.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ops.hpp"

namespace tcpa {

double cosine_distance(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) throw DimensionError("cosine_distance: extent mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  nu = std::sqrt(nu);
  nv = std::sqrt(nv);
  if (nu < kCosineNormEps || nv < kCosineNormEps) return 1.0;
  return 1.0 - dot / (nu * nv);
}

MatchResult build_affinity(const Tensor& tokens, const PromptPool& pool) {
  const int rows = tokens.rows();
  const int d = tokens.cols();
  const int n = static_cast<int>(pool.entries.size());
  if (rows < 1) throw DimensionError("build_affinity: need at least one token row");

  MatchResult match;
  match.affinity = Tensor::zeros({rows, n});
  std::vector<double> token(static_cast<size_t>(d)), key(static_cast<size_t>(d));
  for (int m = 0; m < rows; ++m) {
    for (int j = 0; j < d; ++j) token[static_cast<size_t>(j)] = tokens.at(m, j);
    for (int k = 0; k < n; ++k) {
      const Tensor& kt = pool.entries[static_cast<size_t>(k)].key;
      if (kt.numel() != d) throw DimensionError("build_affinity: key extent mismatch");
      for (int j = 0; j < d; ++j) key[static_cast<size_t>(j)] = kt.at(j);
      match.affinity.at(m, k) = cosine_distance(token, key);
    }
  }
  return match;
}

void binarize_topk(MatchResult& match, int top_k, MatchDirection direction) {
  const int rows = match.affinity.rows();
  const int n = match.affinity.cols();
  if (top_k < 1 || top_k > n) throw ContractError("binarize_topk: top_k out of range");

  match.binarized = Tensor::zeros({rows, n});
  match.selected.assign(static_cast<size_t>(rows), {});
  std::vector<int> idx(static_cast<size_t>(n));
  for (int m = 0; m < rows; ++m) {
    std::iota(idx.begin(), idx.end(), 0);
    // stable sort on distance alone: equal distances keep ascending index
    // order, so ties resolve to the lowest pool index.
    if (direction == MatchDirection::most_similar) {
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return match.affinity.at(m, a) < match.affinity.at(m, b);
      });
    } else {
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return match.affinity.at(m, a) > match.affinity.at(m, b);
      });
    }
    auto& sel = match.selected[static_cast<size_t>(m)];
    sel.assign(idx.begin(), idx.begin() + top_k);
    std::sort(sel.begin(), sel.end());
    for (int k : sel) match.binarized.at(m, k) = 1.0;
  }
}

MaskMatrix assemble_mask(const MatchResult& cls_match, const MatchResult& img_match,
                         const TcpaConfig& config, int n_patches) {
  if (cls_match.binarized.rows() != 1)
    throw ContractError("assemble_mask: CLS match must have one row");
  if (img_match.binarized.rows() != n_patches)
    throw ContractError("assemble_mask: image match rows must equal patch count");

  MaskMatrix mm;
  mm.prompt_len = config.prompt_len;
  mm.n_cls_entries = cls_match.binarized.cols();
  mm.n_img_entries = img_match.binarized.cols();
  mm.n_patches = n_patches;
  const int t = mm.total();
  mm.mask = Tensor::zeros({t, t});

  auto token_row = [&](int row) {
    mm.mask.at(row, 0) = 1.0;
    for (int p = 0; p < n_patches; ++p) mm.mask.at(row, mm.patch_begin() + p) = 1.0;
  };

  // CLS row: token columns plus its selected CLS-prompt blocks.
  token_row(0);
  for (int k : cls_match.selected[0])
    for (int l = 0; l < config.prompt_len; ++l)
      mm.mask.at(0, mm.cls_prompt_begin() + k * config.prompt_len + l) = 1.0;

  // Patch rows: token columns plus their selected image-prompt blocks.
  for (int m = 0; m < n_patches; ++m) {
    const int row = mm.patch_begin() + m;
    token_row(row);
    for (int k : img_match.selected[static_cast<size_t>(m)])
      for (int l = 0; l < config.prompt_len; ++l)
        mm.mask.at(row, mm.img_prompt_begin() + k * config.prompt_len + l) = 1.0;
  }
  return mm;
}

MaskMatrix dense_prompt_mask(const TcpaConfig& config, int n_patches) {
  MaskMatrix mm;
  mm.prompt_len = config.prompt_len;
  mm.n_cls_entries = config.cls_pool_size;
  mm.n_img_entries = config.img_pool_size;
  mm.n_patches = n_patches;
  const int t = mm.total();
  mm.mask = Tensor::zeros({t, t});
  for (int col = 0; col < t; ++col) {
    mm.mask.at(0, col) = 1.0;
    for (int m = 0; m < n_patches; ++m) mm.mask.at(mm.patch_begin() + m, col) = 1.0;
  }
  return mm;
}

}  // namespace tcpa
