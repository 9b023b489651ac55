#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace tcpa {

// All operations register a tape node when any input is tracked and behave as
// plain numeric kernels otherwise. Shapes are validated up front; gradients
// accumulate additively into tracked inputs only.

Tensor matmul(const Tensor& a, const Tensor& b);                 // [m×k]·[k×n]
Tensor transpose(const Tensor& x);                               // [m×n] -> [n×m]
Tensor add(const Tensor& a, const Tensor& b);                    // same shape
Tensor add_row_broadcast(const Tensor& x, const Tensor& bias);   // [m×n] + [n]
Tensor mul(const Tensor& a, const Tensor& b);                    // elementwise
Tensor scale(const Tensor& a, double s);
Tensor softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);
Tensor gelu(const Tensor& x);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, int start, int count);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, int start, int count);
Tensor sum_all(const Tensor& x);   // -> [1]
Tensor mean_all(const Tensor& x);  // -> [1]

// -log softmax(logits)[label], numerically stable. logits: [C] or [1×C].
Tensor cross_entropy_logits(const Tensor& logits, int label);

// Mean cosine distance between constant token snapshots and trainable keys.
// Gradient flows to the keys only; a (near-)zero-norm side makes that pair
// contribute the constant 1 with zero gradient.
Tensor pull_loss(const std::vector<std::pair<std::vector<double>, Tensor>>& pairs);

constexpr double kLayerNormEps = 1e-5;
constexpr double kCosineNormEps = 1e-12;

// Max over all coordinates of |g_auto - g_fd| / max(1, |g_fd|), with central
// differences of step h. `f` must rebuild the computation on the given tape
// from the (already watched) parameter handles and return a tracked scalar.
using GradCheckFn = std::function<Tensor(Tape&, std::vector<Tensor>&)>;
double grad_check(const GradCheckFn& f, std::vector<Tensor> params, double h = 1e-5);
double grad_check(const GradCheckFn& f, Tensor theta, double h = 1e-5);

}  // namespace tcpa
