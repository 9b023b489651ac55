#include "ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tcpa {

namespace {

bool any_tracked(std::initializer_list<const Tensor*> ts) {
  for (const Tensor* t : ts)
    if (t->tracked()) return true;
  return false;
}

Tape* tape_of(std::initializer_list<const Tensor*> ts) {
  for (const Tensor* t : ts)
    if (t->tracked()) return t->tape;
  return nullptr;
}

void require_2d(const Tensor& t, const char* op) {
  if (t.shape.size() > 2)
    throw DimensionError(std::string(op) + ": rank-1 or rank-2 tensor required");
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const int m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  if (k != k2)
    throw DimensionError("matmul: inner extents disagree (" + std::to_string(k) + " vs " +
                         std::to_string(k2) + ")");
  Tensor out = Tensor::zeros({m, n});
  const double* pa = a.data->data();
  const double* pb = b.data->data();
  double* pc = out.data->data();
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<size_t>(i) * k;
    double* crow = pc + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = pb + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  if (Tape* tape = tape_of({&a, &b})) {
    Tensor ac = a, bc = b, oc = out;
    tape->record("matmul", {&a, &b}, out, [ac, bc, oc, m, k, n]() {
      const double* g = oc.grad->data();
      if (ac.tracked()) {
        double* ga = ac.grad->data();
        const double* pb2 = bc.data->data();
        for (int i = 0; i < m; ++i) {
          const double* grow = g + static_cast<size_t>(i) * n;
          double* garow = ga + static_cast<size_t>(i) * k;
          for (int p = 0; p < k; ++p) {
            const double* brow = pb2 + static_cast<size_t>(p) * n;
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
            garow[p] += acc;
          }
        }
      }
      if (bc.tracked()) {
        double* gb = bc.grad->data();
        const double* pa2 = ac.data->data();
        for (int i = 0; i < m; ++i) {
          const double* arow = pa2 + static_cast<size_t>(i) * k;
          const double* grow = g + static_cast<size_t>(i) * n;
          for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            double* gbrow = gb + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) gbrow[j] += av * grow[j];
          }
        }
      }
    });
  }
  return out;
}

Tensor transpose(const Tensor& x) {
  require_2d(x, "transpose");
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(j, i) = x.at(i, j);
  if (x.tracked()) {
    Tensor xc = x, oc = out;
    x.tape->record("transpose", {&x}, out, [xc, oc, m, n]() {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          (*xc.grad)[static_cast<size_t>(i) * n + j] += (*oc.grad)[static_cast<size_t>(j) * m + i];
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) throw DimensionError("add: shape mismatch");
  Tensor out = Tensor::zeros(a.shape);
  const size_t n = a.data->size();
  for (size_t i = 0; i < n; ++i) (*out.data)[i] = (*a.data)[i] + (*b.data)[i];
  if (Tape* tape = tape_of({&a, &b})) {
    Tensor ac = a, bc = b, oc = out;
    tape->record("add", {&a, &b}, out, [ac, bc, oc, n]() {
      if (ac.tracked())
        for (size_t i = 0; i < n; ++i) (*ac.grad)[i] += (*oc.grad)[i];
      if (bc.tracked())
        for (size_t i = 0; i < n; ++i) (*bc.grad)[i] += (*oc.grad)[i];
    });
  }
  return out;
}

Tensor add_row_broadcast(const Tensor& x, const Tensor& bias) {
  require_2d(x, "add_row_broadcast");
  if (bias.shape.size() != 1 || bias.shape[0] != x.cols())
    throw DimensionError("add_row_broadcast: bias extent must equal column count");
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros(x.shape);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = x.at(i, j) + bias.at(j);
  if (Tape* tape = tape_of({&x, &bias})) {
    Tensor xc = x, bc = bias, oc = out;
    tape->record("add_row_broadcast", {&x, &bias}, out, [xc, bc, oc, m, n]() {
      if (xc.tracked())
        for (size_t i = 0; i < static_cast<size_t>(m) * n; ++i) (*xc.grad)[i] += (*oc.grad)[i];
      if (bc.tracked())
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) (*bc.grad)[j] += (*oc.grad)[static_cast<size_t>(i) * n + j];
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) throw DimensionError("mul: shape mismatch");
  Tensor out = Tensor::zeros(a.shape);
  const size_t n = a.data->size();
  for (size_t i = 0; i < n; ++i) (*out.data)[i] = (*a.data)[i] * (*b.data)[i];
  if (Tape* tape = tape_of({&a, &b})) {
    Tensor ac = a, bc = b, oc = out;
    tape->record("mul", {&a, &b}, out, [ac, bc, oc, n]() {
      if (ac.tracked())
        for (size_t i = 0; i < n; ++i) (*ac.grad)[i] += (*oc.grad)[i] * (*bc.data)[i];
      if (bc.tracked())
        for (size_t i = 0; i < n; ++i) (*bc.grad)[i] += (*oc.grad)[i] * (*ac.data)[i];
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = Tensor::zeros(a.shape);
  const size_t n = a.data->size();
  for (size_t i = 0; i < n; ++i) (*out.data)[i] = (*a.data)[i] * s;
  if (a.tracked()) {
    Tensor ac = a, oc = out;
    a.tape->record("scale", {&a}, out, [ac, oc, s, n]() {
      for (size_t i = 0; i < n; ++i) (*ac.grad)[i] += (*oc.grad)[i] * s;
    });
  }
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  require_2d(x, "softmax_rows");
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros(x.shape);
  for (int i = 0; i < m; ++i) {
    double mx = x.at(i, 0);
    for (int j = 1; j < n; ++j) mx = std::max(mx, x.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double e = std::exp(x.at(i, j) - mx);
      out.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < n; ++j) out.at(i, j) /= sum;
  }
  if (x.tracked()) {
    Tensor xc = x, oc = out;
    x.tape->record("softmax_rows", {&x}, out, [xc, oc, m, n]() {
      for (int i = 0; i < m; ++i) {
        double dot = 0.0;
        for (int j = 0; j < n; ++j)
          dot += (*oc.grad)[static_cast<size_t>(i) * n + j] * (*oc.data)[static_cast<size_t>(i) * n + j];
        for (int j = 0; j < n; ++j) {
          const size_t k = static_cast<size_t>(i) * n + j;
          (*xc.grad)[k] += ((*oc.grad)[k] - dot) * (*oc.data)[k];
        }
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  require_2d(x, "layer_norm");
  const int m = x.rows(), d = x.cols();
  if (gain.shape.size() != 1 || gain.shape[0] != d || bias.shape.size() != 1 ||
      bias.shape[0] != d)
    throw DimensionError("layer_norm: gain/bias extent must equal the last extent of x");
  Tensor out = Tensor::zeros(x.shape);
  auto xhat = std::make_shared<std::vector<double>>(static_cast<size_t>(m) * d);
  auto inv_sigma = std::make_shared<std::vector<double>>(m);
  for (int i = 0; i < m; ++i) {
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += x.at(i, j);
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = x.at(i, j) - mean;
      var += c * c;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    (*inv_sigma)[i] = inv;
    for (int j = 0; j < d; ++j) {
      const double h = (x.at(i, j) - mean) * inv;
      (*xhat)[static_cast<size_t>(i) * d + j] = h;
      out.at(i, j) = h * gain.at(j) + bias.at(j);
    }
  }
  if (Tape* tape = tape_of({&x, &gain, &bias})) {
    Tensor xc = x, gc = gain, bc = bias, oc = out;
    tape->record("layer_norm", {&x, &gain, &bias}, out, [xc, gc, bc, oc, xhat, inv_sigma, m, d]() {
      for (int i = 0; i < m; ++i) {
        const size_t base = static_cast<size_t>(i) * d;
        if (xc.tracked()) {
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (int j = 0; j < d; ++j) {
            const double dh = (*oc.grad)[base + j] * (*gc.data)[j];
            mean_dh += dh;
            mean_dh_h += dh * (*xhat)[base + j];
          }
          mean_dh /= d;
          mean_dh_h /= d;
          const double inv = (*inv_sigma)[i];
          for (int j = 0; j < d; ++j) {
            const double dh = (*oc.grad)[base + j] * (*gc.data)[j];
            (*xc.grad)[base + j] += inv * (dh - mean_dh - (*xhat)[base + j] * mean_dh_h);
          }
        }
        if (gc.tracked())
          for (int j = 0; j < d; ++j) (*gc.grad)[j] += (*oc.grad)[base + j] * (*xhat)[base + j];
        if (bc.tracked())
          for (int j = 0; j < d; ++j) (*bc.grad)[j] += (*oc.grad)[base + j];
      }
    });
  }
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape);
  const size_t n = x.data->size();
  for (size_t i = 0; i < n; ++i) {
    const double v = (*x.data)[i];
    (*out.data)[i] = 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2));
  }
  if (x.tracked()) {
    Tensor xc = x, oc = out;
    x.tape->record("gelu", {&x}, out, [xc, oc, n]() {
      constexpr double inv_sqrt_2pi = 0.3989422804014326779;
      for (size_t i = 0; i < n; ++i) {
        const double v = (*xc.data)[i];
        const double d =
            0.5 * (1.0 + std::erf(v * M_SQRT1_2)) + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
        (*xc.grad)[i] += (*oc.grad)[i] * d;
      }
    });
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no parts");
  const int n = parts[0].cols();
  int m = 0;
  for (const Tensor& p : parts) {
    require_2d(p, "concat_rows");
    if (p.cols() != n) throw DimensionError("concat_rows: column extents disagree");
    m += p.rows();
  }
  Tensor out = Tensor::zeros({m, n});
  int row = 0;
  for (const Tensor& p : parts) {
    std::copy(p.data->begin(), p.data->end(), out.data->begin() + static_cast<size_t>(row) * n);
    row += p.rows();
  }
  Tape* tape = nullptr;
  for (const Tensor& p : parts)
    if (p.tracked()) {
      tape = p.tape;
      break;
    }
  if (tape) {
    std::vector<const Tensor*> ptrs;
    for (const Tensor& p : parts) ptrs.push_back(&p);
    std::vector<Tensor> pc(parts);
    Tensor oc = out;
    tape->record("concat_rows", ptrs, out, [pc, oc, n]() {
      int r = 0;
      for (const Tensor& p : pc) {
        if (p.tracked()) {
          const size_t base = static_cast<size_t>(r) * n;
          for (size_t i = 0; i < p.data->size(); ++i) (*p.grad)[i] += (*oc.grad)[base + i];
        }
        r += p.rows();
      }
    });
  }
  return out;
}

Tensor slice_rows(const Tensor& x, int start, int count) {
  require_2d(x, "slice_rows");
  const int m = x.rows(), n = x.cols();
  if (start < 0 || count <= 0 || start + count > m)
    throw DimensionError("slice_rows: range out of bounds");
  Tensor out = Tensor::zeros({count, n});
  std::copy(x.data->begin() + static_cast<size_t>(start) * n,
            x.data->begin() + static_cast<size_t>(start + count) * n, out.data->begin());
  if (x.tracked()) {
    Tensor xc = x, oc = out;
    x.tape->record("slice_rows", {&x}, out, [xc, oc, start, count, n]() {
      const size_t base = static_cast<size_t>(start) * n;
      for (size_t i = 0; i < static_cast<size_t>(count) * n; ++i)
        (*xc.grad)[base + i] += (*oc.grad)[i];
    });
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  const int m = parts[0].rows();
  int n = 0;
  for (const Tensor& p : parts) {
    require_2d(p, "concat_cols");
    if (p.rows() != m) throw DimensionError("concat_cols: row extents disagree");
    n += p.cols();
  }
  Tensor out = Tensor::zeros({m, n});
  int col = 0;
  for (const Tensor& p : parts) {
    const int pn = p.cols();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < pn; ++j) out.at(i, col + j) = p.at(i, j);
    col += pn;
  }
  Tape* tape = nullptr;
  for (const Tensor& p : parts)
    if (p.tracked()) {
      tape = p.tape;
      break;
    }
  if (tape) {
    std::vector<const Tensor*> ptrs;
    for (const Tensor& p : parts) ptrs.push_back(&p);
    std::vector<Tensor> pc(parts);
    Tensor oc = out;
    tape->record("concat_cols", ptrs, out, [pc, oc, m, n]() {
      int c = 0;
      for (const Tensor& p : pc) {
        const int pn = p.cols();
        if (p.tracked())
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < pn; ++j)
              (*p.grad)[static_cast<size_t>(i) * pn + j] +=
                  (*oc.grad)[static_cast<size_t>(i) * n + c + j];
        c += pn;
      }
    });
  }
  return out;
}

Tensor slice_cols(const Tensor& x, int start, int count) {
  require_2d(x, "slice_cols");
  const int m = x.rows(), n = x.cols();
  if (start < 0 || count <= 0 || start + count > n)
    throw DimensionError("slice_cols: range out of bounds");
  Tensor out = Tensor::zeros({m, count});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < count; ++j) out.at(i, j) = x.at(i, start + j);
  if (x.tracked()) {
    Tensor xc = x, oc = out;
    x.tape->record("slice_cols", {&x}, out, [xc, oc, start, count, m, n]() {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < count; ++j)
          (*xc.grad)[static_cast<size_t>(i) * n + start + j] +=
              (*oc.grad)[static_cast<size_t>(i) * count + j];
    });
  }
  return out;
}

Tensor sum_all(const Tensor& x) {
  Tensor out = Tensor::zeros({1});
  double acc = 0.0;
  for (double v : *x.data) acc += v;
  (*out.data)[0] = acc;
  if (x.tracked()) {
    Tensor xc = x, oc = out;
    x.tape->record("sum_all", {&x}, out, [xc, oc]() {
      const double g = (*oc.grad)[0];
      for (auto& gv : *xc.grad) gv += g;
    });
  }
  return out;
}

Tensor mean_all(const Tensor& x) {
  Tensor out = sum_all(x);
  return scale(out, 1.0 / static_cast<double>(x.numel()));
}

Tensor cross_entropy_logits(const Tensor& logits, int label) {
  require_2d(logits, "cross_entropy_logits");
  if (logits.rows() != 1) throw DimensionError("cross_entropy_logits: expected a single row");
  const int c = logits.cols();
  if (label < 0 || label >= c)
    throw ContractError("cross_entropy_logits: label " + std::to_string(label) +
                        " out of range [0, " + std::to_string(c) + ")");
  double mx = logits.at(0);
  for (int j = 1; j < c; ++j) mx = std::max(mx, logits.at(j));
  double sum = 0.0;
  for (int j = 0; j < c; ++j) sum += std::exp(logits.at(j) - mx);
  const double lse = mx + std::log(sum);
  Tensor out = Tensor::scalar_value(lse - logits.at(label));
  if (logits.tracked()) {
    Tensor lc = logits, oc = out;
    logits.tape->record("cross_entropy_logits", {&logits}, out, [lc, oc, label, c, mx, sum]() {
      const double g = (*oc.grad)[0];
      for (int j = 0; j < c; ++j) {
        const double p = std::exp((*lc.data)[j] - mx) / sum;
        (*lc.grad)[j] += g * (p - (j == label ? 1.0 : 0.0));
      }
    });
  }
  return out;
}

Tensor pull_loss(const std::vector<std::pair<std::vector<double>, Tensor>>& pairs) {
  if (pairs.empty()) return Tensor::scalar_value(0.0);
  Tape* tape = nullptr;
  double acc = 0.0;
  for (const auto& [token, key] : pairs) {
    if (key.shape.size() != 1 || key.shape[0] != static_cast<int>(token.size()))
      throw DimensionError("pull_loss: token/key extent mismatch");
    if (key.tracked()) tape = key.tape;
    double dot = 0.0, nt = 0.0, nk = 0.0;
    for (size_t i = 0; i < token.size(); ++i) {
      dot += token[i] * (*key.data)[i];
      nt += token[i] * token[i];
      nk += (*key.data)[i] * (*key.data)[i];
    }
    nt = std::sqrt(nt);
    nk = std::sqrt(nk);
    acc += (nt < kCosineNormEps || nk < kCosineNormEps) ? 1.0 : 1.0 - dot / (nt * nk);
  }
  const double inv_count = 1.0 / static_cast<double>(pairs.size());
  Tensor out = Tensor::scalar_value(acc * inv_count);
  if (tape) {
    std::vector<const Tensor*> ptrs;
    for (const auto& pr : pairs) ptrs.push_back(&pr.second);
    auto pc = pairs;
    Tensor oc = out;
    tape->record("pull_loss", ptrs, out, [pc, oc, inv_count]() {
      const double g = (*oc.grad)[0] * inv_count;
      for (const auto& [token, key] : pc) {
        if (!key.tracked()) continue;
        double dot = 0.0, nt2 = 0.0, nk2 = 0.0;
        for (size_t i = 0; i < token.size(); ++i) {
          dot += token[i] * (*key.data)[i];
          nt2 += token[i] * token[i];
          nk2 += (*key.data)[i] * (*key.data)[i];
        }
        const double nt = std::sqrt(nt2), nk = std::sqrt(nk2);
        if (nt < kCosineNormEps || nk < kCosineNormEps) continue;
        const double cosv = dot / (nt * nk);
        for (size_t i = 0; i < token.size(); ++i) {
          const double d = -(token[i] / (nt * nk)) + cosv * (*key.data)[i] / nk2;
          (*key.grad)[i] += g * d;
        }
      }
    });
  }
  return out;
}

namespace {

double eval_scalar(const GradCheckFn& f, std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Tensor> tracked;
  tracked.reserve(params.size());
  for (Tensor& p : params) {
    Tensor t = p;
    t.tape = nullptr;
    t.node = -1;
    t.grad = nullptr;
    tape.watch(t);
    tracked.push_back(t);
  }
  Tensor loss = f(tape, tracked);
  return loss.scalar();
}

}  // namespace

double grad_check(const GradCheckFn& f, std::vector<Tensor> params, double h) {
  Tape tape;
  std::vector<Tensor> tracked;
  tracked.reserve(params.size());
  for (Tensor& p : params) {
    Tensor t = p;
    t.tape = nullptr;
    t.node = -1;
    t.grad = nullptr;
    tape.watch(t);
    tracked.push_back(t);
  }
  Tensor loss = f(tape, tracked);
  tape.backward(loss);

  double max_rel = 0.0;
  for (size_t p = 0; p < params.size(); ++p) {
    auto& data = *params[p].data;
    for (size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + h;
      const double fp = eval_scalar(f, params);
      data[i] = orig - h;
      const double fm = eval_scalar(f, params);
      data[i] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      const double ga = (*tracked[p].grad)[i];
      const double rel = std::fabs(ga - fd) / std::max(1.0, std::fabs(fd));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

double grad_check(const GradCheckFn& f, Tensor theta, double h) {
  return grad_check(f, std::vector<Tensor>{std::move(theta)}, h);
}

}  // namespace tcpa
