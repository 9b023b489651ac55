#include "tensor.hpp"

#include <cmath>
#include <string>

namespace tcpa {

int64_t shape_numel(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int e : shape) {
    if (e <= 0) throw DimensionError("tensor extent must be positive, got " + std::to_string(e));
    n *= e;
  }
  return n;
}

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  const int64_t n = shape_numel(shape);
  t.shape = std::move(shape);
  t.data = std::make_shared<std::vector<double>>(static_cast<size_t>(n), 0.0);
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t = zeros(std::move(shape));
  for (auto& v : *t.data) v = value;
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values) {
  const int64_t n = shape_numel(shape);
  if (n != static_cast<int64_t>(values.size()))
    throw DimensionError("value count does not match shape");
  Tensor t;
  t.shape = std::move(shape);
  t.data = std::make_shared<std::vector<double>>(std::move(values));
  return t;
}

Tensor Tensor::scalar_value(double value) { return from({1}, {value}); }

int64_t Tensor::numel() const { return data ? static_cast<int64_t>(data->size()) : 0; }

int Tensor::rows() const {
  if (shape.size() == 1) return 1;
  if (shape.size() == 2) return shape[0];
  throw DimensionError("rows() requires a rank-1 or rank-2 tensor");
}

int Tensor::cols() const {
  if (shape.size() == 1) return shape[0];
  if (shape.size() == 2) return shape[1];
  throw DimensionError("cols() requires a rank-1 or rank-2 tensor");
}

double Tensor::scalar() const {
  if (numel() != 1) throw ContractError("scalar() requires a single-element tensor");
  return (*data)[0];
}

Tensor Tensor::detach() const {
  Tensor t;
  t.shape = shape;
  t.data = std::make_shared<std::vector<double>>(*data);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : *data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tape::watch(Tensor& t) {
  if (t.tape == this && t.node >= 0) return;
  if (t.tape != nullptr && t.tape != this)
    throw ContractError("tensor is already tracked on another tape");
  if (t.grad && t.grad->size() == t.data->size()) {
    std::fill(t.grad->begin(), t.grad->end(), 0.0);
  } else {
    t.grad = std::make_shared<std::vector<double>>(t.data->size(), 0.0);
  }
  t.tape = this;
  t.node = add_node("leaf", {}, t, nullptr);
}

int Tape::add_node(const char* op, std::vector<int> inputs, Tensor& out,
                   std::function<void()> backward) {
  Node n;
  n.op = op;
  n.inputs = std::move(inputs);
  n.output = static_cast<int>(nodes_.size());
  n.out_data = out.data;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return nodes_.back().output;
}

void Tape::record(const char* op, std::initializer_list<const Tensor*> inputs, Tensor& out,
                  std::function<void()> backward) {
  record(op, std::vector<const Tensor*>(inputs), out, std::move(backward));
}

void Tape::record(const char* op, const std::vector<const Tensor*>& inputs, Tensor& out,
                  std::function<void()> backward) {
  std::vector<int> ids;
  for (const Tensor* in : inputs) {
    if (!in->tracked()) continue;
    if (in->tape != this) throw ContractError(std::string(op) + ": input tracked on another tape");
    ids.push_back(in->node);
  }
  out.grad = std::make_shared<std::vector<double>>(out.data->size(), 0.0);
  out.tape = this;
  out.node = add_node(op, std::move(ids), out, std::move(backward));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.tracked() || loss.tape != this)
    throw ContractError("backward: loss is not tracked on this tape");
  if (loss.numel() != 1) throw ContractError("backward: loss must be scalar");
  (*loss.grad)[0] += 1.0;
  for (size_t i = nodes_.size(); i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward();
  }
}

bool Tape::first_non_finite(std::string& op_out, size_t& index_out) const {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    for (double v : *nodes_[i].out_data) {
      if (!std::isfinite(v)) {
        op_out = nodes_[i].op;
        index_out = i;
        return true;
      }
    }
  }
  return false;
}

}  // namespace tcpa
