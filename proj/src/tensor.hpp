#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <vector>

#include "errors.hpp"

namespace tcpa {

class Tape;

// Dense row-major tensor of 64-bit floats. A Tensor is a cheap handle: data
// and grad buffers are shared, so copying one aliases the same storage.
// Tracked tensors carry a pointer to the tape that records operations on
// them; untracked tensors participate in ops as constants.
struct Tensor {
  std::vector<int> shape;
  std::shared_ptr<std::vector<double>> data;
  std::shared_ptr<std::vector<double>> grad;  // allocated when tracked
  Tape* tape = nullptr;
  int node = -1;

  Tensor() = default;

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor from(std::vector<int> shape, std::vector<double> values);
  static Tensor scalar_value(double value);

  int64_t numel() const;
  bool tracked() const { return tape != nullptr; }

  // 2-D views; rank-1 tensors count as a single row.
  int rows() const;
  int cols() const;

  double scalar() const;

  double& at(int i) { return (*data)[static_cast<size_t>(i)]; }
  double at(int i) const { return (*data)[static_cast<size_t>(i)]; }
  double& at(int i, int j) { return (*data)[static_cast<size_t>(i) * cols() + j]; }
  double at(int i, int j) const { return (*data)[static_cast<size_t>(i) * cols() + j]; }

  // Untracked handle with its own copy of the values.
  Tensor detach() const;

  bool all_finite() const;
};

int64_t shape_numel(const std::vector<int>& shape);

// Reverse-mode tape. Nodes are recorded in execution order (inputs always
// precede their consumers) and backward replays them exactly once in reverse.
class Tape {
 public:
  // Registers a leaf. The handle gets a zeroed grad buffer; existing buffers
  // are reused so persistent parameters keep their identity across steps.
  void watch(Tensor& t);

  // Records an operation node. Inputs may mix tracked and untracked tensors;
  // tensors tracked on a different tape are a contract violation.
  void record(const char* op, std::initializer_list<const Tensor*> inputs, Tensor& out,
              std::function<void()> backward);
  void record(const char* op, const std::vector<const Tensor*>& inputs, Tensor& out,
              std::function<void()> backward);

  // Seeds d(loss)/d(loss) = 1 and propagates through every node once.
  void backward(const Tensor& loss);

  size_t size() const { return nodes_.size(); }

  // Name and node index of the first recorded tensor holding a NaN/Inf,
  // in execution order. Returns false when everything is finite.
  bool first_non_finite(std::string& op_out, size_t& index_out) const;

 private:
  struct Node {
    const char* op;
    std::vector<int> inputs;
    int output;
    std::shared_ptr<std::vector<double>> out_data;
    std::function<void()> backward;  // null for leaves
  };

  int add_node(const char* op, std::vector<int> inputs, Tensor& out,
               std::function<void()> backward);

  std::vector<Node> nodes_;
};

}  // namespace tcpa
