#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "awi/tensor.hpp"

namespace awi {

using NodeId = int32_t;
inline constexpr NodeId kNoNode = -1;

enum class OpKind {
  Input,
  Affine,
  Tanh,
  SoftmaxRow,
  EmbeddingLookup,
  MeanRows,
  Concat,
  Add,
  Scale,
  Dot,
  CrossEntropyPick,
  MatMul,
  Reshape,
  SliceRows,
};

const char* op_name(OpKind k);

// Reverse-mode tape. Define-by-run: each op computes its value immediately
// and appends one node, so the record is topologically ordered by
// construction. backward() walks it once in reverse, touching only nodes
// that actually feed the loss.
template <class T>
class Tape {
 public:
  struct Node {
    OpKind kind = OpKind::Input;
    std::vector<NodeId> inputs;
    Tensor<T> value;
    Tensor<T> grad;
    bool grad_touched = false;
    // op-specific constants (not differentiated)
    std::vector<int32_t> ids;     // embedding rows / picked targets
    std::vector<double> weights;  // per-row pick weights
    double factor = 1.0;          // scale
    int axis = 0;                 // concat
    size_t row_start = 0, row_count = 0;
  };

  NodeId input(Tensor<T> value);

  NodeId affine(NodeId x, NodeId w, NodeId b = kNoNode);
  NodeId tanh(NodeId x);
  NodeId softmax_row(NodeId x);
  NodeId embedding_lookup(NodeId table, std::vector<int32_t> ids);
  NodeId mean_rows(NodeId x);
  NodeId concat(const std::vector<NodeId>& xs, int axis);
  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId x, double factor);
  NodeId dot(NodeId a, NodeId b);
  // sum_b weights[b] * (-log value(probs)[b, targets[b]]); empty weights = all ones
  NodeId cross_entropy_pick(NodeId probs, std::vector<int32_t> targets,
                            std::vector<double> weights = {});
  NodeId matmul(NodeId a, NodeId b);
  NodeId reshape(NodeId x, std::vector<size_t> shape);
  NodeId slice_rows(NodeId x, size_t start, size_t count);

  void backward(NodeId loss);

  const Tensor<T>& value(NodeId id) const { return node(id).value; }
  // zeros when the node does not feed the loss
  Tensor<T> grad(NodeId id) const;
  bool grad_touched(NodeId id) const { return node(id).grad_touched; }

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;

  const Node& node(NodeId id) const;
  Node& node(NodeId id);
  NodeId push(Node n);
  Tensor<T>& grad_buf(NodeId id);
  void check_input(NodeId id, const char* who) const;
  [[noreturn]] void fail(OpKind k, const std::string& msg) const;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace awi
