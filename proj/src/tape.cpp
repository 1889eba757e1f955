#include "awi/tape.hpp"

#include <cmath>

namespace awi {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::Input: return "input";
    case OpKind::Affine: return "affine";
    case OpKind::Tanh: return "tanh";
    case OpKind::SoftmaxRow: return "softmax-row";
    case OpKind::EmbeddingLookup: return "embedding-lookup";
    case OpKind::MeanRows: return "mean-rows";
    case OpKind::Concat: return "concat";
    case OpKind::Add: return "add";
    case OpKind::Scale: return "scale";
    case OpKind::Dot: return "dot";
    case OpKind::CrossEntropyPick: return "cross-entropy-pick";
    case OpKind::MatMul: return "matmul";
    case OpKind::Reshape: return "reshape";
    case OpKind::SliceRows: return "slice-rows";
  }
  return "?";
}

template <class T>
const typename Tape<T>::Node& Tape<T>::node(NodeId id) const {
  if (id < 0 || size_t(id) >= nodes_.size())
    throw std::out_of_range("tape: bad node id " + std::to_string(id));
  return nodes_[size_t(id)];
}

template <class T>
typename Tape<T>::Node& Tape<T>::node(NodeId id) {
  return const_cast<Node&>(static_cast<const Tape<T>*>(this)->node(id));
}

template <class T>
void Tape<T>::check_input(NodeId id, const char* who) const {
  if (id < 0 || size_t(id) >= nodes_.size())
    throw std::invalid_argument(std::string(who) + ": input node " +
                                std::to_string(id) + " not on tape");
}

template <class T>
void Tape<T>::fail(OpKind k, const std::string& msg) const {
  throw std::invalid_argument(std::string(op_name(k)) + ": " + msg);
}

template <class T>
NodeId Tape<T>::push(Node n) {
  if (!n.value.all_finite())
    throw std::runtime_error(std::string(op_name(n.kind)) + ": non-finite output");
  nodes_.push_back(std::move(n));
  return NodeId(nodes_.size() - 1);
}

template <class T>
NodeId Tape<T>::input(Tensor<T> value) {
  if (value.size() == 0) throw std::invalid_argument("input: empty tensor");
  Node n;
  n.kind = OpKind::Input;
  n.value = std::move(value);
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::affine(NodeId x, NodeId w, NodeId b) {
  check_input(x, "affine");
  check_input(w, "affine");
  const Tensor<T>& xv = node(x).value;
  const Tensor<T>& wv = node(w).value;
  if (xv.cols() != wv.cols())
    fail(OpKind::Affine, "input width " + xv.shape_str() + " vs weight " + wv.shape_str());
  size_t batch = xv.rows(), m = wv.rows(), k = xv.cols();
  Node n;
  n.kind = OpKind::Affine;
  n.inputs = {x, w};
  n.value = Tensor<T>::zeros({batch, m});
  gemm_nt(xv.data.data(), wv.data.data(), n.value.data.data(), batch, k, m);
  if (b != kNoNode) {
    check_input(b, "affine");
    const Tensor<T>& bv = node(b).value;
    if (bv.size() != m || bv.rows() != 1)
      fail(OpKind::Affine, "bias " + bv.shape_str() + " vs weight rows " + std::to_string(m));
    n.inputs.push_back(b);
    for (size_t r = 0; r < batch; ++r)
      for (size_t j = 0; j < m; ++j) n.value.at(r, j) += bv.data[j];
  }
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::tanh(NodeId x) {
  check_input(x, "tanh");
  Node n;
  n.kind = OpKind::Tanh;
  n.inputs = {x};
  n.value = node(x).value;
  for (T& v : n.value.data) v = std::tanh(v);
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::softmax_row(NodeId x) {
  check_input(x, "softmax-row");
  Node n;
  n.kind = OpKind::SoftmaxRow;
  n.inputs = {x};
  n.value = node(x).value;
  size_t rows = n.value.rows(), cols = n.value.cols();
  for (size_t r = 0; r < rows; ++r) {
    T* p = n.value.row_ptr(r);
    T mx = p[0];
    for (size_t j = 1; j < cols; ++j)
      if (p[j] > mx) mx = p[j];
    double denom = 0.0;
    for (size_t j = 0; j < cols; ++j) {
      p[j] = std::exp(p[j] - mx);
      denom += double(p[j]);
    }
    for (size_t j = 0; j < cols; ++j) p[j] = T(double(p[j]) / denom);
  }
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::embedding_lookup(NodeId table, std::vector<int32_t> ids) {
  check_input(table, "embedding-lookup");
  const Tensor<T>& tv = node(table).value;
  if (ids.empty()) fail(OpKind::EmbeddingLookup, "empty id list");
  size_t rows = tv.rows(), d = tv.cols();
  Node n;
  n.kind = OpKind::EmbeddingLookup;
  n.inputs = {table};
  n.value = Tensor<T>::zeros({ids.size(), d});
  for (size_t m = 0; m < ids.size(); ++m) {
    int32_t id = ids[m];
    if (id < 0 || size_t(id) >= rows)
      fail(OpKind::EmbeddingLookup,
           "id " + std::to_string(id) + " outside table " + tv.shape_str());
    const T* src = tv.row_ptr(size_t(id));
    T* dst = n.value.row_ptr(m);
    for (size_t j = 0; j < d; ++j) dst[j] = src[j];
  }
  n.ids = std::move(ids);
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::mean_rows(NodeId x) {
  check_input(x, "mean-rows");
  const Tensor<T>& xv = node(x).value;
  size_t rows = xv.rows(), cols = xv.cols();
  Node n;
  n.kind = OpKind::MeanRows;
  n.inputs = {x};
  n.value = Tensor<T>::zeros({1, cols});
  for (size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (size_t r = 0; r < rows; ++r) acc += double(xv.at(r, j));
    n.value.data[j] = T(acc / double(rows));
  }
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::concat(const std::vector<NodeId>& xs, int axis) {
  if (xs.empty()) fail(OpKind::Concat, "no inputs");
  if (axis != 0 && axis != 1) fail(OpKind::Concat, "axis must be 0 or 1");
  for (NodeId x : xs) check_input(x, "concat");
  Node n;
  n.kind = OpKind::Concat;
  n.inputs = xs;
  n.axis = axis;
  if (axis == 0) {
    size_t cols = node(xs[0]).value.cols(), rows = 0;
    for (NodeId x : xs) {
      const Tensor<T>& v = node(x).value;
      if (v.cols() != cols) fail(OpKind::Concat, "column mismatch " + v.shape_str());
      rows += v.rows();
    }
    n.value = Tensor<T>::zeros({rows, cols});
    size_t r0 = 0;
    for (NodeId x : xs) {
      const Tensor<T>& v = node(x).value;
      for (size_t r = 0; r < v.rows(); ++r, ++r0)
        for (size_t j = 0; j < cols; ++j) n.value.at(r0, j) = v.at(r, j);
    }
  } else {
    size_t rows = node(xs[0]).value.rows(), cols = 0;
    for (NodeId x : xs) {
      const Tensor<T>& v = node(x).value;
      if (v.rows() != rows) fail(OpKind::Concat, "row mismatch " + v.shape_str());
      cols += v.cols();
    }
    n.value = Tensor<T>::zeros({rows, cols});
    size_t c0 = 0;
    for (NodeId x : xs) {
      const Tensor<T>& v = node(x).value;
      for (size_t r = 0; r < rows; ++r)
        for (size_t j = 0; j < v.cols(); ++j) n.value.at(r, c0 + j) = v.at(r, j);
      c0 += v.cols();
    }
  }
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::add(NodeId a, NodeId b) {
  check_input(a, "add");
  check_input(b, "add");
  const Tensor<T>& av = node(a).value;
  const Tensor<T>& bv = node(b).value;
  bool broadcast = !av.same_shape(bv);
  if (broadcast && !(bv.rows() == 1 && bv.cols() == av.cols()))
    fail(OpKind::Add, "shape " + av.shape_str() + " vs " + bv.shape_str());
  Node n;
  n.kind = OpKind::Add;
  n.inputs = {a, b};
  n.value = av;
  if (broadcast) {
    for (size_t r = 0; r < av.rows(); ++r)
      for (size_t j = 0; j < av.cols(); ++j) n.value.at(r, j) += bv.data[j];
  } else {
    for (size_t i = 0; i < av.size(); ++i) n.value.data[i] += bv.data[i];
  }
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::scale(NodeId x, double factor) {
  check_input(x, "scale");
  Node n;
  n.kind = OpKind::Scale;
  n.inputs = {x};
  n.factor = factor;
  n.value = node(x).value;
  for (T& v : n.value.data) v = T(double(v) * factor);
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::dot(NodeId a, NodeId b) {
  check_input(a, "dot");
  check_input(b, "dot");
  const Tensor<T>& av = node(a).value;
  const Tensor<T>& bv = node(b).value;
  if (av.size() != bv.size())
    fail(OpKind::Dot, "size " + av.shape_str() + " vs " + bv.shape_str());
  double acc = 0.0;
  for (size_t i = 0; i < av.size(); ++i) acc += double(av.data[i]) * double(bv.data[i]);
  Node n;
  n.kind = OpKind::Dot;
  n.inputs = {a, b};
  n.value = Tensor<T>::from({1}, {T(acc)});
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::cross_entropy_pick(NodeId probs, std::vector<int32_t> targets,
                                   std::vector<double> weights) {
  check_input(probs, "cross-entropy-pick");
  const Tensor<T>& pv = node(probs).value;
  size_t rows = pv.rows(), cols = pv.cols();
  if (targets.size() != rows)
    fail(OpKind::CrossEntropyPick,
         std::to_string(targets.size()) + " targets for " + std::to_string(rows) + " rows");
  if (weights.empty()) weights.assign(rows, 1.0);
  if (weights.size() != rows)
    fail(OpKind::CrossEntropyPick, "weight count " + std::to_string(weights.size()));
  double acc = 0.0;
  for (size_t r = 0; r < rows; ++r) {
    int32_t t = targets[r];
    if (t < 0 || size_t(t) >= cols)
      fail(OpKind::CrossEntropyPick, "target " + std::to_string(t) + " outside row");
    if (weights[r] == 0.0) continue;
    acc += weights[r] * -std::log(double(pv.at(r, size_t(t))));
  }
  Node n;
  n.kind = OpKind::CrossEntropyPick;
  n.inputs = {probs};
  n.ids = std::move(targets);
  n.weights = std::move(weights);
  n.value = Tensor<T>::from({1}, {T(acc)});
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::matmul(NodeId a, NodeId b) {
  check_input(a, "matmul");
  check_input(b, "matmul");
  const Tensor<T>& av = node(a).value;
  const Tensor<T>& bv = node(b).value;
  if (av.cols() != bv.rows())
    fail(OpKind::MatMul, "inner dim " + av.shape_str() + " vs " + bv.shape_str());
  Node n;
  n.kind = OpKind::MatMul;
  n.inputs = {a, b};
  n.value = Tensor<T>::zeros({av.rows(), bv.cols()});
  gemm_nn(av.data.data(), bv.data.data(), n.value.data.data(), av.rows(), av.cols(),
          bv.cols());
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::reshape(NodeId x, std::vector<size_t> shape) {
  check_input(x, "reshape");
  Node n;
  n.kind = OpKind::Reshape;
  n.inputs = {x};
  n.value = Tensor<T>::from(std::move(shape), node(x).value.data);
  if (n.value.size() != node(x).value.size())
    fail(OpKind::Reshape, "size change " + node(x).value.shape_str());
  return push(std::move(n));
}

template <class T>
NodeId Tape<T>::slice_rows(NodeId x, size_t start, size_t count) {
  check_input(x, "slice-rows");
  const Tensor<T>& xv = node(x).value;
  if (count == 0 || start + count > xv.rows())
    fail(OpKind::SliceRows, "rows [" + std::to_string(start) + ", " +
                                std::to_string(start + count) + ") of " + xv.shape_str());
  Node n;
  n.kind = OpKind::SliceRows;
  n.inputs = {x};
  n.row_start = start;
  n.row_count = count;
  n.value = Tensor<T>::zeros({count, xv.cols()});
  for (size_t r = 0; r < count; ++r)
    for (size_t j = 0; j < xv.cols(); ++j) n.value.at(r, j) = xv.at(start + r, j);
  return push(std::move(n));
}

template <class T>
Tensor<T>& Tape<T>::grad_buf(NodeId id) {
  Node& n = node(id);
  if (!n.grad_touched) {
    n.grad = Tensor<T>::zeros(n.value.shape);
    n.grad_touched = true;
  }
  return n.grad;
}

template <class T>
Tensor<T> Tape<T>::grad(NodeId id) const {
  const Node& n = node(id);
  if (!n.grad_touched) return Tensor<T>::zeros(n.value.shape);
  return n.grad;
}

template <class T>
void Tape<T>::backward(NodeId loss) {
  Node& ln = node(loss);
  if (ln.value.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                ln.value.shape_str());
  grad_buf(loss).data[0] = T(1);

  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[size_t(id)];
    if (!n.grad_touched || n.kind == OpKind::Input) continue;
    const Tensor<T>& g = n.grad;
    switch (n.kind) {
      case OpKind::Affine: {
        const Tensor<T>& xv = node(n.inputs[0]).value;
        const Tensor<T>& wv = node(n.inputs[1]).value;
        size_t batch = xv.rows(), k = xv.cols(), m = wv.rows();
        gemm_nn(g.data.data(), wv.data.data(), grad_buf(n.inputs[0]).data.data(), batch,
                m, k);
        gemm_tn(g.data.data(), xv.data.data(), grad_buf(n.inputs[1]).data.data(), m,
                batch, k);
        if (n.inputs.size() > 2) {
          Tensor<T>& db = grad_buf(n.inputs[2]);
          for (size_t r = 0; r < batch; ++r)
            for (size_t j = 0; j < m; ++j) db.data[j] += g.at(r, j);
        }
        break;
      }
      case OpKind::Tanh: {
        Tensor<T>& dx = grad_buf(n.inputs[0]);
        for (size_t i = 0; i < g.size(); ++i) {
          T y = n.value.data[i];
          dx.data[i] += g.data[i] * (T(1) - y * y);
        }
        break;
      }
      case OpKind::SoftmaxRow: {
        Tensor<T>& dx = grad_buf(n.inputs[0]);
        size_t rows = g.rows(), cols = g.cols();
        for (size_t r = 0; r < rows; ++r) {
          const T* y = n.value.row_ptr(r);
          const T* gy = g.row_ptr(r);
          double s = 0.0;
          for (size_t j = 0; j < cols; ++j) s += double(gy[j]) * double(y[j]);
          T* d = dx.row_ptr(r);
          for (size_t j = 0; j < cols; ++j) d[j] += y[j] * (gy[j] - T(s));
        }
        break;
      }
      case OpKind::EmbeddingLookup: {
        Tensor<T>& dt = grad_buf(n.inputs[0]);
        size_t d = g.cols();
        for (size_t m = 0; m < n.ids.size(); ++m) {
          T* dst = dt.row_ptr(size_t(n.ids[m]));
          const T* src = g.row_ptr(m);
          for (size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
        break;
      }
      case OpKind::MeanRows: {
        Tensor<T>& dx = grad_buf(n.inputs[0]);
        size_t rows = dx.rows(), cols = dx.cols();
        T inv = T(1) / T(rows);
        for (size_t r = 0; r < rows; ++r)
          for (size_t j = 0; j < cols; ++j) dx.at(r, j) += g.data[j] * inv;
        break;
      }
      case OpKind::Concat: {
        if (n.axis == 0) {
          size_t r0 = 0, cols = g.cols();
          for (NodeId x : n.inputs) {
            Tensor<T>& dx = grad_buf(x);
            for (size_t r = 0; r < dx.rows(); ++r, ++r0)
              for (size_t j = 0; j < cols; ++j) dx.at(r, j) += g.at(r0, j);
          }
        } else {
          size_t c0 = 0;
          for (NodeId x : n.inputs) {
            Tensor<T>& dx = grad_buf(x);
            for (size_t r = 0; r < dx.rows(); ++r)
              for (size_t j = 0; j < dx.cols(); ++j) dx.at(r, j) += g.at(r, c0 + j);
            c0 += dx.cols();
          }
        }
        break;
      }
      case OpKind::Add: {
        Tensor<T>& da = grad_buf(n.inputs[0]);
        for (size_t i = 0; i < g.size(); ++i) da.data[i] += g.data[i];
        Tensor<T>& db = grad_buf(n.inputs[1]);
        if (db.same_shape(g)) {
          for (size_t i = 0; i < g.size(); ++i) db.data[i] += g.data[i];
        } else {
          for (size_t r = 0; r < g.rows(); ++r)
            for (size_t j = 0; j < g.cols(); ++j) db.data[j] += g.at(r, j);
        }
        break;
      }
      case OpKind::Scale: {
        Tensor<T>& dx = grad_buf(n.inputs[0]);
        for (size_t i = 0; i < g.size(); ++i) dx.data[i] += T(double(g.data[i]) * n.factor);
        break;
      }
      case OpKind::Dot: {
        const Tensor<T>& av = node(n.inputs[0]).value;
        const Tensor<T>& bv = node(n.inputs[1]).value;
        T gy = g.data[0];
        Tensor<T>& da = grad_buf(n.inputs[0]);
        Tensor<T>& db = grad_buf(n.inputs[1]);
        for (size_t i = 0; i < av.size(); ++i) {
          da.data[i] += gy * bv.data[i];
          db.data[i] += gy * av.data[i];
        }
        break;
      }
      case OpKind::CrossEntropyPick: {
        const Tensor<T>& pv = node(n.inputs[0]).value;
        Tensor<T>& dp = grad_buf(n.inputs[0]);
        T gy = g.data[0];
        for (size_t r = 0; r < pv.rows(); ++r) {
          if (n.weights[r] == 0.0) continue;
          size_t t = size_t(n.ids[r]);
          dp.at(r, t) += T(-double(gy) * n.weights[r] / double(pv.at(r, t)));
        }
        break;
      }
      case OpKind::MatMul: {
        const Tensor<T>& av = node(n.inputs[0]).value;
        const Tensor<T>& bv = node(n.inputs[1]).value;
        size_t p = av.rows(), q = av.cols(), r = bv.cols();
        gemm_nt(g.data.data(), bv.data.data(), grad_buf(n.inputs[0]).data.data(), p, r,
                q);
        gemm_tn(av.data.data(), g.data.data(), grad_buf(n.inputs[1]).data.data(), q, p,
                r);
        break;
      }
      case OpKind::Reshape: {
        Tensor<T>& dx = grad_buf(n.inputs[0]);
        for (size_t i = 0; i < g.size(); ++i) dx.data[i] += g.data[i];
        break;
      }
      case OpKind::SliceRows: {
        Tensor<T>& dx = grad_buf(n.inputs[0]);
        for (size_t r = 0; r < n.row_count; ++r)
          for (size_t j = 0; j < g.cols(); ++j)
            dx.at(n.row_start + r, j) += g.at(r, j);
        break;
      }
      case OpKind::Input:
        break;
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace awi
