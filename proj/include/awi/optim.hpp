#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "awi/tensor.hpp"

namespace awi {

template <class T>
double global_grad_norm(const std::vector<Tensor<T>*>& grads) {
  double acc = 0.0;
  for (const Tensor<T>* g : grads)
    for (T v : g->data) acc += double(v) * double(v);
  return std::sqrt(acc);
}

// Scales every gradient by max_norm/norm when the joint norm exceeds
// max_norm. Returns the pre-clip norm.
template <class T>
double clip_global_norm(const std::vector<Tensor<T>*>& grads, double max_norm) {
  if (max_norm <= 0.0) throw std::invalid_argument("clip_global_norm: max_norm <= 0");
  double norm = global_grad_norm(grads);
  if (norm > max_norm) {
    double s = max_norm / norm;
    for (Tensor<T>* g : grads)
      for (T& v : g->data) v = T(double(v) * s);
  }
  return norm;
}

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double decay = 0.95;
  double momentum = 0.9;
  double epsilon = 1e-6;
};

// ms <- decay*ms + (1-decay)*g^2 ; mom <- mu*mom - lr*g/sqrt(ms+eps) ; p <- p + mom
class RmsPropMomentum {
 public:
  explicit RmsPropMomentum(RmsPropConfig cfg);

  void step(const std::vector<std::string>& names,
            const std::vector<Tensor<float>*>& params,
            const std::vector<const Tensor<float>*>& grads);

  double learning_rate() const { return cfg_.learning_rate; }
  void set_learning_rate(double lr);

 private:
  RmsPropConfig cfg_;
  struct Slot {
    Tensor<float> mean_square;
    Tensor<float> momentum;
  };
  std::vector<Slot> slots_;
};

// ==== finite-difference harness ====
// The numeric side always runs in 64-bit: central differences in float32
// drown in cancellation noise well above the tolerances we certify. The
// analytic side under test supplies gradients from whichever precision is
// being checked.

struct FdReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  size_t worst_coord = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  size_t coords_checked = 0;
};

using FdLossFn = std::function<double(const std::vector<Tensor<double>>&)>;
using FdGradFn =
    std::function<std::vector<Tensor<double>>(const std::vector<Tensor<double>>&)>;

// Perturbs sampled coordinates of each parameter by +-step, compares
// (f+ - f-)/(2 step) against the analytic gradient. max_coords_per_param
// 0 means every coordinate.
FdReport finite_diff_check(const FdLossFn& loss_fn, const FdGradFn& grad_fn,
                           const std::vector<Tensor<double>>& params,
                           const std::vector<std::string>& names, double step,
                           size_t max_coords_per_param = 0, uint64_t seed = 1);

}  // namespace awi
