#include "awi/optim.hpp"

#include <stdexcept>

#include "awi/rng.hpp"

namespace awi {

RmsPropMomentum::RmsPropMomentum(RmsPropConfig cfg) : cfg_(cfg) {
  if (cfg_.learning_rate <= 0) throw std::invalid_argument("rmsprop: learning rate <= 0");
  if (cfg_.decay <= 0 || cfg_.decay >= 1) throw std::invalid_argument("rmsprop: decay outside (0,1)");
  if (cfg_.momentum < 0 || cfg_.momentum >= 1)
    throw std::invalid_argument("rmsprop: momentum outside [0,1)");
  if (cfg_.epsilon <= 0) throw std::invalid_argument("rmsprop: epsilon <= 0");
}

void RmsPropMomentum::set_learning_rate(double lr) {
  if (lr <= 0) throw std::invalid_argument("rmsprop: learning rate <= 0");
  cfg_.learning_rate = lr;
}

void RmsPropMomentum::step(const std::vector<std::string>& names,
                           const std::vector<Tensor<float>*>& params,
                           const std::vector<const Tensor<float>*>& grads) {
  if (params.size() != grads.size() || params.size() != names.size())
    throw std::invalid_argument("rmsprop: parameter/gradient count mismatch");
  if (slots_.empty()) {
    slots_.reserve(params.size());
    for (const Tensor<float>* p : params)
      slots_.push_back({Tensor<float>::zeros(p->shape), Tensor<float>::zeros(p->shape)});
  }
  if (slots_.size() != params.size())
    throw std::invalid_argument("rmsprop: parameter count changed between steps");

  for (size_t i = 0; i < params.size(); ++i) {
    Tensor<float>& p = *params[i];
    const Tensor<float>& g = *grads[i];
    Slot& s = slots_[i];
    if (!p.same_shape(s.mean_square) || !g.same_shape(p))
      throw std::invalid_argument("rmsprop: shape mismatch for " + names[i]);
    float decay = float(cfg_.decay), mu = float(cfg_.momentum);
    float lr = float(cfg_.learning_rate), eps = float(cfg_.epsilon);
    for (size_t j = 0; j < p.size(); ++j) {
      float gj = g.data[j];
      float ms = decay * s.mean_square.data[j] + (1.0f - decay) * gj * gj;
      float mom = mu * s.momentum.data[j] - lr * gj / std::sqrt(ms + eps);
      s.mean_square.data[j] = ms;
      s.momentum.data[j] = mom;
      p.data[j] += mom;
      if (!std::isfinite(p.data[j]))
        throw std::runtime_error("rmsprop: non-finite update in " + names[i]);
    }
  }
}

FdReport finite_diff_check(const FdLossFn& loss_fn, const FdGradFn& grad_fn,
                           const std::vector<Tensor<double>>& params,
                           const std::vector<std::string>& names, double step,
                           size_t max_coords_per_param, uint64_t seed) {
  if (step <= 0) throw std::invalid_argument("finite_diff_check: step <= 0");
  if (params.size() != names.size())
    throw std::invalid_argument("finite_diff_check: name count mismatch");

  std::vector<Tensor<double>> analytic = grad_fn(params);
  if (analytic.size() != params.size())
    throw std::invalid_argument("finite_diff_check: gradient count mismatch");

  FdReport rep;
  Rng rng(seed);
  std::vector<Tensor<double>> work = params;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    size_t n = params[pi].size();
    std::vector<size_t> coords;
    if (max_coords_per_param == 0 || n <= max_coords_per_param) {
      coords.resize(n);
      for (size_t j = 0; j < n; ++j) coords[j] = j;
    } else {
      for (size_t j = 0; j < max_coords_per_param; ++j) coords.push_back(rng.index(n));
    }
    for (size_t j : coords) {
      double orig = work[pi].data[j];
      work[pi].data[j] = orig + step;
      double fp = loss_fn(work);
      work[pi].data[j] = orig - step;
      double fm = loss_fn(work);
      work[pi].data[j] = orig;
      double numeric = (fp - fm) / (2.0 * step);
      double a = analytic[pi].data[j];
      double rel = std::abs(a - numeric) /
                   std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++rep.coords_checked;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_param = names[pi];
        rep.worst_coord = j;
        rep.analytic = a;
        rep.numeric = numeric;
      }
    }
  }
  return rep;
}

}  // namespace awi
