#include "vendor/doctest.h"

#include <cmath>
#include <stdexcept>

#include "awi/optim.hpp"

using namespace awi;

// ==== gradient clipping ====

TEST_CASE("clip rescales a [3,4] gradient to [0.6,0.8] at max_norm 1") {
  Tensor<float> g = Tensor<float>::row({3.0f, 4.0f});
  std::vector<Tensor<float>*> grads = {&g};
  double pre = clip_global_norm(grads, 1.0);
  CHECK(pre == doctest::Approx(5.0));
  CHECK(g.data[0] == doctest::Approx(0.6f));
  CHECK(g.data[1] == doctest::Approx(0.8f));
}

TEST_CASE("clip leaves gradients below the threshold untouched") {
  Tensor<float> g = Tensor<float>::row({0.6f, 0.8f});
  std::vector<Tensor<float>*> grads = {&g};
  double pre = clip_global_norm(grads, 5.0);
  CHECK(pre == doctest::Approx(1.0));
  CHECK(g.data[0] == 0.6f);
  CHECK(g.data[1] == 0.8f);
}

TEST_CASE("clip acts on the joint norm across tensors") {
  Tensor<float> a = Tensor<float>::row({6.0f});
  Tensor<float> b = Tensor<float>::row({8.0f});
  std::vector<Tensor<float>*> grads = {&a, &b};
  double pre = clip_global_norm(grads, 5.0);
  CHECK(pre == doctest::Approx(10.0));
  double post = global_grad_norm(grads);
  CHECK(post == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("clip rejects a non-positive max_norm") {
  Tensor<float> g = Tensor<float>::row({1.0f});
  std::vector<Tensor<float>*> grads = {&g};
  CHECK_THROWS_AS(clip_global_norm(grads, 0.0), std::invalid_argument);
}

// ==== rmsprop with momentum ====

TEST_CASE("zero gradient leaves parameters unchanged") {
  RmsPropConfig cfg;
  cfg.learning_rate = 0.1;
  RmsPropMomentum opt(cfg);
  Tensor<float> p = Tensor<float>::row({1.0f, -2.0f});
  Tensor<float> g = Tensor<float>::row({0.0f, 0.0f});
  std::vector<std::string> names = {"p"};
  opt.step(names, {&p}, {&g});
  CHECK(p.data[0] == 1.0f);
  CHECK(p.data[1] == -2.0f);
}

TEST_CASE("single step reproduces the hand-computed update") {
  // p=1, g=1, lr=0.1, decay=0.95, mu=0:
  // ms = 0.05, p' = 1 - 0.1 / sqrt(0.05 + 1e-6) = 0.552810
  RmsPropConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.decay = 0.95;
  cfg.momentum = 0.0;
  cfg.epsilon = 1e-6;
  RmsPropMomentum opt(cfg);
  Tensor<float> p = Tensor<float>::row({1.0f});
  Tensor<float> g = Tensor<float>::row({1.0f});
  std::vector<std::string> names = {"p"};
  opt.step(names, {&p}, {&g});
  CHECK(double(p.data[0]) == doctest::Approx(0.5528).epsilon(1e-3));
}

TEST_CASE("momentum grows the second displacement") {
  RmsPropConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.momentum = 0.9;
  RmsPropMomentum opt(cfg);
  Tensor<float> p = Tensor<float>::row({1.0f});
  Tensor<float> g = Tensor<float>::row({1.0f});
  std::vector<std::string> names = {"p"};
  float p0 = p.data[0];
  opt.step(names, {&p}, {&g});
  float d1 = std::abs(p.data[0] - p0);
  float p1 = p.data[0];
  opt.step(names, {&p}, {&g});
  float d2 = std::abs(p.data[0] - p1);
  CHECK(d2 > d1);
}

TEST_CASE("learning rate can be lowered mid-run") {
  RmsPropConfig cfg;
  cfg.learning_rate = 0.2;
  RmsPropMomentum opt(cfg);
  CHECK(opt.learning_rate() == 0.2);
  opt.set_learning_rate(0.1);
  CHECK(opt.learning_rate() == 0.1);
}

// ==== finite-difference harness ====

TEST_CASE("quadratic loss passes the check tightly") {
  std::vector<Tensor<double>> params = {Tensor<double>::row({1.0, -2.0, 3.0})};
  FdReport rep = finite_diff_check(
      [](const std::vector<Tensor<double>>& p) {
        double s = 0.0;
        for (double v : p[0].data) s += v * v;
        return s;
      },
      [](const std::vector<Tensor<double>>& p) {
        Tensor<double> g = p[0];
        for (double& v : g.data) v *= 2.0;
        return std::vector<Tensor<double>>{g};
      },
      params, {"w"}, 1e-5);
  CHECK(rep.max_rel_err < 1e-8);
  CHECK(rep.coords_checked == 3);
}

TEST_CASE("a doubled gradient is flagged near relative error one half") {
  std::vector<Tensor<double>> params = {Tensor<double>::row({0.7, -1.3})};
  FdReport rep = finite_diff_check(
      [](const std::vector<Tensor<double>>& p) {
        double s = 0.0;
        for (double v : p[0].data) s += v * v;
        return s;
      },
      [](const std::vector<Tensor<double>>& p) {
        Tensor<double> g = p[0];
        for (double& v : g.data) v *= 4.0;  // 2x the true gradient
        return std::vector<Tensor<double>>{g};
      },
      params, {"w"}, 1e-5);
  CHECK(rep.max_rel_err == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(rep.worst_param == "w");
}

TEST_CASE("coordinate sampling bounds the work") {
  std::vector<Tensor<double>> params = {Tensor<double>::zeros({10, 10})};
  for (size_t i = 0; i < 100; ++i) params[0].data[i] = 0.01 * double(i + 1);
  FdReport rep = finite_diff_check(
      [](const std::vector<Tensor<double>>& p) {
        double s = 0.0;
        for (double v : p[0].data) s += std::sin(v);
        return s;
      },
      [](const std::vector<Tensor<double>>& p) {
        Tensor<double> g = p[0];
        for (double& v : g.data) v = std::cos(v);
        return std::vector<Tensor<double>>{g};
      },
      params, {"w"}, 1e-5, 7, 3);
  CHECK(rep.coords_checked == 7);
  CHECK(rep.max_rel_err < 1e-7);
}
