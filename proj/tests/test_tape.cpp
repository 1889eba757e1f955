#include "vendor/doctest.h"

#include <cmath>
#include <stdexcept>

#include "awi/optim.hpp"
#include "awi/tape.hpp"

using namespace awi;

namespace {

Tensor<double> vec(std::vector<double> v) { return Tensor<double>::row(std::move(v)); }

}  // namespace

// ==== forward values ====

TEST_CASE("tanh of zero is zero") {
  Tape<double> t;
  NodeId x = t.input(vec({0.0}));
  NodeId y = t.tanh(x);
  CHECK(t.value(y).data[0] == 0.0);
}

TEST_CASE("softmax of equal logits is uniform") {
  Tape<double> t;
  NodeId x = t.input(vec({0.0, 0.0, 0.0}));
  NodeId y = t.softmax_row(x);
  for (double p : t.value(y).data) CHECK(p == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax rows each sum to one and stay positive") {
  Tape<double> t;
  NodeId x = t.input(Tensor<double>::from({2, 3}, {1.0, -2.0, 0.5, 300.0, 299.0, -50.0}));
  NodeId y = t.softmax_row(x);
  const Tensor<double>& p = t.value(y);
  for (size_t r = 0; r < 2; ++r) {
    double s = 0.0;
    for (size_t c = 0; c < 3; ++c) {
      CHECK(p.at(r, c) > 0.0);
      s += p.at(r, c);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("affine applies weight rows to the input") {
  // y[j] = W[j] . x, W = [[1,2],[3,4]], x = [1,1] -> [3,7]
  Tape<double> t;
  NodeId x = t.input(vec({1.0, 1.0}));
  NodeId w = t.input(Tensor<double>::from({2, 2}, {1.0, 2.0, 3.0, 4.0}));
  NodeId b = t.input(vec({0.0, 0.0}));
  NodeId y = t.affine(x, w, b);
  CHECK(t.value(y).at(0, 0) == 3.0);
  CHECK(t.value(y).at(0, 1) == 7.0);
}

TEST_CASE("affine rejects mismatched widths") {
  Tape<double> t;
  NodeId x = t.input(vec({1.0, 2.0, 3.0}));
  NodeId w = t.input(Tensor<double>::from({2, 2}, {1.0, 0.0, 0.0, 1.0}));
  CHECK_THROWS_AS(t.affine(x, w), std::runtime_error);
}

TEST_CASE("embedding lookup gathers rows") {
  Tape<double> t;
  NodeId e = t.input(Tensor<double>::from({3, 2}, {1, 2, 3, 4, 5, 6}));
  NodeId g = t.embedding_lookup(e, {2, 0, 2});
  const Tensor<double>& v = t.value(g);
  CHECK(v.rows() == 3);
  CHECK(v.at(0, 0) == 5.0);
  CHECK(v.at(1, 1) == 2.0);
  CHECK(v.at(2, 0) == 5.0);
}

TEST_CASE("mean_rows averages down to one row") {
  Tape<double> t;
  NodeId x = t.input(Tensor<double>::from({2, 2}, {1.0, 2.0, 3.0, 6.0}));
  NodeId m = t.mean_rows(x);
  CHECK(t.value(m).at(0, 0) == 2.0);
  CHECK(t.value(m).at(0, 1) == 4.0);
}

TEST_CASE("concat joins along both axes") {
  Tape<double> t;
  NodeId a = t.input(Tensor<double>::from({1, 2}, {1.0, 2.0}));
  NodeId b = t.input(Tensor<double>::from({1, 2}, {3.0, 4.0}));
  NodeId rows = t.concat({a, b}, 0);
  CHECK(t.value(rows).rows() == 2);
  CHECK(t.value(rows).at(1, 0) == 3.0);
  NodeId cols = t.concat({a, b}, 1);
  CHECK(t.value(cols).cols() == 4);
  CHECK(t.value(cols).at(0, 3) == 4.0);
}

TEST_CASE("dot reduces to a scalar") {
  Tape<double> t;
  NodeId a = t.input(vec({1.0, 2.0, 3.0}));
  NodeId b = t.input(vec({4.0, 5.0, 6.0}));
  NodeId d = t.dot(a, b);
  CHECK(t.value(d).data[0] == 32.0);
}

TEST_CASE("cross_entropy_pick sums weighted negative log picks") {
  Tape<double> t;
  NodeId p = t.input(Tensor<double>::from({2, 2}, {0.5, 0.5, 0.25, 0.75}));
  NodeId l = t.cross_entropy_pick(p, {0, 1});
  CHECK(t.value(l).data[0] == doctest::Approx(-std::log(0.5) - std::log(0.75)));
  NodeId lw = t.cross_entropy_pick(p, {0, 1}, {1.0, 0.0});
  CHECK(t.value(lw).data[0] == doctest::Approx(-std::log(0.5)));
}

TEST_CASE("cross_entropy_pick rejects out-of-row targets") {
  Tape<double> t;
  NodeId p = t.input(Tensor<double>::from({1, 2}, {0.5, 0.5}));
  CHECK_THROWS_AS(t.cross_entropy_pick(p, {2}), std::runtime_error);
  CHECK_THROWS_AS(t.cross_entropy_pick(p, {0, 1}), std::runtime_error);
}

TEST_CASE("slice_rows takes a contiguous block") {
  Tape<double> t;
  NodeId x = t.input(Tensor<double>::from({3, 2}, {1, 2, 3, 4, 5, 6}));
  NodeId s = t.slice_rows(x, 1, 2);
  CHECK(t.value(s).rows() == 2);
  CHECK(t.value(s).at(0, 0) == 3.0);
  CHECK(t.value(s).at(1, 1) == 6.0);
}

// ==== backward ====

TEST_CASE("gradient of dot(w, w) is 2w") {
  Tape<double> t;
  NodeId w = t.input(vec({1.0, 2.0}));
  NodeId loss = t.dot(w, w);
  t.backward(loss);
  Tensor<double> g = t.grad(w);
  CHECK(g.data[0] == doctest::Approx(2.0));
  CHECK(g.data[1] == doctest::Approx(4.0));
}

TEST_CASE("gradient of tanh at zero is one") {
  Tape<double> t;
  NodeId x = t.input(vec({0.0}));
  NodeId y = t.tanh(x);
  t.backward(y);
  CHECK(t.grad(x).data[0] == doctest::Approx(1.0));
}

TEST_CASE("backward rejects a non-scalar loss") {
  Tape<double> t;
  NodeId x = t.input(vec({1.0, 2.0}));
  CHECK_THROWS_AS(t.backward(x), std::runtime_error);
}

TEST_CASE("nodes off the loss path report zero gradients") {
  Tape<double> t;
  NodeId used = t.input(vec({1.0, 2.0}));
  NodeId unused = t.input(vec({5.0, 5.0}));
  NodeId loss = t.dot(used, used);
  t.backward(loss);
  CHECK(t.grad_touched(used));
  CHECK_FALSE(t.grad_touched(unused));
  for (double g : t.grad(unused).data) CHECK(g == 0.0);
}

TEST_CASE("composite graph gradient matches finite differences") {
  // loss = sum-style scalar through affine, tanh, softmax and a pick
  auto build = [](const std::vector<Tensor<double>>& p, Tape<double>& t) {
    NodeId x = t.input(p[0]);
    NodeId w = t.input(p[1]);
    NodeId b = t.input(p[2]);
    NodeId h = t.tanh(t.affine(x, w, b));
    NodeId probs = t.softmax_row(h);
    NodeId ce = t.cross_entropy_pick(probs, {1});
    NodeId quad = t.dot(h, h);
    return std::make_tuple(t.add(ce, quad), x, w, b);
  };
  std::vector<Tensor<double>> params = {
      vec({0.3, -0.4, 0.2}),
      Tensor<double>::from({3, 3}, {0.1, 0.2, -0.3, 0.4, -0.5, 0.6, 0.7, 0.8, -0.9}),
      vec({0.05, -0.05, 0.1}),
  };
  FdReport rep = finite_diff_check(
      [&](const std::vector<Tensor<double>>& p) {
        Tape<double> t;
        auto [loss, x, w, b] = build(p, t);
        return t.value(loss).data[0];
      },
      [&](const std::vector<Tensor<double>>& p) {
        Tape<double> t;
        auto [loss, x, w, b] = build(p, t);
        t.backward(loss);
        return std::vector<Tensor<double>>{t.grad(x), t.grad(w), t.grad(b)};
      },
      params, {"x", "w", "b"}, 1e-5);
  CHECK(rep.max_rel_err < 1e-7);
}

TEST_CASE("matmul gradients match finite differences") {
  std::vector<Tensor<double>> params = {
      Tensor<double>::from({2, 3}, {0.2, -0.1, 0.5, 0.3, 0.4, -0.6}),
      Tensor<double>::from({3, 2}, {0.1, 0.7, -0.2, 0.3, 0.5, -0.4}),
  };
  auto loss_of = [](const std::vector<Tensor<double>>& p, Tape<double>& t, NodeId& a,
                    NodeId& b) {
    a = t.input(p[0]);
    b = t.input(p[1]);
    NodeId m = t.matmul(a, b);
    NodeId flat = t.reshape(m, {4});
    return t.dot(flat, flat);
  };
  FdReport rep = finite_diff_check(
      [&](const std::vector<Tensor<double>>& p) {
        Tape<double> t;
        NodeId a, b;
        NodeId l = loss_of(p, t, a, b);
        return t.value(l).data[0];
      },
      [&](const std::vector<Tensor<double>>& p) {
        Tape<double> t;
        NodeId a, b;
        NodeId l = loss_of(p, t, a, b);
        t.backward(l);
        return std::vector<Tensor<double>>{t.grad(a), t.grad(b)};
      },
      params, {"a", "b"}, 1e-5);
  CHECK(rep.max_rel_err < 1e-7);
}

TEST_CASE("mixed-op graph with lookup, mean, concat, slice and scale differentiates") {
  std::vector<Tensor<double>> params = {
      Tensor<double>::from({4, 2}, {0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8}),
  };
  auto graph = [](const std::vector<Tensor<double>>& p, Tape<double>& t, NodeId& e) {
    e = t.input(p[0]);
    NodeId rows = t.embedding_lookup(e, {0, 2, 3});
    NodeId mean = t.mean_rows(rows);
    NodeId top = t.slice_rows(rows, 0, 2);
    NodeId joined = t.concat({mean, top}, 0);
    NodeId scaled = t.scale(joined, 1.5);
    NodeId flat = t.reshape(scaled, {6});
    return t.dot(flat, flat);
  };
  FdReport rep = finite_diff_check(
      [&](const std::vector<Tensor<double>>& p) {
        Tape<double> t;
        NodeId e;
        NodeId l = graph(p, t, e);
        return t.value(l).data[0];
      },
      [&](const std::vector<Tensor<double>>& p) {
        Tape<double> t;
        NodeId e;
        NodeId l = graph(p, t, e);
        t.backward(l);
        return std::vector<Tensor<double>>{t.grad(e)};
      },
      params, {"e"}, 1e-5);
  CHECK(rep.max_rel_err < 1e-7);
}

TEST_CASE("float tape agrees with double tape on forward values") {
  Tape<double> td;
  Tape<float> tf;
  NodeId xd = td.input(vec({0.25, -0.5}));
  NodeId wd = td.input(Tensor<double>::from({2, 2}, {0.5, 0.25, -0.75, 1.0}));
  NodeId yd = td.softmax_row(td.tanh(td.affine(xd, wd)));
  NodeId xf = tf.input(Tensor<float>::row({0.25f, -0.5f}));
  NodeId wf = tf.input(Tensor<float>::from({2, 2}, {0.5f, 0.25f, -0.75f, 1.0f}));
  NodeId yf = tf.softmax_row(tf.tanh(tf.affine(xf, wf)));
  for (size_t i = 0; i < 2; ++i)
    CHECK(double(tf.value(yf).data[i]) == doctest::Approx(td.value(yd).data[i]).epsilon(1e-6));
}
