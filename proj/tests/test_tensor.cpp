#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "vendor/doctest.h"

#include <cmath>
#include <stdexcept>

#include "awi/rng.hpp"
#include "awi/tensor.hpp"

using namespace awi;

// ==== construction and shape rules ====

TEST_CASE("zeros fills the requested shape") {
  auto t = Tensor<double>::zeros({2, 3});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.size() == 6);
  for (double v : t.data) CHECK(v == 0.0);
}

TEST_CASE("from rejects mismatched data size") {
  CHECK_THROWS_AS(Tensor<double>::from({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
  auto t = Tensor<double>::from({2, 2}, {1.0, 2.0, 3.0, 4.0});
  CHECK(t.at(1, 0) == 3.0);
}

TEST_CASE("rank outside 1..2 and zero dims are rejected") {
  CHECK_THROWS_AS(Tensor<double>::zeros({}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor<double>::zeros({2, 3, 4}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor<double>::zeros({2, 0}), std::invalid_argument);
}

TEST_CASE("rank-1 vector acts as a single row") {
  auto v = Tensor<double>::row({5.0, 6.0, 7.0});
  CHECK(v.rows() == 1);
  CHECK(v.cols() == 3);
  CHECK(v.at(0, 2) == 7.0);
}

TEST_CASE("uniform stays inside its bounds and depends on the seed") {
  Rng a(3), b(3), c(4);
  auto ta = Tensor<double>::uniform({4, 4}, -0.5, 0.5, a);
  auto tb = Tensor<double>::uniform({4, 4}, -0.5, 0.5, b);
  auto tc = Tensor<double>::uniform({4, 4}, -0.5, 0.5, c);
  CHECK(ta.data == tb.data);
  CHECK(ta.data != tc.data);
  for (double v : ta.data) {
    CHECK(v >= -0.5);
    CHECK(v < 0.5);
  }
}

TEST_CASE("cast converts element type and keeps shape") {
  auto t = Tensor<double>::from({2, 2}, {1.25, -2.5, 3.0, 0.0});
  auto f = t.cast<float>();
  CHECK(f.shape == t.shape);
  CHECK(f.at(0, 1) == doctest::Approx(-2.5));
  auto back = f.cast<double>();
  CHECK(back.data == t.data);
}

TEST_CASE("all_finite flags nan and infinity") {
  auto t = Tensor<double>::from({3}, {1.0, 2.0, 3.0});
  CHECK(t.all_finite());
  t.data[1] = std::nan("");
  CHECK_FALSE(t.all_finite());
  t.data[1] = INFINITY;
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("shape_str prints dimensions") {
  CHECK(Tensor<double>::zeros({2, 3}).shape_str() == "[2x3]");
  CHECK(Tensor<double>::zeros({5}).shape_str() == "[5]");
}

// ==== gemm kernels ====

TEST_CASE("gemm_nn matches a hand-computed product") {
  // a = [[1,2],[3,4]], b = [[5,6],[7,8]] -> [[19,22],[43,50]]
  double a[] = {1, 2, 3, 4}, b[] = {5, 6, 7, 8}, c[4] = {0, 0, 0, 0};
  gemm_nn(a, b, c, 2, 2, 2);
  CHECK(c[0] == 19.0);
  CHECK(c[1] == 22.0);
  CHECK(c[2] == 43.0);
  CHECK(c[3] == 50.0);
}

TEST_CASE("gemm_nn accumulates into c") {
  double a[] = {1, 0, 0, 1}, b[] = {2, 3, 4, 5}, c[] = {1, 1, 1, 1};
  gemm_nn(a, b, c, 2, 2, 2);
  CHECK(c[0] == 3.0);
  CHECK(c[3] == 6.0);
}

TEST_CASE("gemm_nt multiplies by the transpose") {
  // a = [[1,2]], b = [[3,4],[5,6]] (2x2, rows are b's rows) -> a*b^T = [11, 17]
  double a[] = {1, 2}, b[] = {3, 4, 5, 6}, c[2] = {0, 0};
  gemm_nt(a, b, c, 1, 2, 2);
  CHECK(c[0] == 11.0);
  CHECK(c[1] == 17.0);
}

TEST_CASE("gemm_tn transposes the left operand") {
  // a = [[1,2],[3,4]] (2x2, k x m), b = [[5],[6]] -> a^T*b = [[23],[34]]
  double a[] = {1, 2, 3, 4}, b[] = {5, 6}, c[2] = {0, 0};
  gemm_tn(a, b, c, 2, 2, 1);
  CHECK(c[0] == 23.0);
  CHECK(c[1] == 34.0);
}

TEST_CASE("gemm kernels agree on a common product") {
  // c1 = a*b via nn; c2 via nt with b pre-transposed; c3 via tn with a pre-transposed
  double a[] = {1, -2, 3, 4, 0.5, -1};   // 2x3
  double b[] = {2, 1, 0, -1, 1, 3};      // 3x2
  double bt[] = {2, 0, 1, 1, -1, 3};     // b^T, 2x3
  double at[] = {1, 4, -2, 0.5, 3, -1};  // a^T, 3x2
  double c1[4] = {}, c2[4] = {}, c3[4] = {};
  gemm_nn(a, b, c1, 2, 3, 2);
  gemm_nt(a, bt, c2, 2, 3, 2);
  gemm_tn(at, b, c3, 2, 3, 2);
  for (int i = 0; i < 4; ++i) {
    CHECK(c1[i] == doctest::Approx(c2[i]));
    CHECK(c1[i] == doctest::Approx(c3[i]));
  }
}

// ==== rng ====

TEST_CASE("rng is deterministic per seed") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 100; ++i)
    if (a2.next_u64() != c.next_u64()) differs = true;
  CHECK(differs);
}

TEST_CASE("uniform lands in the half-open unit interval") {
  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("index stays in range and covers all buckets") {
  Rng r(5);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    size_t k = r.index(7);
    REQUIRE(k < 7);
    ++hits[k];
  }
  for (int h : hits) CHECK(h > 0);
}

TEST_CASE("shuffle permutes without losing elements") {
  std::vector<int> v = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> orig = v;
  Rng r(11);
  r.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == orig);
  Rng r2(11);
  std::vector<int> v2 = orig;
  r2.shuffle(v2);
  CHECK(v2 == v);
}
