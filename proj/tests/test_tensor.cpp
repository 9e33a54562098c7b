#include <cmath>

#include "doctest.h"
#include "graphssl/rng.hpp"
#include "graphssl/tape.hpp"
#include "testutil.hpp"

using namespace graphssl;
using graphssl::testing::random_tensor;

TEST_CASE("matmul against identity and hand values") {
  Tape t;
  Var a = t.leaf(Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  Var eye = t.leaf(Tensor::identity(2));
  CHECK(t.value(t.matmul(a, eye)) == t.value(a));

  Var b = t.leaf(Tensor::from_rows({{1, 0, 2}, {0, 1, 3}}));
  const Tensor c = t.value(t.matmul(a, b));
  CHECK(c(0, 0) == 1.0);
  CHECK(c(0, 2) == 8.0);
  CHECK(c(2, 2) == 28.0);

  CHECK_THROWS_AS(t.matmul(a, a), std::invalid_argument);
}

TEST_CASE("var_axis0 uses the unbiased estimator") {
  Tape t;
  Var z = t.leaf(Tensor::from_rows({{1}, {-1}}));
  CHECK(t.value(t.var_axis0(z)).item() == doctest::Approx(2.0));  // (1+1)/(2-1)

  Var one_row = t.leaf(Tensor::from_rows({{5, 5}}));
  CHECK_THROWS_AS(t.var_axis0(one_row), std::invalid_argument);
}

TEST_CASE("relu clamps negatives") {
  Tape t;
  const Tensor r = t.value(t.relu(t.leaf(Tensor::from_rows({{-3, 0, 5}}))));
  CHECK(r(0, 0) == 0.0);
  CHECK(r(0, 1) == 0.0);
  CHECK(r(0, 2) == 5.0);
}

TEST_CASE("sqrt and log reject non-positive input") {
  Tape t;
  CHECK_THROWS_AS(t.sqrt(t.leaf(Tensor::from_rows({{0.0}}))), std::domain_error);
  CHECK_THROWS_AS(t.sqrt(t.leaf(Tensor::from_rows({{-1.0}}))), std::domain_error);
  CHECK_THROWS_AS(t.log(t.leaf(Tensor::from_rows({{0.0}}))), std::domain_error);
}

TEST_CASE("segment_mean hand values") {
  Tape t;
  Var data = t.leaf(Tensor::from_rows({{1}, {2}, {3}, {4}}));
  const Tensor m = t.value(t.segment_mean(data, {0, 0, 1, 1}, 2));
  CHECK(m(0, 0) == doctest::Approx(1.5));
  CHECK(m(1, 0) == doctest::Approx(3.5));

  // One segment covering all rows is the global mean.
  CHECK(t.value(t.segment_mean(data, {0, 0, 0, 0}, 1)).item() == doctest::Approx(2.5));

  // Each row its own segment is the identity.
  const Tensor id = t.value(t.segment_mean(data, {0, 1, 2, 3}, 4));
  CHECK(id == t.value(data));

  CHECK_THROWS_AS(t.segment_mean(data, {0, 0, 0, 0}, 2), std::invalid_argument);
}

TEST_CASE("segment_mean broadcast-back then segment_mean is idempotent") {
  Rng rng(77);
  Tape t;
  const Tensor data = random_tensor(rng, 6, 3);
  const std::vector<int> ids = {0, 0, 1, 1, 1, 2};
  Var means = t.segment_mean(t.leaf(data), ids, 3);
  Tensor back(6, 3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      back(i, j) = t.value(means)(static_cast<std::size_t>(ids[i]), j);
  Var again = t.segment_mean(t.leaf(back), ids, 3);
  CHECK(t.value(again).max_abs_diff(t.value(means)) < 1e-12);
}

TEST_CASE("aggregate_neighbors hand values") {
  Tape t;
  Var f = t.leaf(Tensor::from_rows({{1}, {10}, {100}}));
  // Path 0-1-2 in both directions.
  const std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 0}, {1, 2}, {2, 1}};
  const Tensor agg = t.value(t.aggregate_neighbors(f, edges));
  CHECK(agg(0, 0) == 10.0);
  CHECK(agg(1, 0) == 101.0);
  CHECK(agg(2, 0) == 10.0);

  // No edges: all-zero output.
  const Tensor zero = t.value(t.aggregate_neighbors(f, {}));
  CHECK(zero.max_abs_diff(Tensor(3, 1)) == 0.0);

  // Single undirected edge swaps the two rows.
  Tape t2;
  Var g = t2.leaf(Tensor::from_rows({{2}, {3}}));
  const Tensor swapped = t2.value(t2.aggregate_neighbors(g, {{0, 1}, {1, 0}}));
  CHECK(swapped(0, 0) == 3.0);
  CHECK(swapped(1, 0) == 2.0);

  CHECK_THROWS_AS(t.aggregate_neighbors(f, {{0, 7}}), std::invalid_argument);
}

TEST_CASE("aggregate_neighbors is linear") {
  Rng rng(5);
  const Tensor x = random_tensor(rng, 8, 4);
  const Tensor y = random_tensor(rng, 8, 4);
  std::vector<std::pair<int, int>> edges;
  for (int k = 0; k < 12; ++k)
    edges.emplace_back(static_cast<int>(rng.uniform(8)), static_cast<int>(rng.uniform(8)));
  const double a = 2.5, b = -1.25;
  Tensor combo(8, 4);
  for (std::size_t k = 0; k < combo.size(); ++k) combo[k] = a * x[k] + b * y[k];
  Tape t;
  const Tensor lhs = t.value(t.aggregate_neighbors(t.leaf(combo), edges));
  const Tensor ax = t.value(t.aggregate_neighbors(t.leaf(x), edges));
  const Tensor ay = t.value(t.aggregate_neighbors(t.leaf(y), edges));
  Tensor rhs(8, 4);
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = a * ax[k] + b * ay[k];
  CHECK(lhs.max_abs_diff(rhs) < 1e-12);
}

TEST_CASE("backward of sum is all ones; untouched parameters stay zero") {
  Tape t;
  Var w = t.leaf(Tensor::from_rows({{1, 2}, {3, 4}}), true);
  Var unused = t.leaf(Tensor::from_rows({{9, 9}}), true);
  t.backward(t.sum(w));
  CHECK(t.grad(w).max_abs_diff(Tensor(2, 2, 1.0)) == 0.0);
  CHECK(t.grad(unused).max_abs_diff(Tensor(1, 2)) == 0.0);
}

TEST_CASE("backward of mean row norm squared is 2z/n") {
  Rng rng(11);
  const Tensor z = random_tensor(rng, 5, 3);
  Tape t;
  Var zv = t.leaf(z, true);
  Var loss = t.mean(t.pnorm_sq_rows(zv, 2.0));
  t.backward(loss);
  const Tensor g = t.grad(zv);
  for (std::size_t k = 0; k < z.size(); ++k)
    CHECK(g[k] == doctest::Approx(2.0 * z[k] / 5.0).epsilon(1e-12));
}

TEST_CASE("independent paths get independent gradients") {
  Tape t;
  Var a = t.leaf(Tensor::from_rows({{2}}), true);
  Var b = t.leaf(Tensor::from_rows({{3}}), true);
  Var loss = t.add(t.scalar_mul(a, 4.0), t.scalar_mul(b, 7.0));
  t.backward(loss);
  CHECK(t.grad(a).item() == 4.0);
  CHECK(t.grad(b).item() == 7.0);
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape t;
  Var a = t.leaf(Tensor::from_rows({{1, 2}}), true);
  CHECK_THROWS_AS(t.backward(a), std::invalid_argument);
}

TEST_CASE("finite differences: sum of squares and constant") {
  Rng rng(3);
  const Tensor point = random_tensor(rng, 4, 3);
  const double err = finite_difference_check(
      [](Tape& t, Var x) { return t.sum(t.pow(x, 2.0)); }, point, 1e-5);
  CHECK(err <= 1e-6);

  const double cerr = finite_difference_check(
      [](Tape& t, Var x) { return t.scalar_mul(t.sum(t.multiply(x, t.leaf(Tensor(4, 3)))), 1.0); },
      point, 1e-5);
  CHECK(cerr == 0.0);
}

TEST_CASE("finite differences across the kernel set") {
  Rng rng(29);
  // Strictly positive input for sqrt/log; relu checked away from the kink.
  Tensor pos = random_tensor(rng, 6, 4);
  for (std::size_t k = 0; k < pos.size(); ++k) pos[k] = std::abs(pos[k]) + 0.5;
  Tensor any = random_tensor(rng, 6, 4);
  for (std::size_t k = 0; k < any.size(); ++k)
    if (std::abs(any[k]) < 0.05) any[k] = 0.1;  // keep relu/pnorm off non-smooth points

  auto fd = [&](const std::function<Var(Tape&, Var)>& f, const Tensor& at) {
    return finite_difference_check(f, at, 1e-6);
  };

  CHECK(fd([](Tape& t, Var x) { return t.sum(t.sqrt(x)); }, pos) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.log(x)); }, pos) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.exp(t.scalar_mul(x, 0.3))); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.relu(x)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.pow(x, 3.0)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.pow(x, 1.5)); }, pos) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.mean(t.multiply(x, x)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.matmul(x, t.transpose(x))); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.var_axis0(x)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.mean_axis0(x)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.l2_row_normalize(x)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.multiply(t.log_softmax_rows(x),
                                                        t.leaf(Tensor(6, 4, 0.25)))); },
           any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.mean(t.pnorm_sq_rows(x, 1.0)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.mean(t.pnorm_sq_rows(x, 1.5)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.mean(t.pnorm_sq_rows(x, 3.0)); }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) { return t.sum(t.row_slice(t.concat_rows(x, x), 2, 7)); }, any) <=
        1e-5);
  CHECK(fd([](Tape& t, Var x) {
          return t.sum(t.segment_mean(x, {0, 0, 1, 1, 2, 2}, 3));
        }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) {
          return t.sum(t.aggregate_neighbors(x, {{0, 1}, {1, 0}, {2, 5}, {4, 3}}));
        }, any) <= 1e-5);
  CHECK(fd([](Tape& t, Var x) {
          return t.sum(t.subtract(t.add(x, t.row_slice(x, 0, 1)), t.row_slice(x, 1, 2)));
        }, any) <= 1e-5);
}

TEST_CASE("grad before backward is zeros-shaped") {
  Tape t;
  Var a = t.leaf(Tensor::from_rows({{1, 2, 3}}), true);
  CHECK(t.grad(a).rows() == 1);
  CHECK(t.grad(a).cols() == 3);
  CHECK(t.grad(a).max_abs_diff(Tensor(1, 3)) == 0.0);
}
