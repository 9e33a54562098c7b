#include <cmath>

#include "doctest.h"
#include "graphssl/losses.hpp"
#include "graphssl/rng.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace graphssl;
using graphssl::testing::random_tensor;

namespace {

const Tensor kAnti = Tensor::from_rows({{1, 1}, {-1, -1}});

LossParams default_params(CovarianceMode mode) {
  LossParams p;
  p.covariance_mode = mode;
  return p;
}

Tensor permuted_rows(const Tensor& t, const std::vector<std::size_t>& perm) {
  Tensor out(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) out(i, j) = t(perm[i], j);
  return out;
}

}  // namespace

TEST_CASE("invariance term hand values") {
  CHECK(invariance_term_value(kAnti, kAnti, 2.0) == 0.0);

  const Tensor za = Tensor::from_rows({{3, 4}});
  const Tensor zb = Tensor::from_rows({{0, 0}});
  CHECK(invariance_term_value(za, zb, 2.0) == doctest::Approx(25.0));  // (2-norm 5)^2
  CHECK(invariance_term_value(za, zb, 1.0) == doctest::Approx(49.0));  // (1-norm 7)^2

  CHECK(invariance_term_value(za, zb, 2.0) == invariance_term_value(zb, za, 2.0));
}

TEST_CASE("variance term hand values") {
  const Tensor constant(4, 2, 3.0);
  // Var = 0: hinge is 1 - sqrt(1e-4) = 0.99 per column.
  CHECK(variance_term_value(constant, 1.0, 1e-4) == doctest::Approx(0.99));

  // Column {1,-1}: sqrt(2 + 1e-4) > 1, hinge saturates at 0.
  CHECK(variance_term_value(kAnti, 1.0, 1e-4) == doctest::Approx(0.0));

  // All columns with std >= gamma give exactly 0.
  Rng rng(2);
  Tensor spread = random_tensor(rng, 16, 3, 10.0);
  CHECK(variance_term_value(spread, 0.01, 1e-6) == 0.0);
}

TEST_CASE("covariance matrix hand values and symmetry") {
  const Tensor c = covariance_matrix_value(kAnti);
  CHECK(c(0, 0) == doctest::Approx(2.0));
  CHECK(c(0, 1) == doctest::Approx(2.0));
  CHECK(c(1, 0) == doctest::Approx(2.0));
  CHECK(c(1, 1) == doctest::Approx(2.0));

  CHECK(covariance_matrix_value(Tensor(5, 3, 2.5)).max_abs_diff(Tensor(3, 3)) == 0.0);

  Rng rng(3);
  const Tensor z = random_tensor(rng, 12, 5);
  const Tensor cov = covariance_matrix_value(z);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(cov(i, j) == doctest::Approx(cov(j, i)));
}

TEST_CASE("covariance term: vicreg vs hsic") {
  // Off-diagonals are 2: vicreg (4+4)/2 = 4, hsic (9+9)/2 = 9.
  CHECK(covariance_term_value(kAnti, CovarianceMode::VicReg) == doctest::Approx(4.0));
  CHECK(covariance_term_value(kAnti, CovarianceMode::Hsic) == doctest::Approx(9.0));

  // Decorrelated columns: vicreg mode is zero.
  const Tensor diag = Tensor::from_rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  CHECK(covariance_term_value(diag, CovarianceMode::VicReg) == doctest::Approx(0.0));

  // Off-diagonal exactly -1 is the hsic optimum.
  // Columns (x, -x) with unbiased covariance -1: x = {1,-1,...} scaled.
  Tensor anti(4, 2);
  const double s = std::sqrt(3.0 / 4.0);  // var of {s,-s,s,-s} (unbiased) = 4s^2/3 = 1
  for (std::size_t i = 0; i < 4; ++i) {
    anti(i, 0) = (i % 2 == 0 ? s : -s);
    anti(i, 1) = -anti(i, 0);
  }
  CHECK(covariance_term_value(anti, CovarianceMode::Hsic) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("family loss reproduces the frozen compositions") {
  LossParams vic = default_params(CovarianceMode::VicReg);
  LossParams hsic = default_params(CovarianceMode::Hsic);

  // Equal views of rows (1,1)/(-1,-1).
  CHECK(vicreg_family_loss_value(kAnti, kAnti, vic) == doctest::Approx(8.0));
  CHECK(vicreg_family_loss_value(kAnti, kAnti, hsic) == doctest::Approx(18.0));

  // Constant equal batches: 25*(0.99+0.99).
  const Tensor constant(4, 2, 1.25);
  CHECK(vicreg_family_loss_value(constant, constant, vic) == doctest::Approx(49.5));
}

TEST_CASE("family loss matches the explicit-loop transcription") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform(63);
    const std::size_t d = 1 + rng.uniform(32);
    const Tensor za = random_tensor(rng, n, d, 2.0);
    const Tensor zb = random_tensor(rng, n, d, 2.0);
    for (bool hsic : {false, true}) {
      LossParams p = default_params(hsic ? CovarianceMode::Hsic : CovarianceMode::VicReg);
      p.p = (trial % 4 == 0) ? 1.0 : (trial % 4 == 1 ? 1.5 : (trial % 4 == 2 ? 2.0 : 3.0));
      const double fast = vicreg_family_loss_value(za, zb, p);
      const double slow = testing::vicreg_family_loss_naive(za, zb, p.lambda, p.mu, p.nu,
                                                            p.gamma, p.epsilon, p.p, hsic);
      CHECK(std::abs(fast - slow) < 1e-10);
    }
  }
}

TEST_CASE("losses are invariant under identical row permutations") {
  Rng rng(23);
  const Tensor za = random_tensor(rng, 10, 6);
  const Tensor zb = random_tensor(rng, 10, 6);
  std::vector<std::size_t> perm = {3, 1, 4, 0, 9, 5, 8, 7, 2, 6};
  const Tensor pa = permuted_rows(za, perm);
  const Tensor pb = permuted_rows(zb, perm);

  LossParams p = default_params(CovarianceMode::Hsic);
  CHECK(vicreg_family_loss_value(za, zb, p) ==
        doctest::Approx(vicreg_family_loss_value(pa, pb, p)).epsilon(1e-12));
  CHECK(barlow_twins_loss_value(za, zb, 5e-3) ==
        doctest::Approx(barlow_twins_loss_value(pa, pb, 5e-3)).epsilon(1e-12));
  CHECK(nt_xent_loss_value(za, zb, 0.5) ==
        doctest::Approx(nt_xent_loss_value(pa, pb, 0.5)).epsilon(1e-12));
}

TEST_CASE("barlow twins hand cases") {
  Rng rng(31);
  const Tensor z = random_tensor(rng, 8, 4);

  // Identical views: R_ii = 1 exactly, so only the off-diagonal part remains.
  CHECK(barlow_twins_loss_value(z, z, 5e-3) >= 0.0);
  CHECK(barlow_twins_loss_value(z, z, 0.0) == doctest::Approx(0.0).epsilon(1e-10));

  // Opposite views: R_ii = -1, invariance part = 4d.
  const double flipped = barlow_twins_loss_value(z, Tensor([&] {
                                                   Tensor neg = z;
                                                   for (std::size_t k = 0; k < neg.size(); ++k)
                                                     neg[k] = -neg[k];
                                                   return neg;
                                                 }()),
                                                 0.0);
  CHECK(flipped == doctest::Approx(4.0 * 4.0).epsilon(1e-10));

  // A constant column is a degenerate batch.
  Tensor degenerate = z;
  for (std::size_t i = 0; i < degenerate.rows(); ++i) degenerate(i, 2) = 7.0;
  CHECK_THROWS_AS(barlow_twins_loss_value(degenerate, z, 5e-3), std::invalid_argument);
}

TEST_CASE("nt-xent against the enumeration oracle") {
  // n=2, orthonormal rows, equal views, tau = 0.5.
  const Tensor z = Tensor::from_rows({{1, 0}, {0, 1}});
  const double expected = -std::log(std::exp(2.0) / (std::exp(2.0) + 2.0 * std::exp(0.0)));
  CHECK(nt_xent_loss_value(z, z, 0.5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(testing::nt_xent_naive(z, z, 0.5) == doctest::Approx(expected).epsilon(1e-12));

  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.uniform(14);
    const Tensor za = random_tensor(rng, n, 5);
    const Tensor zb = random_tensor(rng, n, 5);
    CHECK(nt_xent_loss_value(za, zb, 0.5) ==
          doctest::Approx(testing::nt_xent_naive(za, zb, 0.5)).epsilon(1e-10));
  }
}

TEST_CASE("nt-xent is invariant to row scaling") {
  Rng rng(41);
  const Tensor za = random_tensor(rng, 6, 4);
  const Tensor zb = random_tensor(rng, 6, 4);
  Tensor scaled = za;
  for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(2, j) *= 37.5;
  CHECK(nt_xent_loss_value(za, zb, 0.5) ==
        doctest::Approx(nt_xent_loss_value(scaled, zb, 0.5)).epsilon(1e-12));
}

TEST_CASE("loss gradients pass finite-difference checks") {
  Rng rng(53);
  Tensor packed = random_tensor(rng, 16, 4);  // rows 0..7 = Za, 8..15 = Zb

  auto check_loss = [&](const std::function<Var(Tape&, Var, Var)>& build) {
    const double err = finite_difference_check(
        [&](Tape& t, Var x) {
          Var za = t.row_slice(x, 0, 8);
          Var zb = t.row_slice(x, 8, 16);
          return build(t, za, zb);
        },
        packed, 1e-6);
    CHECK(err <= 1e-5);
  };

  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    for (CovarianceMode mode : {CovarianceMode::VicReg, CovarianceMode::Hsic}) {
      LossParams lp = default_params(mode);
      lp.p = p;
      check_loss([lp](Tape& t, Var za, Var zb) { return vicreg_family_loss(t, za, zb, lp); });
    }
  }
  check_loss([](Tape& t, Var za, Var zb) { return barlow_twins_loss(t, za, zb, 5e-3); });
  check_loss([](Tape& t, Var za, Var zb) { return nt_xent_loss(t, za, zb, 0.5); });
}

TEST_CASE("loss selector names round-trip and hsic maps to the hybrid covariance") {
  for (LossKind k : {LossKind::VicReg, LossKind::VicRegHsic, LossKind::Hsic,
                     LossKind::BarlowTwins, LossKind::NtXent})
    CHECK(loss_kind_from_name(loss_kind_name(k)) == k);
  CHECK_THROWS_AS(loss_kind_from_name("nope"), std::invalid_argument);

  Tape t;
  Var za = t.leaf(kAnti);
  Var zb = t.leaf(kAnti);
  LossParams p;
  CHECK(t.value(build_loss(t, LossKind::VicReg, za, zb, p)).item() == doctest::Approx(8.0));
  CHECK(t.value(build_loss(t, LossKind::VicRegHsic, za, zb, p)).item() == doctest::Approx(18.0));
  CHECK(t.value(build_loss(t, LossKind::Hsic, za, zb, p)).item() == doctest::Approx(18.0));
}

TEST_CASE("loss params validation") {
  LossParams p;
  p.epsilon = 0.0;
  CHECK_THROWS_AS(p.check(), std::invalid_argument);
  p = LossParams{};
  p.p = 0.5;
  CHECK_THROWS_AS(p.check(), std::invalid_argument);
  p = LossParams{};
  p.temperature = 0.0;
  CHECK_THROWS_AS(p.check(), std::invalid_argument);
}

TEST_CASE("mismatched view shapes are rejected") {
  Rng rng(61);
  const Tensor a = random_tensor(rng, 4, 3);
  const Tensor b = random_tensor(rng, 5, 3);
  CHECK_THROWS_AS(invariance_term_value(a, b, 2.0), std::invalid_argument);
  LossParams p;
  CHECK_THROWS_AS(vicreg_family_loss_value(a, b, p), std::invalid_argument);
}
