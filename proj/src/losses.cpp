#include "graphssl/losses.hpp"

#include <stdexcept>

namespace graphssl {

namespace {

void check_pair(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(op) + ": view shapes differ");
  if (a.rows() < 1) throw std::invalid_argument(std::string(op) + ": empty batch");
}

Tensor offdiag_mask(std::size_t d) {
  Tensor m(d, d, 1.0);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 0.0;
  return m;
}

}  // namespace

void LossParams::check() const {
  if (epsilon <= 0.0) throw std::invalid_argument("LossParams: epsilon must be > 0");
  if (gamma <= 0.0) throw std::invalid_argument("LossParams: gamma must be > 0");
  if (temperature <= 0.0) throw std::invalid_argument("LossParams: temperature must be > 0");
  if (p < 1.0) throw std::invalid_argument("LossParams: p must be >= 1");
}

Var invariance_term(Tape& tape, Var za, Var zb, double p) {
  check_pair(tape.value(za), tape.value(zb), "invariance_term");
  Var diff = tape.subtract(za, zb);
  Var per_row = tape.pnorm_sq_rows(diff, p);
  return tape.mean(per_row);
}

Var variance_term(Tape& tape, Var z, double gamma, double epsilon) {
  if (tape.value(z).rows() < 2)
    throw std::invalid_argument("variance_term: batch must have n >= 2");
  Var var = tape.var_axis0(z);
  Var std = tape.sqrt(tape.add_scalar(var, epsilon));
  Var hinge = tape.relu(tape.add_scalar(tape.scalar_mul(std, -1.0), gamma));
  return tape.mean(hinge);
}

Var covariance_matrix(Tape& tape, Var z) {
  const std::size_t n = tape.value(z).rows();
  if (n < 2) throw std::invalid_argument("covariance_matrix: batch must have n >= 2");
  Var centered = tape.subtract(z, tape.mean_axis0(z));
  Var prod = tape.matmul(tape.transpose(centered), centered);
  return tape.scalar_mul(prod, 1.0 / static_cast<double>(n - 1));
}

Var covariance_term(Tape& tape, Var z, CovarianceMode mode) {
  const std::size_t d = tape.value(z).cols();
  Var cov = covariance_matrix(tape, z);
  Var mask = tape.leaf(offdiag_mask(d), false);
  Var off;
  if (mode == CovarianceMode::Hsic) {
    Var shifted = tape.add_scalar(cov, 1.0);  // (1 + C_ij), diagonal discarded by the mask
    off = tape.multiply(shifted, mask);
  } else {
    off = tape.multiply(cov, mask);
  }
  Var sq = tape.pow(off, 2.0);
  return tape.scalar_mul(tape.sum(sq), 1.0 / static_cast<double>(d));
}

Var vicreg_family_loss(Tape& tape, Var za, Var zb, const LossParams& params) {
  params.check();
  check_pair(tape.value(za), tape.value(zb), "vicreg_family_loss");
  Var s = invariance_term(tape, za, zb, params.p);
  Var v = tape.add(variance_term(tape, za, params.gamma, params.epsilon),
                   variance_term(tape, zb, params.gamma, params.epsilon));
  Var c = tape.add(covariance_term(tape, za, params.covariance_mode),
                   covariance_term(tape, zb, params.covariance_mode));
  Var weighted = tape.add(tape.scalar_mul(s, params.lambda), tape.scalar_mul(v, params.mu));
  return tape.add(weighted, tape.scalar_mul(c, params.nu));
}

Var barlow_twins_loss(Tape& tape, Var za, Var zb, double lambda_bt) {
  const Tensor& Za = tape.value(za);
  const Tensor& Zb = tape.value(zb);
  check_pair(Za, Zb, "barlow_twins_loss");
  const std::size_t n = Za.rows(), d = Za.cols();
  if (n < 2) throw std::invalid_argument("barlow_twins_loss: batch must have n >= 2");

  auto standardize = [&](Var z) {
    Var var = tape.var_axis0(z);
    const Tensor& v = tape.value(var);
    for (std::size_t j = 0; j < v.cols(); ++j)
      if (v(0, j) == 0.0)
        throw std::invalid_argument("barlow_twins_loss: degenerate batch, column " +
                                    std::to_string(j) + " has zero variance");
    Var centered = tape.subtract(z, tape.mean_axis0(z));
    Var inv_std = tape.pow(tape.sqrt(var), -1.0);
    return tape.multiply(centered, inv_std);
  };
  Var sa = standardize(za);
  Var sb = standardize(zb);
  Var corr = tape.scalar_mul(tape.matmul(tape.transpose(sa), sb),
                             1.0 / static_cast<double>(n - 1));

  Var ident = tape.leaf(Tensor::identity(d), false);
  Var diag_residual = tape.multiply(tape.subtract(ident, corr), ident);  // (1 - R_ii) on diagonal
  Var invariance = tape.sum(tape.pow(diag_residual, 2.0));
  Var off = tape.multiply(corr, tape.leaf(offdiag_mask(d), false));
  Var redundancy = tape.scalar_mul(tape.sum(tape.pow(off, 2.0)), lambda_bt);
  return tape.add(invariance, redundancy);
}

Var nt_xent_loss(Tape& tape, Var za, Var zb, double temperature) {
  const Tensor& Za = tape.value(za);
  check_pair(Za, tape.value(zb), "nt_xent_loss");
  const std::size_t n = Za.rows();
  if (n < 2) throw std::invalid_argument("nt_xent_loss: batch must have n >= 2");
  if (temperature <= 0.0) throw std::invalid_argument("nt_xent_loss: temperature must be > 0");

  Var all = tape.concat_rows(tape.l2_row_normalize(za), tape.l2_row_normalize(zb));
  Var sims = tape.scalar_mul(tape.matmul(all, tape.transpose(all)), 1.0 / temperature);

  const std::size_t m = 2 * n;
  Tensor self_mask(m, m);  // large negative on the diagonal removes self-pairs
  for (std::size_t i = 0; i < m; ++i) self_mask(i, i) = -1e9;
  Var masked = tape.add(sims, tape.leaf(self_mask, false));
  Var logp = tape.log_softmax_rows(masked);

  Tensor positives(m, m);  // anchor i pairs with i+n (mod 2n)
  for (std::size_t i = 0; i < n; ++i) {
    positives(i, n + i) = 1.0;
    positives(n + i, i) = 1.0;
  }
  Var picked = tape.multiply(logp, tape.leaf(positives, false));
  return tape.scalar_mul(tape.sum(picked), -1.0 / static_cast<double>(m));
}

// --- value-only wrappers -----------------------------------------------------

double invariance_term_value(const Tensor& za, const Tensor& zb, double p) {
  Tape t;
  return t.value(invariance_term(t, t.leaf(za), t.leaf(zb), p)).item();
}

double variance_term_value(const Tensor& z, double gamma, double epsilon) {
  Tape t;
  return t.value(variance_term(t, t.leaf(z), gamma, epsilon)).item();
}

Tensor covariance_matrix_value(const Tensor& z) {
  Tape t;
  return t.value(covariance_matrix(t, t.leaf(z)));
}

double covariance_term_value(const Tensor& z, CovarianceMode mode) {
  Tape t;
  return t.value(covariance_term(t, t.leaf(z), mode)).item();
}

double vicreg_family_loss_value(const Tensor& za, const Tensor& zb, const LossParams& params) {
  Tape t;
  return t.value(vicreg_family_loss(t, t.leaf(za), t.leaf(zb), params)).item();
}

double barlow_twins_loss_value(const Tensor& za, const Tensor& zb, double lambda_bt) {
  Tape t;
  return t.value(barlow_twins_loss(t, t.leaf(za), t.leaf(zb), lambda_bt)).item();
}

double nt_xent_loss_value(const Tensor& za, const Tensor& zb, double temperature) {
  Tape t;
  return t.value(nt_xent_loss(t, t.leaf(za), t.leaf(zb), temperature)).item();
}

// --- selector ----------------------------------------------------------------

Var build_loss(Tape& tape, LossKind kind, Var za, Var zb, const LossParams& params) {
  LossParams p = params;
  switch (kind) {
    case LossKind::VicReg:
      p.covariance_mode = CovarianceMode::VicReg;
      return vicreg_family_loss(tape, za, zb, p);
    case LossKind::VicRegHsic:
    case LossKind::Hsic:
      p.covariance_mode = CovarianceMode::Hsic;
      return vicreg_family_loss(tape, za, zb, p);
    case LossKind::BarlowTwins:
      return barlow_twins_loss(tape, za, zb, params.lambda_bt);
    case LossKind::NtXent:
      return nt_xent_loss(tape, za, zb, params.temperature);
  }
  throw std::logic_error("build_loss: unknown loss kind");
}

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::VicReg:
      return "vicreg";
    case LossKind::VicRegHsic:
      return "vicreghsic";
    case LossKind::Hsic:
      return "hsic";
    case LossKind::BarlowTwins:
      return "bt";
    case LossKind::NtXent:
      return "ntxent";
  }
  throw std::logic_error("loss_kind_name: unknown loss kind");
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "vicreg") return LossKind::VicReg;
  if (name == "vicreghsic") return LossKind::VicRegHsic;
  if (name == "hsic") return LossKind::Hsic;
  if (name == "bt" || name == "barlowtwins" || name == "barlow-twins")
    return LossKind::BarlowTwins;
  if (name == "ntxent" || name == "nt-xent") return LossKind::NtXent;
  throw std::invalid_argument("unknown loss: " + name);
}

}  // namespace graphssl
