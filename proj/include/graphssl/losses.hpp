#pragma once

#include <string>

#include "graphssl/tape.hpp"

namespace graphssl {

enum class CovarianceMode { VicReg, Hsic };

// Every hyperparameter of the variance/invariance/covariance family plus the
// comparator losses.
struct LossParams {
  double lambda = 25.0;       // invariance weight
  double mu = 25.0;           // variance weight
  double nu = 1.0;            // covariance weight
  double gamma = 1.0;         // target standard deviation
  double epsilon = 1e-4;      // variance stabilizer
  double p = 2.0;             // invariance norm exponent, >= 1
  CovarianceMode covariance_mode = CovarianceMode::VicReg;
  double temperature = 0.5;   // NT-Xent
  double lambda_bt = 5e-3;    // Barlow Twins off-diagonal weight

  void check() const;
};

// (1/n) sum_i ||za_i - zb_i||_p^2.
Var invariance_term(Tape& tape, Var za, Var zb, double p);

// (1/d) sum_j max(0, gamma - sqrt(Var(col_j) + epsilon)), unbiased variance.
Var variance_term(Tape& tape, Var z, double gamma, double epsilon);

// Centered covariance (1/(n-1)) Zc^T Zc, d x d.
Var covariance_matrix(Tape& tape, Var z);

// VicReg mode: (1/d) sum_{i!=j} C_ij^2. Hsic mode: (1/d) sum_{i!=j} (1+C_ij)^2.
Var covariance_term(Tape& tape, Var z, CovarianceMode mode);

// lambda*s(Za,Zb) + mu*[v(Za)+v(Zb)] + nu*[c(Za)+c(Zb)].
Var vicreg_family_loss(Tape& tape, Var za, Var zb, const LossParams& params);

// Cross-correlation of column-standardized views; (1-R_ii)^2 on the diagonal
// plus lambda_bt * R_ij^2 off it. Columns must have nonzero variance.
Var barlow_twins_loss(Tape& tape, Var za, Var zb, double lambda_bt);

// Normalized-temperature cross entropy with in-batch negatives, averaged over
// all 2n anchors.
Var nt_xent_loss(Tape& tape, Var za, Var zb, double temperature);

// Value-only conveniences (build a private tape).
double invariance_term_value(const Tensor& za, const Tensor& zb, double p);
double variance_term_value(const Tensor& z, double gamma, double epsilon);
Tensor covariance_matrix_value(const Tensor& z);
double covariance_term_value(const Tensor& z, CovarianceMode mode);
double vicreg_family_loss_value(const Tensor& za, const Tensor& zb, const LossParams& params);
double barlow_twins_loss_value(const Tensor& za, const Tensor& zb, double lambda_bt);
double nt_xent_loss_value(const Tensor& za, const Tensor& zb, double temperature);

// Loss selector shared by the trainer and CLI.
enum class LossKind { VicReg, VicRegHsic, Hsic, BarlowTwins, NtXent };

Var build_loss(Tape& tape, LossKind kind, Var za, Var zb, const LossParams& params);
std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

}  // namespace graphssl
