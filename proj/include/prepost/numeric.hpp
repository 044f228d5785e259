#pragma once

#include <stdexcept>
#include <string_view>

#include <Eigen/Dense>

namespace prepost {

/// Raised when a numerical precondition fails (rank deficiency, non-PD
/// covariance, non-convergence).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct OlsFit {
  Matrix design;         // n x k
  Vector coefficients;   // k
  Vector fitted;         // n
  Vector residuals;      // n
  Matrix xtx_inv;        // (X'X)^-1, k x k
  Vector leverage;       // diag of the hat matrix
  double sigma2 = 0.0;   // SSE / (n - k)
  Eigen::Index n = 0;
  Eigen::Index k = 0;

  /// sigma2 * (X'X)^-1
  Matrix model_covariance() const { return sigma2 * xtx_inv; }
};

/// Least squares via Householder QR. Throws NumericError naming the first
/// column whose component orthogonal to the preceding columns is below
/// 1e-10 times the largest column norm.
OlsFit ols_fit(const Matrix& design, const Vector& outcome);

enum class HcKind { HC0, HC1, HC2, HC3 };

std::string_view hc_kind_name(HcKind kind);
HcKind parse_hc_kind(std::string_view name);  // throws std::invalid_argument

/// Sandwich (X'X)^-1 X' diag(w) X (X'X)^-1 with the usual HC weights.
/// HC2/HC3 throw NumericError when some leverage equals one.
Matrix hc_covariance(const OlsFit& fit, HcKind kind);

/// Symmetric 2x2 covariance of (baseline, follow-up).
struct Cov2x2 {
  double v00 = 0.0;
  double v01 = 0.0;
  double v11 = 0.0;

  double determinant() const { return v00 * v11 - v01 * v01; }
  bool positive_definite() const { return v00 > 0.0 && v11 > 0.0 && determinant() > 0.0; }
  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << v00, v01, v01, v11;
    return m;
  }
  static Cov2x2 from_matrix(const Eigen::Matrix2d& m) {
    return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
  }
};

struct Lower2x2 {
  double l00 = 0.0;
  double l10 = 0.0;
  double l11 = 0.0;
};

/// L with L L' = c. Throws NumericError (reporting the determinant) unless c is PD.
Lower2x2 cholesky2(const Cov2x2& c);

/// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T_df| >= |t|).
double student_t_two_sided_p(double t, double df);

/// c such that P(|T_df| >= c) = alpha.
double student_t_critical(double alpha, double df);

}  // namespace prepost
