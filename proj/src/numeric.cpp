#include "prepost/numeric.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace prepost {

OlsFit ols_fit(const Matrix& design, const Vector& outcome) {
  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (outcome.size() != n) throw std::invalid_argument("ols_fit: outcome length does not match design rows");
  if (n <= k) {
    throw NumericError("ols_fit: need more observations (" + std::to_string(n) +
                       ") than design columns (" + std::to_string(k) + ")");
  }

  const double max_norm = design.colwise().norm().maxCoeff();
  const double tol = 1e-10 * max_norm;
  Eigen::HouseholderQR<Matrix> qr(design);
  const Matrix& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(std::abs(packed(j, j)) > tol)) {
      throw NumericError("ols_fit: design is rank deficient; column " + std::to_string(j) +
                         " is linearly dependent on the preceding columns");
    }
  }

  OlsFit fit;
  fit.design = design;
  fit.n = n;
  fit.k = k;
  const auto r = packed.topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Vector qty = (qr.householderQ().transpose() * outcome).head(k);
  fit.coefficients = r.solve(qty);
  fit.fitted = design * fit.coefficients;
  fit.residuals = outcome - fit.fitted;

  const Matrix r_inv = r.solve(Matrix::Identity(k, k));
  fit.xtx_inv = r_inv * r_inv.transpose();
  const Matrix thin_q = qr.householderQ() * Matrix::Identity(n, k);
  fit.leverage = thin_q.rowwise().squaredNorm();
  fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - k);
  return fit;
}

std::string_view hc_kind_name(HcKind kind) {
  switch (kind) {
    case HcKind::HC0: return "hc0";
    case HcKind::HC1: return "hc1";
    case HcKind::HC2: return "hc2";
    case HcKind::HC3: return "hc3";
  }
  return "hc2";
}

HcKind parse_hc_kind(std::string_view name) {
  if (name == "hc0") return HcKind::HC0;
  if (name == "hc1") return HcKind::HC1;
  if (name == "hc2") return HcKind::HC2;
  if (name == "hc3") return HcKind::HC3;
  throw std::invalid_argument("unknown HC kind '" + std::string(name) + "' (expected hc0|hc1|hc2|hc3)");
}

Matrix hc_covariance(const OlsFit& fit, HcKind kind) {
  Vector omega = fit.residuals.array().square();
  switch (kind) {
    case HcKind::HC0:
      break;
    case HcKind::HC1:
      omega *= static_cast<double>(fit.n) / static_cast<double>(fit.n - fit.k);
      break;
    case HcKind::HC2:
    case HcKind::HC3:
      for (Eigen::Index i = 0; i < fit.n; ++i) {
        const double one_minus_h = 1.0 - fit.leverage(i);
        if (one_minus_h <= 1e-12) {
          throw NumericError("hc_covariance: observation " + std::to_string(i) +
                             " has leverage 1; " + std::string(hc_kind_name(kind)) + " undefined");
        }
        omega(i) /= (kind == HcKind::HC2) ? one_minus_h : one_minus_h * one_minus_h;
      }
      break;
  }
  const Matrix bread = fit.design * fit.xtx_inv;  // n x k
  return bread.transpose() * omega.asDiagonal() * bread;
}

Lower2x2 cholesky2(const Cov2x2& c) {
  const double det = c.determinant();
  if (!(c.v00 > 0.0) || !(det > 0.0)) {
    std::ostringstream msg;
    msg << "cholesky2: covariance not positive definite (v00=" << c.v00 << ", determinant=" << det << ")";
    throw NumericError(msg.str());
  }
  Lower2x2 l;
  l.l00 = std::sqrt(c.v00);
  l.l10 = c.v01 / l.l00;
  l.l11 = std::sqrt(det / c.v00);
  return l;
}

}  // namespace prepost
