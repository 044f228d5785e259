#include "prepost/gls.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace prepost {

namespace {

template <int P>
struct Unit {
  Eigen::Matrix<double, 2, P> x;
  Eigen::Vector2d y;
  int arm = 0;
};

template <int P>
Eigen::Matrix<double, 1, P> design_row(int arm, int time) {
  Eigen::Matrix<double, 1, P> row;
  if constexpr (P == 4) {
    row << 1.0, arm, time, arm * time;
  } else {
    row << 1.0, time, arm * time;
  }
  return row;
}

// Pairs the two long-format rows of each subject.
template <int P>
std::vector<Unit<P>> build_units(const TrialDataset& ds) {
  const auto rows = to_long_format(ds);
  std::vector<Unit<P>> units;
  units.reserve(ds.size());
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ds.size());
  for (const auto& r : rows) {
    auto [it, inserted] = index.try_emplace(r.subject_id, units.size());
    if (inserted) {
      units.emplace_back();
      units.back().arm = r.arm;
    }
    auto& u = units[it->second];
    u.x.row(r.time) = design_row<P>(r.arm, r.time);
    u.y(r.time) = r.y;
  }
  return units;
}

std::string describe(std::span<const Cov2x2> covs) {
  std::ostringstream out;
  for (std::size_t g = 0; g < covs.size(); ++g) {
    if (g) out << "; ";
    out << "[v00=" << covs[g].v00 << ", v01=" << covs[g].v01 << ", v11=" << covs[g].v11 << "]";
  }
  return out.str();
}

const Cov2x2& cov_for(std::span<const Cov2x2> covs, int arm) {
  return covs.size() == 2 ? covs[static_cast<std::size_t>(arm)] : covs[0];
}

template <int P>
struct GlsStep {
  Eigen::Matrix<double, P, 1> coef;
  Eigen::Matrix<double, P, P> cov;
};

// Relative determinant below which a covariance is treated as singular.
constexpr double kSingularTol = 1e-12;

enum class Shape { Regular, Singular };

// Singular matrices with a positive baseline variance are allowed: the
// follow-up is then an exact linear function of the baseline within arm.
Shape classify(const Cov2x2& c, std::span<const Cov2x2> all) {
  if (c.v00 > 0.0 && c.v11 >= 0.0) {
    const double det = c.determinant();
    const double scale = c.v00 * std::max(c.v11, c.v01 * c.v01 / c.v00);
    if (det > kSingularTol * scale) return Shape::Regular;
    if (det >= -kSingularTol * scale) return Shape::Singular;
  }
  throw NumericError("GLS: covariance not positive semidefinite " + describe(all));
}

template <int P>
GlsStep<P> gls_step_regular(const std::vector<Unit<P>>& units, std::span<const Cov2x2> covs) {
  std::array<Eigen::Matrix2d, 2> inv;
  for (int arm = 0; arm < 2; ++arm) inv[static_cast<std::size_t>(arm)] = cov_for(covs, arm).matrix().inverse();
  Eigen::Matrix<double, P, P> a = Eigen::Matrix<double, P, P>::Zero();
  Eigen::Matrix<double, P, 1> b = Eigen::Matrix<double, P, 1>::Zero();
  for (const auto& u : units) {
    const Eigen::Matrix<double, P, 2> xt_vinv = u.x.transpose() * inv[static_cast<std::size_t>(u.arm)];
    a.noalias() += xt_vinv * u.x;
    b.noalias() += xt_vinv * u.y;
  }
  Eigen::LLT<Eigen::Matrix<double, P, P>> llt(a);
  if (llt.info() != Eigen::Success) throw NumericError("GLS: fixed effects not estimable (singular information)");
  GlsStep<P> step;
  step.coef = llt.solve(b);
  step.cov = llt.solve(Eigen::Matrix<double, P, P>::Identity());
  return step;
}

// Limit of GLS as one or both arm covariances become singular. Within a
// singular arm y_post - b*y_pre carries no noise, so those equations act as
// exact constraints; the remaining whitened equations are fitted in the
// constraints' null space.
template <int P>
GlsStep<P> gls_step_singular(const std::vector<Unit<P>>& units, std::span<const Cov2x2> covs,
                             const std::array<Shape, 2>& shape) {
  Eigen::Index n_hard = 0;
  for (const auto& u : units) n_hard += shape[static_cast<std::size_t>(u.arm)] == Shape::Singular ? 1 : 0;
  const auto n_soft = static_cast<Eigen::Index>(2 * units.size()) - n_hard;
  Matrix hard(n_hard, P), soft(n_soft, P);
  Vector hard_y(n_hard), soft_y(n_soft);
  Eigen::Index ih = 0, is = 0;
  for (const auto& u : units) {
    const Cov2x2& c = cov_for(covs, u.arm);
    if (shape[static_cast<std::size_t>(u.arm)] == Shape::Singular) {
      const double slope = c.v01 / c.v00;
      const double sd = std::sqrt(c.v00);
      hard.row(ih) = u.x.row(1) - slope * u.x.row(0);
      hard_y(ih++) = u.y(1) - slope * u.y(0);
      soft.row(is) = u.x.row(0) / sd;
      soft_y(is++) = u.y(0) / sd;
    } else {
      const auto l = cholesky2(c);
      const Eigen::Matrix<double, 1, P> x0 = u.x.row(0) / l.l00;
      const double y0 = u.y(0) / l.l00;
      soft.row(is) = x0;
      soft_y(is++) = y0;
      soft.row(is) = (u.x.row(1) - l.l10 * x0) / l.l11;
      soft_y(is++) = (u.y(1) - l.l10 * y0) / l.l11;
    }
  }
  Eigen::JacobiSVD<Matrix> svd(hard, Eigen::ComputeThinU | Eigen::ComputeFullV);
  svd.setThreshold(1e-10);
  const Eigen::Index rank = svd.rank();
  const Vector base = svd.solve(hard_y);
  GlsStep<P> step;
  if (rank == P) {
    step.coef = base;
    step.cov.setZero();
    return step;
  }
  const Matrix null = svd.matrixV().rightCols(P - rank);
  const Matrix m = soft * null;
  Eigen::LLT<Matrix> llt(m.transpose() * m);
  if (llt.info() != Eigen::Success) throw NumericError("GLS: fixed effects not estimable (singular information)");
  const Vector z = llt.solve(m.transpose() * (soft_y - soft * base));
  step.coef = base + null * z;
  step.cov = null * llt.solve(Matrix::Identity(P - rank, P - rank)) * null.transpose();
  return step;
}

template <int P>
GlsStep<P> gls_step(const std::vector<Unit<P>>& units, std::span<const Cov2x2> covs) {
  const std::array<Shape, 2> shape{classify(cov_for(covs, 0), covs), classify(cov_for(covs, 1), covs)};
  if (shape[0] == Shape::Regular && shape[1] == Shape::Regular) return gls_step_regular<P>(units, covs);
  return gls_step_singular<P>(units, covs, shape);
}

template <int P>
GlsFit to_fit(const GlsStep<P>& step, GlsCovEstimate estimate) {
  GlsFit fit;
  fit.coefficients = step.coef;
  fit.covariance = step.cov;
  fit.covariance_estimate = std::move(estimate);
  return fit;
}

// Starting covariance: sample covariance of (pre, post) about arm means,
// pooled (divisor N - 2) or per arm (divisor n_j - 1).
std::vector<Cov2x2> initial_covariance(const TrialDataset& ds, CovarianceGrouping grouping) {
  const auto st = sufficient_stats(ds);
  auto arm_cov = [&](std::size_t j) {
    const auto& a = st.arms[j];
    const double d = static_cast<double>(a.n) - 1.0;
    return Cov2x2{a.ss_pre / d, a.sp_cross / d, a.ss_post / d};
  };
  if (grouping == CovarianceGrouping::Grouped) return {arm_cov(0), arm_cov(1)};
  const double d = static_cast<double>(ds.size()) - 2.0;
  const auto& a0 = st.arms[0];
  const auto& a1 = st.arms[1];
  return {Cov2x2{(a0.ss_pre + a1.ss_pre) / d, (a0.sp_cross + a1.sp_cross) / d, (a0.ss_post + a1.ss_post) / d}};
}

template <int P>
GlsFit reml_impl(const TrialDataset& ds, CovarianceGrouping grouping, const RemlOptions& opts) {
  const auto units = build_units<P>(ds);
  std::vector<Cov2x2> covs = initial_covariance(ds, grouping);
  if (std::all_of(covs.begin(), covs.end(), [](const Cov2x2& c) { return c.v00 == 0.0 && c.v01 == 0.0 && c.v11 == 0.0; })) {
    // No within-arm variation at all. If the mean structure reproduces the
    // data exactly the fit is exact with zero covariance and zero SEs.
    const std::vector<Cov2x2> identity(covs.size(), Cov2x2{1.0, 0.0, 1.0});
    auto step = gls_step<P>(units, identity);
    double worst = 0.0;
    double scale = 1.0;
    for (const auto& u : units) {
      worst = std::max(worst, (u.y - u.x * step.coef).cwiseAbs().maxCoeff());
      scale = std::max(scale, u.y.cwiseAbs().maxCoeff());
    }
    if (worst <= 1e-12 * scale) {
      step.cov.setZero();
      return to_fit<P>(step, GlsCovEstimate{covs, 0, true});
    }
  }
  for (const auto& c : covs) classify(c, covs);
  const std::size_t groups = covs.size();

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const auto step = gls_step<P>(units, covs);
    std::array<Eigen::Matrix2d, 2> acc{Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
    std::array<double, 2> count{0.0, 0.0};
    for (const auto& u : units) {
      const std::size_t g = groups == 2 ? static_cast<std::size_t>(u.arm) : 0;
      const Eigen::Vector2d r = u.y - u.x * step.coef;
      acc[g].noalias() += r * r.transpose();
      acc[g].noalias() += u.x * step.cov * u.x.transpose();
      count[g] += 1.0;
    }
    std::vector<Cov2x2> next(groups);
    double change = 0.0;
    double scale = 1.0;
    for (std::size_t g = 0; g < groups; ++g) {
      next[g] = Cov2x2::from_matrix(acc[g] / count[g]);
      change = std::max({change, std::abs(next[g].v00 - covs[g].v00), std::abs(next[g].v01 - covs[g].v01),
                         std::abs(next[g].v11 - covs[g].v11)});
      scale = std::max({scale, std::abs(next[g].v00), std::abs(next[g].v01), std::abs(next[g].v11)});
    }
    for (const auto& c : next) classify(c, next);
    covs = std::move(next);
    if (change < opts.tolerance * scale) {
      GlsCovEstimate est{covs, iter, true};
      return to_fit<P>(gls_step<P>(units, covs), std::move(est));
    }
  }
  throw NumericError("REML did not converge after " + std::to_string(opts.max_iterations) +
                     " iterations; last covariance " + describe(covs));
}

}  // namespace

GlsFit gls_fixed(const TrialDataset& ds, MeanStructure mean, std::span<const Cov2x2> arm_cov) {
  if (arm_cov.size() != 1 && arm_cov.size() != 2) {
    throw std::invalid_argument("gls_fixed: expected one pooled or two per-arm covariances");
  }
  GlsCovEstimate est{std::vector<Cov2x2>(arm_cov.begin(), arm_cov.end()), 0, true};
  if (mean == MeanStructure::Unconstrained) {
    return to_fit<4>(gls_step<4>(build_units<4>(ds), arm_cov), std::move(est));
  }
  return to_fit<3>(gls_step<3>(build_units<3>(ds), arm_cov), std::move(est));
}

GlsFit gls_reml(const TrialDataset& ds, MeanStructure mean, CovarianceGrouping grouping, const RemlOptions& opts) {
  if (mean == MeanStructure::Unconstrained) return reml_impl<4>(ds, grouping, opts);
  return reml_impl<3>(ds, grouping, opts);
}

}  // namespace prepost
