#pragma once

#include <span>

#include "prepost/estimators.hpp"
#include "prepost/numeric.hpp"
#include "prepost/trial_data.hpp"

namespace prepost {

/// Fixed effects of the joint (baseline, follow-up) mean model.
enum class MeanStructure {
  Unconstrained,   // {1, G, T, G*T}: arm-specific baselines
  CommonBaseline,  // {1, T, G*T}: one baseline mean for both arms
};

struct RemlOptions {
  int max_iterations = 100;
  // Stop when max |entry change| < tolerance * max(1, max |entry|).
  double tolerance = 1e-8;
};

struct GlsFit {
  Vector coefficients;       // the treatment effect is the last entry
  Matrix covariance;         // (sum X' Sigma^-1 X)^-1
  GlsCovEstimate covariance_estimate;
};

/// GLS fixed effects for known per-arm covariances (`arm_cov` holds one
/// pooled matrix or one per arm). A singular matrix with positive baseline
/// variance is handled as the limit of GLS, the within-arm follow-up then
/// being exact given the baseline. Throws NumericError for anything else
/// that is not positive semidefinite.
GlsFit gls_fixed(const TrialDataset& ds, MeanStructure mean, std::span<const Cov2x2> arm_cov);

/// REML fit. Each iteration solves GLS at the current covariance, then sets
/// Sigma_g = (1/n_g) sum_{i in g} (r_i r_i' + X_i C X_i'), C the fixed-effect
/// covariance. That update is the stationarity condition of the restricted
/// likelihood for an unstructured 2x2 covariance.
GlsFit gls_reml(const TrialDataset& ds, MeanStructure mean, CovarianceGrouping grouping,
                const RemlOptions& opts = {});

}  // namespace prepost
