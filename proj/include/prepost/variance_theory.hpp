#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "prepost/estimators.hpp"
#include "prepost/numeric.hpp"
#include "prepost/trial_data.hpp"

namespace prepost {

/// Raised when a variance formula is requested for the wrong population family.
class ModeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One follow-up SD and pre-post correlation shared by both arms.
struct HomogeneousStructure {
  double sigma_post = 1.0;
  double rho = 0.0;
};

/// Arm-specific follow-up SDs and correlations; baseline SD is common.
struct HeterogeneousStructure {
  double sigma_post_control = 1.0;
  double sigma_post_treatment = 1.0;
  double rho_control = 0.0;
  double rho_treatment = 0.0;
};

struct PopulationParams {
  double mu_pre = 0.0;
  double mu_post_control = 0.0;
  double mu_post_treatment = 0.0;
  double sigma_pre = 1.0;
  std::variant<HomogeneousStructure, HeterogeneousStructure> structure;

  bool homogeneous() const { return std::holds_alternative<HomogeneousStructure>(structure); }
  double tau() const { return mu_post_treatment - mu_post_control; }

  double sigma_post(int arm) const;
  double rho(int arm) const;
  double mu_post(int arm) const { return arm == 0 ? mu_post_control : mu_post_treatment; }
  Cov2x2 arm_covariance(int arm) const;
  /// (1 - rho_j^2) sigma_j1^2: follow-up variance left after regressing on baseline within arm j.
  double residual_variance(int arm) const;
  /// Difference between the arms' population baseline slopes.
  double interaction_slope() const;

  /// Throws std::invalid_argument unless every sigma > 0 and |rho| < 1.
  void validate() const;
};

struct DesignSize {
  std::size_t n0 = 2;
  std::size_t n1 = 2;

  double inverse_sum() const { return 1.0 / static_cast<double>(n0) + 1.0 / static_cast<double>(n1); }
  double total() const { return static_cast<double>(n0 + n1); }
  double p0() const { return static_cast<double>(n0) / total(); }
  double p1() const { return static_cast<double>(n1) / total(); }
};

/// Exact unconditional variance of each estimator.
/// Homogeneous family: AnovaPost, AncovaMain, AnovaChange, Rm, CrmPooled.
/// Heterogeneous family: AncovaMain, AncovaInteraction, CrmGrouped.
/// Throws ModeMismatch for any other pairing.
double true_unconditional_variance(MethodId method, const PopulationParams& p, const DesignSize& d);

/// Variance of the ANCOVA estimators conditional on the observed baselines in
/// `stats`, with residual variances taken from `p`. Throws NumericError when
/// a within-arm baseline sum of squares is zero.
double conditional_variance_ancova(const SufficientStats& stats, const PopulationParams& p, MethodId method);

/// var(a) - var(b) for homogeneous params.
double efficiency_gap(MethodId a, MethodId b, const PopulationParams& p, const DesignSize& d);

struct TheoryRow {
  MethodId method = MethodId::AnovaPost;
  double variance = 0.0;
};

struct TheoryGap {
  MethodId larger = MethodId::AnovaPost;
  MethodId smaller = MethodId::AncovaMain;
  double gap = 0.0;  // var(larger) - var(smaller)
};

/// Oracle variances for every method with a formula in the family of `p`,
/// plus the pairwise gaps the efficiency comparison turns on.
struct TheoryTable {
  std::string label;
  PopulationParams params;
  DesignSize design;
  std::vector<TheoryRow> rows;
  std::vector<TheoryGap> gaps;
};

TheoryTable theory_table(const PopulationParams& p, const DesignSize& d, std::string label = {});

}  // namespace prepost
