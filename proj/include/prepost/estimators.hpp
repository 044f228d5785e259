#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "prepost/numeric.hpp"
#include "prepost/trial_data.hpp"

namespace prepost {

enum class MethodId {
  AnovaPost,          // y_post ~ G
  AncovaMain,         // y_post ~ G + y_pre ("ANCOVA I")
  AncovaInteraction,  // y_post ~ G * centered y_pre ("ANCOVA II")
  AnovaChange,        // (y_post - y_pre) ~ G
  Rm,                 // repeated measures GLS, {1, G, T, G*T}
  CrmPooled,          // constrained RM, {1, T, G*T}, one covariance
  CrmGrouped,         // constrained RM, arm-specific covariances
};

inline constexpr std::array<MethodId, 7> kAllMethods = {
    MethodId::AnovaPost, MethodId::AncovaMain, MethodId::AncovaInteraction, MethodId::AnovaChange,
    MethodId::Rm,        MethodId::CrmPooled,  MethodId::CrmGrouped};

/// CLI spelling: anova-post, ancova-main, ancova-interaction, anova-change, rm, crm, crm-grouped.
std::string_view method_name(MethodId m);
std::optional<MethodId> parse_method_name(std::string_view name);
/// Conventional labels (ANOVA, ANCOVA I, ...), for human-readable tables.
std::string_view method_label(MethodId m);

enum class SeKind { Model, Hc, AdjustedHc, Bootstrap };
std::string_view se_kind_name(SeKind k);
std::optional<SeKind> parse_se_kind(std::string_view name);

/// Which covariance structure the analyst assumes. Drives the default
/// inference SE for the ANCOVA models and what "all methods" means.
enum class Population { Unspecified, Homogeneous, Heterogeneous };
std::string_view population_name(Population p);
std::optional<Population> parse_population(std::string_view name);

/// Methods relevant to the assumed population (all seven when unspecified).
std::vector<MethodId> methods_for(Population p);

/// Model-based everywhere except the ANCOVA fits under a heterogeneous
/// population: HC for the main-effect model, adjusted HC for the interaction model.
SeKind default_inference_se(MethodId m, Population p);

struct GlsCovEstimate {
  std::vector<Cov2x2> arms;  // one entry (pooled) or two (control, treatment)
  int iterations = 0;
  bool converged = false;

  bool grouped() const { return arms.size() == 2; }
  const Cov2x2& for_arm(int arm) const { return grouped() ? arms.at(static_cast<std::size_t>(arm)) : arms.at(0); }
};

struct AnalysisResult {
  MethodId method = MethodId::AnovaPost;
  double estimate = 0.0;
  double se_model = 0.0;
  std::optional<double> se_hc;
  std::optional<double> se_adjusted_hc;
  std::optional<double> se_bootstrap;
  SeKind se_used = SeKind::Model;
  double df = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  std::array<double, 2> ci95{0.0, 0.0};

  std::optional<double> slope_baseline;     // beta_2 (control-arm slope for the interaction model)
  std::optional<double> slope_interaction;  // beta_3
  std::optional<GlsCovEstimate> covariance;

  std::optional<double> se(SeKind kind) const;

  /// Recomputes t, p and the 95% interval from the chosen SE. Throws
  /// std::invalid_argument if that SE was not computed.
  void set_inference(SeKind kind);
};

struct FitOptions {
  HcKind hc = HcKind::HC2;
  Population population = Population::Unspecified;
};

AnalysisResult anova_post(const TrialDataset& ds, const FitOptions& opts = {});
AnalysisResult anova_change(const TrialDataset& ds, const FitOptions& opts = {});
AnalysisResult ancova_main(const TrialDataset& ds, const FitOptions& opts = {});
AnalysisResult ancova_interaction(const TrialDataset& ds, const FitOptions& opts = {});
AnalysisResult rm_fit(const TrialDataset& ds, const FitOptions& opts = {});

enum class CovarianceGrouping { Pooled, Grouped };
AnalysisResult crm_fit(const TrialDataset& ds, CovarianceGrouping grouping, const FitOptions& opts = {});

AnalysisResult fit_method(MethodId m, const TrialDataset& ds, const FitOptions& opts = {});

/// Per-arm OLS residuals of an ANCOVA fit (AncovaMain or AncovaInteraction).
struct ArmResiduals {
  std::vector<double> arm0;
  std::vector<double> arm1;
};
ArmResiduals ancova_residuals(MethodId m, const TrialDataset& ds);

}  // namespace prepost
