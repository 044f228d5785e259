#include "prepost/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "prepost/gls.hpp"

namespace prepost {

std::string_view method_name(MethodId m) {
  switch (m) {
    case MethodId::AnovaPost: return "anova-post";
    case MethodId::AncovaMain: return "ancova-main";
    case MethodId::AncovaInteraction: return "ancova-interaction";
    case MethodId::AnovaChange: return "anova-change";
    case MethodId::Rm: return "rm";
    case MethodId::CrmPooled: return "crm";
    case MethodId::CrmGrouped: return "crm-grouped";
  }
  return "unknown";
}

std::optional<MethodId> parse_method_name(std::string_view name) {
  for (MethodId m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view method_label(MethodId m) {
  switch (m) {
    case MethodId::AnovaPost: return "ANOVA";
    case MethodId::AncovaMain: return "ANCOVA I";
    case MethodId::AncovaInteraction: return "ANCOVA II";
    case MethodId::AnovaChange: return "ANOVA-Change";
    case MethodId::Rm: return "RM";
    case MethodId::CrmPooled: return "cRM";
    case MethodId::CrmGrouped: return "cRM (grouped covariance)";
  }
  return "unknown";
}

std::string_view se_kind_name(SeKind k) {
  switch (k) {
    case SeKind::Model: return "model";
    case SeKind::Hc: return "hc";
    case SeKind::AdjustedHc: return "adjusted_hc";
    case SeKind::Bootstrap: return "bootstrap";
  }
  return "model";
}

std::optional<SeKind> parse_se_kind(std::string_view name) {
  for (SeKind k : {SeKind::Model, SeKind::Hc, SeKind::AdjustedHc, SeKind::Bootstrap}) {
    if (se_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view population_name(Population p) {
  switch (p) {
    case Population::Unspecified: return "unspecified";
    case Population::Homogeneous: return "homogeneous";
    case Population::Heterogeneous: return "heterogeneous";
  }
  return "unspecified";
}

std::optional<Population> parse_population(std::string_view name) {
  for (Population p : {Population::Unspecified, Population::Homogeneous, Population::Heterogeneous}) {
    if (population_name(p) == name) return p;
  }
  return std::nullopt;
}

std::vector<MethodId> methods_for(Population p) {
  switch (p) {
    case Population::Homogeneous:
      return {MethodId::AnovaPost, MethodId::AncovaMain, MethodId::AnovaChange, MethodId::Rm, MethodId::CrmPooled};
    case Population::Heterogeneous:
      return {MethodId::AncovaMain, MethodId::AncovaInteraction, MethodId::CrmGrouped};
    case Population::Unspecified:
      break;
  }
  return {kAllMethods.begin(), kAllMethods.end()};
}

SeKind default_inference_se(MethodId m, Population p) {
  if (p != Population::Heterogeneous) return SeKind::Model;
  if (m == MethodId::AncovaMain) return SeKind::Hc;
  if (m == MethodId::AncovaInteraction) return SeKind::AdjustedHc;
  return SeKind::Model;
}

std::optional<double> AnalysisResult::se(SeKind kind) const {
  switch (kind) {
    case SeKind::Model: return se_model;
    case SeKind::Hc: return se_hc;
    case SeKind::AdjustedHc: return se_adjusted_hc;
    case SeKind::Bootstrap: return se_bootstrap;
  }
  return std::nullopt;
}

void AnalysisResult::set_inference(SeKind kind) {
  const auto chosen = se(kind);
  if (!chosen) {
    throw std::invalid_argument("method " + std::string(method_name(method)) + " has no " +
                                std::string(se_kind_name(kind)) + " standard error");
  }
  const double s = *chosen;
  se_used = kind;
  if (s > 0.0) {
    t_stat = estimate / s;
  } else if (estimate == 0.0) {
    t_stat = 0.0;
  } else {
    t_stat = estimate > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  p_value = student_t_two_sided_p(t_stat, df);
  const double crit = student_t_critical(0.05, df);
  ci95 = {estimate - crit * s, estimate + crit * s};
}

namespace {

double coef_sd(const Matrix& cov, Eigen::Index j) { return std::sqrt(std::max(0.0, cov(j, j))); }

struct OlsModel {
  Matrix design;
  Vector outcome;
};

// Two-group designs: columns {1, G}.
OlsModel group_design(const TrialDataset& ds, bool change) {
  const auto n = static_cast<Eigen::Index>(ds.size());
  OlsModel m{Matrix(n, 2), Vector(n)};
  Eigen::Index i = 0;
  for (const auto& r : ds.records()) {
    m.design(i, 0) = 1.0;
    m.design(i, 1) = r.arm;
    m.outcome(i) = change ? r.y_post - r.y_pre : r.y_post;
    ++i;
  }
  return m;
}

OlsModel main_effect_design(const TrialDataset& ds) {
  const auto n = static_cast<Eigen::Index>(ds.size());
  OlsModel m{Matrix(n, 3), Vector(n)};
  Eigen::Index i = 0;
  for (const auto& r : ds.records()) {
    m.design.row(i) << 1.0, r.arm, r.y_pre;
    m.outcome(i) = r.y_post;
    ++i;
  }
  return m;
}

// Baseline centred at the overall sample mean.
OlsModel interaction_design(const TrialDataset& ds, double center) {
  const auto n = static_cast<Eigen::Index>(ds.size());
  OlsModel m{Matrix(n, 4), Vector(n)};
  Eigen::Index i = 0;
  for (const auto& r : ds.records()) {
    const double c = r.y_pre - center;
    m.design.row(i) << 1.0, r.arm, c, r.arm * c;
    m.outcome(i) = r.y_post;
    ++i;
  }
  return m;
}

AnalysisResult from_ols(MethodId method, const OlsFit& fit, const FitOptions& opts) {
  AnalysisResult res;
  res.method = method;
  res.estimate = fit.coefficients(1);
  res.se_model = coef_sd(fit.model_covariance(), 1);
  res.se_hc = coef_sd(hc_covariance(fit, opts.hc), 1);
  res.df = static_cast<double>(fit.n - fit.k);
  return res;
}

}  // namespace

AnalysisResult anova_post(const TrialDataset& ds, const FitOptions& opts) {
  const auto m = group_design(ds, false);
  auto res = from_ols(MethodId::AnovaPost, ols_fit(m.design, m.outcome), opts);
  res.set_inference(default_inference_se(res.method, opts.population));
  return res;
}

AnalysisResult anova_change(const TrialDataset& ds, const FitOptions& opts) {
  const auto m = group_design(ds, true);
  auto res = from_ols(MethodId::AnovaChange, ols_fit(m.design, m.outcome), opts);
  res.set_inference(default_inference_se(res.method, opts.population));
  return res;
}

AnalysisResult ancova_main(const TrialDataset& ds, const FitOptions& opts) {
  const auto m = main_effect_design(ds);
  const auto fit = ols_fit(m.design, m.outcome);
  auto res = from_ols(MethodId::AncovaMain, fit, opts);
  res.slope_baseline = fit.coefficients(2);
  res.set_inference(default_inference_se(res.method, opts.population));
  return res;
}

AnalysisResult ancova_interaction(const TrialDataset& ds, const FitOptions& opts) {
  const auto st = sufficient_stats(ds);
  const auto m = interaction_design(ds, st.grand_mean_pre);
  const auto fit = ols_fit(m.design, m.outcome);
  auto res = from_ols(MethodId::AncovaInteraction, fit, opts);
  const double beta3 = fit.coefficients(3);
  res.slope_baseline = fit.coefficients(2);
  res.slope_interaction = beta3;
  // The centring mean is itself estimated: add beta3^2 * var(mean baseline).
  const double hc_var = (*res.se_hc) * (*res.se_hc);
  res.se_adjusted_hc = std::sqrt(hc_var + beta3 * beta3 * st.var_pre / static_cast<double>(ds.size()));
  res.set_inference(default_inference_se(res.method, opts.population));
  return res;
}

AnalysisResult rm_fit(const TrialDataset& ds, const FitOptions& opts) {
  const auto fit = gls_reml(ds, MeanStructure::Unconstrained, CovarianceGrouping::Pooled);
  AnalysisResult res;
  res.method = MethodId::Rm;
  res.estimate = fit.coefficients(3);
  res.se_model = coef_sd(fit.covariance, 3);
  // Substitute for Kenward-Roger degrees of freedom.
  res.df = static_cast<double>(ds.size()) - 2.0;
  res.covariance = fit.covariance_estimate;
  res.set_inference(default_inference_se(res.method, opts.population));
  return res;
}

AnalysisResult crm_fit(const TrialDataset& ds, CovarianceGrouping grouping, const FitOptions& opts) {
  const auto fit = gls_reml(ds, MeanStructure::CommonBaseline, grouping);
  AnalysisResult res;
  res.method = grouping == CovarianceGrouping::Pooled ? MethodId::CrmPooled : MethodId::CrmGrouped;
  res.estimate = fit.coefficients(2);
  res.se_model = coef_sd(fit.covariance, 2);
  res.df = static_cast<double>(ds.size()) - 2.0;
  res.covariance = fit.covariance_estimate;
  res.set_inference(default_inference_se(res.method, opts.population));
  return res;
}

AnalysisResult fit_method(MethodId m, const TrialDataset& ds, const FitOptions& opts) {
  switch (m) {
    case MethodId::AnovaPost: return anova_post(ds, opts);
    case MethodId::AncovaMain: return ancova_main(ds, opts);
    case MethodId::AncovaInteraction: return ancova_interaction(ds, opts);
    case MethodId::AnovaChange: return anova_change(ds, opts);
    case MethodId::Rm: return rm_fit(ds, opts);
    case MethodId::CrmPooled: return crm_fit(ds, CovarianceGrouping::Pooled, opts);
    case MethodId::CrmGrouped: return crm_fit(ds, CovarianceGrouping::Grouped, opts);
  }
  throw std::invalid_argument("unknown method");
}

ArmResiduals ancova_residuals(MethodId m, const TrialDataset& ds) {
  OlsModel model;
  if (m == MethodId::AncovaMain) {
    model = main_effect_design(ds);
  } else if (m == MethodId::AncovaInteraction) {
    model = interaction_design(ds, sufficient_stats(ds).grand_mean_pre);
  } else {
    throw std::invalid_argument("ancova_residuals: method must be ancova-main or ancova-interaction");
  }
  const auto fit = ols_fit(model.design, model.outcome);
  ArmResiduals out;
  Eigen::Index i = 0;
  for (const auto& r : ds.records()) {
    (r.arm == 0 ? out.arm0 : out.arm1).push_back(fit.residuals(i));
    ++i;
  }
  return out;
}

}  // namespace prepost
