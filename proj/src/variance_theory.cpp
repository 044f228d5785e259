#include "prepost/variance_theory.hpp"

#include <cmath>
#include <string>

namespace prepost {

double PopulationParams::sigma_post(int arm) const {
  if (const auto* h = std::get_if<HomogeneousStructure>(&structure)) return h->sigma_post;
  const auto& het = std::get<HeterogeneousStructure>(structure);
  return arm == 0 ? het.sigma_post_control : het.sigma_post_treatment;
}

double PopulationParams::rho(int arm) const {
  if (const auto* h = std::get_if<HomogeneousStructure>(&structure)) return h->rho;
  const auto& het = std::get<HeterogeneousStructure>(structure);
  return arm == 0 ? het.rho_control : het.rho_treatment;
}

Cov2x2 PopulationParams::arm_covariance(int arm) const {
  const double s1 = sigma_post(arm);
  return {sigma_pre * sigma_pre, rho(arm) * sigma_pre * s1, s1 * s1};
}

double PopulationParams::residual_variance(int arm) const {
  const double r = rho(arm);
  const double s1 = sigma_post(arm);
  return (1.0 - r * r) * s1 * s1;
}

double PopulationParams::interaction_slope() const {
  return (rho(1) * sigma_post(1) - rho(0) * sigma_post(0)) / sigma_pre;
}

void PopulationParams::validate() const {
  auto check_sigma = [](double s, const char* name) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  auto check_rho = [](double r, const char* name) {
    if (!(std::abs(r) < 1.0)) throw std::invalid_argument(std::string(name) + " must lie strictly inside (-1, 1)");
  };
  check_sigma(sigma_pre, "sigma_pre");
  if (const auto* h = std::get_if<HomogeneousStructure>(&structure)) {
    check_sigma(h->sigma_post, "sigma_post");
    check_rho(h->rho, "rho");
  } else {
    const auto& het = std::get<HeterogeneousStructure>(structure);
    check_sigma(het.sigma_post_control, "sigma_post_control");
    check_sigma(het.sigma_post_treatment, "sigma_post_treatment");
    check_rho(het.rho_control, "rho_control");
    check_rho(het.rho_treatment, "rho_treatment");
  }
  for (double mu : {mu_pre, mu_post_control, mu_post_treatment}) {
    if (!std::isfinite(mu)) throw std::invalid_argument("means must be finite");
  }
}

namespace {

[[noreturn]] void mismatch(MethodId m, const PopulationParams& p) {
  throw ModeMismatch("no " + std::string(p.homogeneous() ? "homogeneous" : "heterogeneous") +
                     " variance formula for method " + std::string(method_name(m)));
}

// Heterogeneous ANCOVA main-effect model (also the grouped cRM): each arm's
// residual about the common-slope line carries the slope mismatch weighted
// by the other arm's share.
double main_effect_heterogeneous(const PopulationParams& p, const DesignSize& d) {
  const double b3 = p.interaction_slope();
  const double s0sq = p.sigma_pre * p.sigma_pre;
  const double e0 = p.residual_variance(0) + (b3 * d.p1()) * (b3 * d.p1()) * s0sq;
  const double e1 = p.residual_variance(1) + (b3 * d.p0()) * (b3 * d.p0()) * s0sq;
  return e0 / static_cast<double>(d.n0) + e1 / static_cast<double>(d.n1);
}

}  // namespace

double true_unconditional_variance(MethodId method, const PopulationParams& p, const DesignSize& d) {
  p.validate();
  const double inv = d.inverse_sum();
  if (p.homogeneous()) {
    const auto& h = std::get<HomogeneousStructure>(p.structure);
    const double s0 = p.sigma_pre;
    const double s1 = h.sigma_post;
    switch (method) {
      case MethodId::AnovaPost:
        return s1 * s1 * inv;
      case MethodId::AncovaMain:
      case MethodId::CrmPooled:
        return inv * (1.0 - h.rho * h.rho) * s1 * s1;
      case MethodId::AnovaChange:
      case MethodId::Rm:
        return inv * (s1 * s1 + s0 * s0 - 2.0 * h.rho * s0 * s1);
      default:
        mismatch(method, p);
    }
  }
  switch (method) {
    case MethodId::AncovaInteraction: {
      const double b3 = p.interaction_slope();
      return p.residual_variance(0) / static_cast<double>(d.n0) +
             p.residual_variance(1) / static_cast<double>(d.n1) +
             b3 * b3 * p.sigma_pre * p.sigma_pre / d.total();
    }
    case MethodId::AncovaMain:
    case MethodId::CrmGrouped:
      return main_effect_heterogeneous(p, d);
    default:
      mismatch(method, p);
  }
}

double conditional_variance_ancova(const SufficientStats& stats, const PopulationParams& p, MethodId method) {
  p.validate();
  const auto& a0 = stats.arms[0];
  const auto& a1 = stats.arms[1];
  if (!(a0.ss_pre > 0.0) || !(a1.ss_pre > 0.0)) {
    throw NumericError("conditional variance undefined: zero within-arm baseline sum of squares");
  }
  const double n0 = static_cast<double>(a0.n);
  const double n1 = static_cast<double>(a1.n);
  const double e0 = p.residual_variance(0);
  const double e1 = p.residual_variance(1);
  if (method == MethodId::AncovaMain) {
    const double d = stats.baseline_imbalance();
    const double ssw = stats.ss_pre_within();
    if (p.homogeneous()) return (1.0 / n0 + 1.0 / n1 + d * d / ssw) * e0;
    return (1.0 / n0 + a0.ss_pre * d * d / (ssw * ssw)) * e0 + (1.0 / n1 + a1.ss_pre * d * d / (ssw * ssw)) * e1;
  }
  if (method == MethodId::AncovaInteraction) {
    const double c0 = a0.mean_pre - stats.grand_mean_pre;
    const double c1 = a1.mean_pre - stats.grand_mean_pre;
    return (1.0 / n0 + c0 * c0 / a0.ss_pre) * e0 + (1.0 / n1 + c1 * c1 / a1.ss_pre) * e1;
  }
  throw std::invalid_argument("conditional_variance_ancova: method must be ancova-main or ancova-interaction");
}

double efficiency_gap(MethodId a, MethodId b, const PopulationParams& p, const DesignSize& d) {
  if (!p.homogeneous()) throw ModeMismatch("efficiency_gap requires homogeneous parameters");
  return true_unconditional_variance(a, p, d) - true_unconditional_variance(b, p, d);
}

TheoryTable theory_table(const PopulationParams& p, const DesignSize& d, std::string label) {
  TheoryTable t;
  t.label = std::move(label);
  t.params = p;
  t.design = d;
  const Population family = p.homogeneous() ? Population::Homogeneous : Population::Heterogeneous;
  for (MethodId m : methods_for(family)) t.rows.push_back({m, true_unconditional_variance(m, p, d)});
  auto gap = [&](MethodId a, MethodId b) {
    t.gaps.push_back({a, b, true_unconditional_variance(a, p, d) - true_unconditional_variance(b, p, d)});
  };
  if (p.homogeneous()) {
    gap(MethodId::AnovaPost, MethodId::AnovaChange);
    gap(MethodId::AnovaChange, MethodId::AncovaMain);
    gap(MethodId::AnovaPost, MethodId::AncovaMain);
  } else {
    gap(MethodId::AncovaMain, MethodId::AncovaInteraction);
  }
  return t;
}

}  // namespace prepost
