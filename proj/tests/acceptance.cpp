// Acceptance checks. One PASS/FAIL line per criterion; nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "prepost/estimators.hpp"
#include "prepost/gls.hpp"
#include "prepost/numeric.hpp"
#include "prepost/resampling.hpp"
#include "prepost/simulation.hpp"
#include "prepost/variance_theory.hpp"

using namespace prepost;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MCReport run(Preset p, std::vector<MethodId> methods, std::uint64_t seed) {
  MCConfig cfg;
  cfg.scenario = preset(p);
  cfg.methods = std::move(methods);
  cfg.replications = 10000;
  cfg.seed = seed;
  return run_mc(cfg);
}

Outcome criterion1() {
  Outcome o;
  Rng rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto ds = testing::random_dataset(rng, 2 + rng.below(60), 2 + rng.below(60));
    worst = std::max(worst, std::abs(anova_change(ds).estimate - rm_fit(ds).estimate));
  }
  o.require(worst < 1e-10, fmt("max |change - RM| over 100 datasets %.2e (< 1e-10)", worst));
  double worst_se = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto ds = generate_trial(preset(Preset::Homogeneous), derive_stream_seed(77, s));
    worst_se = std::max(worst_se, std::abs(anova_change(ds).se_model - rm_fit(ds).se_model));
  }
  o.require(worst_se < 1e-6, fmt("max SE difference on homogeneous data %.2e (< 1e-6)", worst_se));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto hom = preset(Preset::Homogeneous);
  const auto hb = preset(Preset::HetBalanced);
  const auto hu = preset(Preset::HetUnbalanced);
  struct Row {
    MethodId m;
    const ScenarioConfig* cfg;
    double expect;
    const char* name;
  };
  const Row rows[] = {
      {MethodId::AnovaPost, &hom, 5.0, "AnovaPost"},
      {MethodId::AncovaMain, &hom, 0.95, "AncovaMain"},
      {MethodId::AnovaChange, &hom, 43.0 / 45.0, "AnovaChange"},
      {MethodId::AncovaInteraction, &hb, 1.80, "AncovaInteraction bal"},
      {MethodId::AncovaInteraction, &hu, 1.71875, "AncovaInteraction unbal"},
      {MethodId::AncovaMain, &hb, 1.80, "AncovaMain het bal"},
      {MethodId::AncovaMain, &hu, 1.74375, "AncovaMain het unbal"},
  };
  double worst = 0.0;
  for (const auto& r : rows) {
    const double v = true_unconditional_variance(r.m, r.cfg->params, r.cfg->design);
    worst = std::max(worst, std::abs(v - r.expect));
  }
  o.require(worst <= 1e-12, fmt("max deviation from hand values %.2e (<= 1e-12)", worst));
  const double bal_gap = true_unconditional_variance(MethodId::AncovaMain, hb.params, hb.design) -
                         true_unconditional_variance(MethodId::AncovaInteraction, hb.params, hb.design);
  o.require(bal_gap == 0.0, fmt("balanced main - interaction %.2e (== 0)", bal_gap));
  const double unbal_gap = true_unconditional_variance(MethodId::AncovaMain, hu.params, hu.design) -
                           true_unconditional_variance(MethodId::AncovaInteraction, hu.params, hu.design);
  o.require(unbal_gap > 0.0, fmt("unbalanced main - interaction %.5f (> 0)", unbal_gap));
  return o;
}

Outcome criterion3() {
  Outcome o;
  Rng rng(3003);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    PopulationParams p;
    p.mu_pre = 100.0 * rng.normal();
    p.mu_post_control = 100.0 * rng.normal();
    p.mu_post_treatment = 100.0 * rng.normal();
    p.sigma_pre = 0.1 + 20.0 * rng.uniform();
    const double s1 = 0.1 + 20.0 * rng.uniform();
    const double rho = 1.98 * rng.uniform() - 0.99;
    p.structure = HomogeneousStructure{s1, rho};
    const DesignSize d{2 + rng.below(1000), 2 + rng.below(1000)};
    const double gap = true_unconditional_variance(MethodId::AnovaChange, p, d) -
                       true_unconditional_variance(MethodId::AncovaMain, p, d);
    const double identity = d.inverse_sum() * (p.sigma_pre - rho * s1) * (p.sigma_pre - rho * s1);
    worst = std::max(worst, std::abs(gap - identity));
  }
  o.require(worst <= 1e-12, fmt("max |gap - identity| over 1000 points %.2e (<= 1e-12)", worst));
  return o;
}

Outcome criterion4(const MCReport& r) {
  Outcome o;
  for (const auto& m : r.methods) {
    const double bound = 3.0 * m.bias.mc_se;
    o.require(std::abs(m.mean_estimate.value - r.true_tau) < bound,
              std::string(method_name(m.method)) + fmt(" mean %.4f (tau -3 +/- %.4f)", m.mean_estimate.value, bound));
  }
  return o;
}

Outcome criterion5(const MCReport& r) {
  Outcome o;
  const std::pair<MethodId, double> targets[] = {
      {MethodId::AncovaMain, 0.9747}, {MethodId::AnovaChange, 0.9776}, {MethodId::AnovaPost, 2.2361}};
  for (const auto& [m, target] : targets) {
    const double sd = r.find(m)->empirical_sd.value;
    o.require(std::abs(sd / target - 1.0) < 0.02,
              std::string(method_name(m)) + fmt(" SD %.4f (target %.4f +/- 2%%)", sd, target));
  }
  return o;
}

Outcome criterion6(const MCReport& r) {
  Outcome o;
  const double cov = r.find(MethodId::AncovaMain)->find(SeKind::Model)->coverage.value;
  o.require(cov >= 0.94 && cov <= 0.96, fmt("AncovaMain model coverage %.4f (in [0.94, 0.96])", cov));
  return o;
}

Outcome criterion7(const MCReport& r) {
  Outcome o;
  const auto* m = r.find(MethodId::AncovaMain);
  const double sd = m->empirical_sd.value;
  const double model = m->find(SeKind::Model)->mean_se.value;
  const double hc = m->find(SeKind::Hc)->mean_se.value;
  o.require(model > 1.03 * sd, fmt("model SE %.4f vs SD %.4f (> +3%%)", model, sd));
  o.require(std::abs(hc / sd - 1.0) < 0.02, fmt("HC2 SE %.4f vs SD %.4f (within 2%%)", hc, sd));
  return o;
}

Outcome criterion8(const MCReport& r) {
  Outcome o;
  const auto* m = r.find(MethodId::AncovaInteraction);
  const auto* adj = m->find(SeKind::AdjustedHc);
  const double se = adj->mean_se.value;
  o.require(std::abs(se / 1.3110 - 1.0) < 0.02, fmt("adjusted HC SE %.4f (1.3110 +/- 2%%)", se));
  const double cov = adj->coverage.value;
  o.require(cov >= 0.94 && cov <= 0.96, fmt("adjusted HC coverage %.4f (in [0.94, 0.96])", cov));
  const double model_cov = m->find(SeKind::Model)->coverage.value;
  o.require(model_cov > 0.95, fmt("model-based coverage %.4f (> 0.95, model SE too large)", model_cov));
  return o;
}

Outcome criterion9() {
  Outcome o;
  auto gap = [](Preset p, MethodId a, MethodId b) {
    std::vector<double> diffs;
    for (std::uint64_t r = 0; r < 200; ++r) {
      const auto ds = generate_trial(preset(p), derive_stream_seed(909, r));
      diffs.push_back(std::abs(fit_method(a, ds).estimate - fit_method(b, ds).estimate));
    }
    return median(diffs);
  };
  const double hom = gap(Preset::Homogeneous, MethodId::AncovaMain, MethodId::CrmPooled);
  o.require(hom < 0.05, fmt("homogeneous median |ANCOVA I - cRM| %.4f (< 0.05)", hom));
  const double hb = gap(Preset::HetBalanced, MethodId::AncovaInteraction, MethodId::CrmGrouped);
  o.require(hb < 0.05, fmt("het balanced median |ANCOVA II - grouped cRM| %.4f (< 0.05)", hb));
  const double hu = gap(Preset::HetUnbalanced, MethodId::AncovaInteraction, MethodId::CrmGrouped);
  o.require(hu < 0.05, fmt("het unbalanced median |ANCOVA II - grouped cRM| %.4f (< 0.05)", hu));
  return o;
}

Outcome criterion10() {
  Outcome o;
  const auto ds = generate_trial(preset(Preset::HetBalanced), 20240601);
  const double hc = *ancova_main(ds).se_hc;
  const double bs = bootstrap_se(ds, MethodId::AncovaMain, 5000, 7).se;
  o.require(std::abs(bs / hc - 1.0) < 0.03, fmt("bootstrap SE %.4f vs HC2 SE %.4f (within 3%%)", bs, hc));
  return o;
}

Outcome criterion11() {
  Outcome o;
  double rm_worst = 0.0;
  double crm_worst = 0.0;
  int max_iter = 0;
  bool all_converged = true;
  auto check = [&](const TrialDataset& ds) {
    const auto st = sufficient_stats(ds);
    const auto& a0 = st.arms[0];
    const auto& a1 = st.arms[1];
    const double df = static_cast<double>(ds.size()) - 2.0;
    const auto rm = gls_reml(ds, MeanStructure::Unconstrained, CovarianceGrouping::Pooled);
    const auto& c = rm.covariance_estimate.arms[0];
    const double scale = std::max((a0.ss_pre + a1.ss_pre) / df, (a0.ss_post + a1.ss_post) / df);
    rm_worst = std::max({rm_worst, std::abs(c.v00 - (a0.ss_pre + a1.ss_pre) / df) / scale,
                         std::abs(c.v01 - (a0.sp_cross + a1.sp_cross) / df) / scale,
                         std::abs(c.v11 - (a0.ss_post + a1.ss_post) / df) / scale});

    const double dpost = a1.mean_post - a0.mean_post;
    const double dpre = a1.mean_pre - a0.mean_pre;
    const auto pooled = crm_fit(ds, CovarianceGrouping::Pooled);
    const auto& pc = pooled.covariance->arms[0];
    const double pooled_form = dpost - pc.v01 / pc.v00 * dpre;
    crm_worst = std::max(crm_worst, std::abs(pooled.estimate - pooled_form) / (1.0 + std::abs(pooled_form)));

    const auto grouped = crm_fit(ds, CovarianceGrouping::Grouped);
    const auto& g0 = grouped.covariance->arms[0];
    const auto& g1 = grouped.covariance->arms[1];
    const double w0 = static_cast<double>(a0.n) / g0.v00;
    const double w1 = static_cast<double>(a1.n) / g1.v00;
    const double gamma = (w0 * a0.mean_pre + w1 * a1.mean_pre) / (w0 + w1);
    const double grouped_form =
        dpost - g1.v01 / g1.v00 * (a1.mean_pre - gamma) + g0.v01 / g0.v00 * (a0.mean_pre - gamma);
    crm_worst = std::max(crm_worst, std::abs(grouped.estimate - grouped_form) / (1.0 + std::abs(grouped_form)));

    for (const auto* f : {&pooled, &grouped}) {
      max_iter = std::max(max_iter, f->covariance->iterations);
      all_converged = all_converged && f->covariance->converged;
    }
  };
  Rng rng(1111);
  for (int i = 0; i < 50; ++i) check(testing::random_dataset(rng, 3 + rng.below(80), 3 + rng.below(80)));
  for (Preset p : kAllPresets) {
    for (std::uint64_t s = 0; s < 10; ++s) check(generate_trial(preset(p), derive_stream_seed(11, s)));
  }
  o.require(rm_worst < 1e-8, fmt("RM covariance vs pooled sample covariance %.2e (< 1e-8)", rm_worst));
  o.require(crm_worst < 1e-8, fmt("cRM vs closed forms %.2e (< 1e-8)", crm_worst));
  o.require(all_converged && max_iter <= 100, fmt("max cRM iterations %.0f (<= 100)", max_iter));
  return o;
}

Outcome criterion12() {
  Outcome o;
  const double p = student_t_two_sided_p(1.959964, 1e6);
  o.require(std::abs(p - 0.05) <= 1e-4, fmt("two-sided p(1.959964, df=1e6) = %.6f (0.05 +/- 1e-4)", p));
  // The identity holds for equal arm sizes; with unequal sizes HC2 is the
  // unpooled two-sample variance and differs from the pooled model variance.
  Rng rng(1212);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + rng.below(100);
    Matrix x(2 * n, 2);
    Vector y(2 * n);
    const double spread = 0.1 + 10.0 * rng.uniform();
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      x(r, 0) = 1.0;
      x(r, 1) = k < n ? 0.0 : 1.0;
      y(r) = spread * rng.normal() * (k < n ? 1.0 : 3.0);
    }
    const auto fit = ols_fit(x, y);
    const double model = fit.model_covariance()(1, 1);
    const double hc2 = hc_covariance(fit, HcKind::HC2)(1, 1);
    worst = std::max(worst, std::abs(hc2 - model) / model);
  }
  o.require(worst <= 1e-12, fmt("balanced dummy designs: max relative |HC2 - model| %.2e (<= 1e-12)", worst));
  return o;
}

}  // namespace

int main() {
  const MCReport hom = run(Preset::Homogeneous, {}, 4001);
  const MCReport het = run(Preset::HetUnbalanced, {MethodId::AncovaMain, MethodId::AncovaInteraction}, 4002);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact change-score / RM identity", criterion1},
      {"variance oracle values", criterion2},
      {"change vs ANCOVA efficiency identity", criterion3},
      {"MC unbiasedness (homogeneous, R=10000)", [&] { return criterion4(hom); }},
      {"MC SD calibration (homogeneous, R=10000)", [&] { return criterion5(hom); }},
      {"ANCOVA I model-based coverage (homogeneous, R=10000)", [&] { return criterion6(hom); }},
      {"heteroscedastic SE bias direction (het-unbalanced, R=10000)", [&] { return criterion7(het); }},
      {"adjusted HC for ANCOVA II (het-unbalanced, R=10000)", [&] { return criterion8(het); }},
      {"ANCOVA / cRM agreement at n=180", criterion9},
      {"bootstrap vs HC2 (het-balanced, B=5000)", criterion10},
      {"REML internals", criterion11},
      {"kernel accuracy", criterion12},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
