#include "prepost/simulation.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "prepost/numeric.hpp"
#include "prepost/parallel.hpp"
#include "prepost/random.hpp"
#include "prepost/summation.hpp"

namespace prepost {

void ScenarioConfig::validate() const {
  params.validate();
  if (design.n0 < 2 || design.n1 < 2) throw std::invalid_argument("each arm needs at least 2 subjects");
}

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::Homogeneous: return "homogeneous";
    case Preset::HetBalanced: return "het-balanced";
    case Preset::HetUnbalanced: return "het-unbalanced";
    case Preset::NullHomogeneous: return "null-homogeneous";
    case Preset::NullHetUnbalanced: return "null-het-unbalanced";
  }
  return "unknown";
}

std::optional<Preset> parse_preset(std::string_view name) {
  for (Preset p : kAllPresets) {
    if (preset_name(p) == name) return p;
  }
  return std::nullopt;
}

ScenarioConfig preset(Preset p) {
  ScenarioConfig cfg;
  cfg.label = std::string(preset_name(p));
  cfg.params.mu_pre = 88.0;
  cfg.params.sigma_pre = 14.0;
  cfg.params.mu_post_control = 86.0;
  const bool null = p == Preset::NullHomogeneous || p == Preset::NullHetUnbalanced;
  cfg.params.mu_post_treatment = null ? 86.0 : 83.0;
  if (p == Preset::Homogeneous || p == Preset::NullHomogeneous) {
    cfg.params.structure = HomogeneousStructure{15.0, 0.9};
  } else {
    cfg.params.structure = HeterogeneousStructure{15.0, 15.0, 0.9, 0.7};
  }
  const bool unbalanced = p == Preset::HetUnbalanced || p == Preset::NullHetUnbalanced;
  cfg.design = unbalanced ? DesignSize{60, 120} : DesignSize{90, 90};
  return cfg;
}

ScenarioConfig preset(std::string_view name) {
  const auto p = parse_preset(name);
  if (!p) throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  return preset(*p);
}

TrialDataset generate_trial(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::vector<SubjectRecord> records;
  records.reserve(cfg.design.n0 + cfg.design.n1);
  for (int arm = 0; arm < 2; ++arm) {
    const auto l = cholesky2(cfg.params.arm_covariance(arm));
    const double mu_post = cfg.params.mu_post(arm);
    const std::size_t n = arm == 0 ? cfg.design.n0 : cfg.design.n1;
    for (std::size_t i = 0; i < n; ++i) {
      const double z0 = rng.normal();
      const double z1 = rng.normal();
      char id[32];
      std::snprintf(id, sizeof id, "%c%04zu", arm == 0 ? 'c' : 't', i + 1);
      records.push_back({id, arm, cfg.params.mu_pre + l.l00 * z0, mu_post + l.l10 * z0 + l.l11 * z1});
    }
  }
  return TrialDataset::from_records(std::move(records));
}

namespace {

bool method_has_se(MethodId m, SeKind k) {
  switch (k) {
    case SeKind::Model: return true;
    case SeKind::Hc:
      return m == MethodId::AnovaPost || m == MethodId::AncovaMain || m == MethodId::AncovaInteraction ||
             m == MethodId::AnovaChange;
    case SeKind::AdjustedHc: return m == MethodId::AncovaInteraction;
    case SeKind::Bootstrap: return false;
  }
  return false;
}

constexpr std::array<SeKind, 3> kMcSeKinds = {SeKind::Model, SeKind::Hc, SeKind::AdjustedHc};

struct Draw {
  bool ok = false;
  double estimate = 0.0;
  double df = 0.0;
  std::array<std::optional<double>, 3> se;
};

McValue proportion(std::size_t hits, std::size_t n) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  CompensatedSum s;
  for (double x : xs) s += x;
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  CompensatedSum ss;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, xs.size() > 1 ? std::sqrt(ss.value() / (n - 1.0)) : 0.0};
}

}  // namespace

void MCConfig::validate() const {
  scenario.validate();
  if (replications < 100) throw std::invalid_argument("Monte Carlo needs at least 100 replications");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  for (const auto& [m, k] : inference_se) {
    if (!method_has_se(m, k)) {
      throw std::invalid_argument("method " + std::string(method_name(m)) + " has no " +
                                  std::string(se_kind_name(k)) + " standard error under Monte Carlo");
    }
  }
}

const SeKindSummary* MethodSummary::find(SeKind kind) const {
  for (const auto& s : se_kinds) {
    if (s.kind == kind) return &s;
  }
  return nullptr;
}

const MethodSummary* MCReport::find(MethodId m) const {
  for (const auto& s : methods) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

MCReport run_mc(const MCConfig& cfg) {
  cfg.validate();
  const Population pop = cfg.scenario.population();
  const std::vector<MethodId> methods = cfg.methods.empty() ? methods_for(pop) : cfg.methods;
  const std::size_t R = cfg.replications;
  const std::size_t M = methods.size();
  FitOptions fit = cfg.fit;
  if (fit.population == Population::Unspecified) fit.population = pop;

  std::vector<Draw> draws(R * M);
  parallel_for(R, cfg.threads, [&](std::size_t r) {
    const auto ds = generate_trial(cfg.scenario, derive_stream_seed(cfg.seed, r));
    for (std::size_t j = 0; j < M; ++j) {
      Draw& d = draws[r * M + j];
      try {
        const auto res = fit_method(methods[j], ds, fit);
        d.estimate = res.estimate;
        d.df = res.df;
        for (std::size_t k = 0; k < kMcSeKinds.size(); ++k) d.se[k] = res.se(kMcSeKinds[k]);
        d.ok = std::isfinite(d.estimate);
      } catch (const std::exception&) {
        d.ok = false;
      }
    }
  });

  MCReport report;
  report.scenario = cfg.scenario.label;
  report.true_tau = cfg.scenario.params.tau();
  report.replications = R;
  report.seed = cfg.seed;
  report.alpha = cfg.alpha;
  const double tau = report.true_tau;

  for (std::size_t j = 0; j < M; ++j) {
    MethodSummary s;
    s.method = methods[j];
    const auto it = cfg.inference_se.find(s.method);
    s.inference_se = it != cfg.inference_se.end() ? it->second : default_inference_se(s.method, pop);

    std::vector<std::size_t> ok;
    std::vector<double> est;
    for (std::size_t r = 0; r < R; ++r) {
      if (draws[r * M + j].ok) {
        ok.push_back(r);
        est.push_back(draws[r * M + j].estimate);
      }
    }
    s.successes = ok.size();
    s.failures = R - ok.size();
    if (s.failures * 100 > R) {
      throw NumericError("Monte Carlo: method " + std::string(method_name(s.method)) + " failed in " +
                         std::to_string(s.failures) + " of " + std::to_string(R) + " replications");
    }
    const double n = static_cast<double>(s.successes);
    const Moments em = moments(est);
    s.mean_estimate = {em.mean, em.sd / std::sqrt(n)};
    s.bias = {em.mean - tau, em.sd / std::sqrt(n)};
    // Normal-theory standard error of a sample SD.
    s.empirical_sd = {em.sd, em.sd / std::sqrt(2.0 * (n - 1.0))};
    try {
      s.oracle_sd = std::sqrt(true_unconditional_variance(s.method, cfg.scenario.params, cfg.scenario.design));
    } catch (const ModeMismatch&) {
    }

    for (std::size_t k = 0; k < kMcSeKinds.size(); ++k) {
      const SeKind kind = kMcSeKinds[k];
      if (!method_has_se(s.method, kind)) continue;
      std::vector<double> ses;
      ses.reserve(ok.size());
      std::size_t covered = 0;
      std::size_t rejected = 0;
      for (std::size_t r : ok) {
        const Draw& d = draws[r * M + j];
        const double se = d.se[k].value_or(0.0);
        ses.push_back(se);
        const double crit = student_t_critical(cfg.alpha, d.df);
        if (std::abs(d.estimate - tau) <= crit * se) ++covered;
        const double t = se > 0.0 ? d.estimate / se
                                  : (d.estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        if (student_t_two_sided_p(t, d.df) < cfg.alpha) ++rejected;
      }
      SeKindSummary ks;
      ks.kind = kind;
      const Moments sm = moments(ses);
      ks.mean_se = {sm.mean, sm.sd / std::sqrt(n)};
      const double ratio = em.sd > 0.0 ? sm.mean / em.sd : 0.0;
      const double rel_mean = sm.mean > 0.0 ? ks.mean_se.mc_se / sm.mean : 0.0;
      const double rel_sd = em.sd > 0.0 ? s.empirical_sd.mc_se / em.sd : 0.0;
      ks.calibration = {ratio, ratio * std::sqrt(rel_mean * rel_mean + rel_sd * rel_sd)};
      ks.coverage = proportion(covered, ok.size());
      ks.rejection = proportion(rejected, ok.size());
      if (kind == s.inference_se) {
        s.coverage = ks.coverage;
        s.rejection = ks.rejection;
      }
      s.se_kinds.push_back(ks);
    }
    report.methods.push_back(std::move(s));
  }
  return report;
}

}  // namespace prepost
