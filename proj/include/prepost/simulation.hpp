#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prepost/estimators.hpp"
#include "prepost/trial_data.hpp"
#include "prepost/variance_theory.hpp"

namespace prepost {

struct ScenarioConfig {
  PopulationParams params;
  DesignSize design;
  std::string label;

  /// Throws std::invalid_argument for bad params or an arm with fewer than 2 subjects.
  void validate() const;
  Population population() const { return params.homogeneous() ? Population::Homogeneous : Population::Heterogeneous; }
};

enum class Preset { Homogeneous, HetBalanced, HetUnbalanced, NullHomogeneous, NullHetUnbalanced };

/// homogeneous, het-balanced, het-unbalanced, null-homogeneous, null-het-unbalanced
std::string_view preset_name(Preset p);
std::optional<Preset> parse_preset(std::string_view name);
inline constexpr Preset kAllPresets[] = {Preset::Homogeneous, Preset::HetBalanced, Preset::HetUnbalanced,
                                         Preset::NullHomogeneous, Preset::NullHetUnbalanced};

/// Baseline N(88, 14^2); follow-up SD 15 in both arms; control follow-up
/// mean 86, treatment 83 (86 for the null presets); rho 0.9, or 0.9 / 0.7 by
/// arm for the heterogeneous presets; 90 + 90 subjects, or 60 + 120.
ScenarioConfig preset(Preset p);
/// Throws std::invalid_argument for an unknown name.
ScenarioConfig preset(std::string_view name);

/// Bivariate normal draws per arm through the Cholesky factor of the arm
/// covariance. Controls come first with ids c0001.., then treated t0001...
TrialDataset generate_trial(const ScenarioConfig& cfg, std::uint64_t seed);

struct MCConfig {
  ScenarioConfig scenario;
  std::vector<MethodId> methods;  // empty: methods_for(scenario population)
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  /// SE used for the headline coverage and rejection rate; methods absent
  /// here use default_inference_se for the scenario's population.
  std::map<MethodId, SeKind> inference_se;
  FitOptions fit;
  unsigned threads = 0;

  void validate() const;
};

/// A Monte Carlo summary with its own standard error.
struct McValue {
  double value = 0.0;
  double mc_se = 0.0;
};

struct SeKindSummary {
  SeKind kind = SeKind::Model;
  McValue mean_se;
  McValue calibration;  // mean SE / empirical SD
  McValue coverage;     // (1 - alpha) t interval covers the true tau
  McValue rejection;    // two-sided test of tau = 0 at level alpha
};

struct MethodSummary {
  MethodId method = MethodId::AnovaPost;
  SeKind inference_se = SeKind::Model;
  std::size_t successes = 0;
  std::size_t failures = 0;
  McValue mean_estimate;
  McValue bias;
  McValue empirical_sd;
  McValue coverage;   // for inference_se
  McValue rejection;  // for inference_se
  std::vector<SeKindSummary> se_kinds;
  std::optional<double> oracle_sd;  // sqrt of the unconditional variance when a formula applies

  const SeKindSummary* find(SeKind kind) const;
};

struct MCReport {
  std::string scenario;
  double true_tau = 0.0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::vector<MethodSummary> methods;

  const MethodSummary* find(MethodId m) const;
};

/// Replication r analyzes generate_trial(scenario, derive_stream_seed(seed, r)).
/// A method that throws in a replication is counted as a failure; more than
/// 1% failures for any method throws NumericError. Output depends only on
/// the config, not on the thread count.
MCReport run_mc(const MCConfig& cfg);

}  // namespace prepost
