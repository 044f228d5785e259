#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prepost/estimators.hpp"
#include "prepost/trial_data.hpp"

namespace prepost {

struct ArmSummary {
  std::size_t n = 0;
  double mean_pre = 0.0;
  double mean_post = 0.0;
  double sd_pre = 0.0;
  double sd_post = 0.0;
  double correlation = 0.0;
};

struct DatasetSummary {
  std::array<ArmSummary, 2> arms;
  double grand_mean_pre = 0.0;
  std::optional<PercentChangeSummary> percent_change;  // absent when a baseline is zero
};

DatasetSummary summarize(const TrialDataset& ds);

struct ReportRow {
  MethodId method = MethodId::AnovaPost;
  std::optional<AnalysisResult> result;
  std::string error;  // set when result is empty
  std::optional<std::size_t> bootstrap_redraws;
};

struct ComparisonReport {
  DatasetSummary dataset_summary;
  std::vector<ReportRow> rows;
  std::optional<ArmResiduals> residuals_main;
  std::optional<ArmResiduals> residuals_interaction;

  const ReportRow* find(MethodId m) const;
};

struct AnalyzeOptions {
  std::vector<MethodId> methods;  // empty: methods_for(fit.population)
  FitOptions fit;
  std::optional<std::size_t> bootstrap_replicates;
  std::uint64_t bootstrap_seed = 0;
  unsigned threads = 0;
};

/// Fits each method; a method that throws yields a row carrying the error
/// message while the other rows are still produced.
ComparisonReport analyze_all(const TrialDataset& ds, const AnalyzeOptions& options = {});

}  // namespace prepost
