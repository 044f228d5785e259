#include "prepost/analysis.hpp"

#include <cmath>

#include "prepost/resampling.hpp"

namespace prepost {

DatasetSummary summarize(const TrialDataset& ds) {
  const auto st = sufficient_stats(ds);
  DatasetSummary out;
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& a = st.arms[j];
    const double d = static_cast<double>(a.n) - 1.0;
    out.arms[j] = {a.n, a.mean_pre, a.mean_post, std::sqrt(a.ss_pre / d), std::sqrt(a.ss_post / d), a.correlation()};
  }
  out.grand_mean_pre = st.grand_mean_pre;
  try {
    out.percent_change = percent_change_summary(ds);
  } catch (const DataError&) {
  }
  return out;
}

const ReportRow* ComparisonReport::find(MethodId m) const {
  for (const auto& r : rows) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

ComparisonReport analyze_all(const TrialDataset& ds, const AnalyzeOptions& options) {
  ComparisonReport report;
  report.dataset_summary = summarize(ds);
  const auto methods = options.methods.empty() ? methods_for(options.fit.population) : options.methods;
  for (MethodId m : methods) {
    ReportRow row;
    row.method = m;
    try {
      auto res = fit_method(m, ds, options.fit);
      if (options.bootstrap_replicates) {
        const auto boot = bootstrap_se(ds, m, *options.bootstrap_replicates, options.bootstrap_seed,
                                       BootstrapOptions{options.threads, options.fit});
        res.se_bootstrap = boot.se;
        row.bootstrap_redraws = boot.redraws;
      }
      row.result = std::move(res);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));

    try {
      if (m == MethodId::AncovaMain) report.residuals_main = ancova_residuals(m, ds);
      if (m == MethodId::AncovaInteraction) report.residuals_interaction = ancova_residuals(m, ds);
    } catch (const std::exception&) {
    }
  }
  return report;
}

}  // namespace prepost
