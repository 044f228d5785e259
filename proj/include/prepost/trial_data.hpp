#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prepost {

/// Raised for any input that violates the dataset schema or invariants.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SubjectRecord {
  std::string subject_id;
  int arm = 0;  // 0 = control, 1 = treatment
  double y_pre = 0.0;
  double y_post = 0.0;
};

/// Two-arm pre-post trial in wide format (one record per subject).
/// Immutable once constructed; construction validates every invariant.
class TrialDataset {
 public:
  /// Throws DataError naming the offending (1-based) row for non-binary
  /// arms, non-finite values and duplicate ids, and when either arm has
  /// fewer than two subjects.
  static TrialDataset from_records(std::vector<SubjectRecord> records);

  std::span<const SubjectRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::size_t n0() const { return counts_[0]; }
  std::size_t n1() const { return counts_[1]; }
  std::size_t arm_size(int arm) const { return counts_.at(static_cast<std::size_t>(arm)); }

 private:
  TrialDataset(std::vector<SubjectRecord> records, std::array<std::size_t, 2> counts)
      : records_(std::move(records)), counts_(counts) {}

  std::vector<SubjectRecord> records_;
  std::array<std::size_t, 2> counts_{};
};

/// Reads the `subject_id,arm,y_pre,y_post` CSV schema. Row numbers in
/// error messages count data rows from 1 (the header is not a row).
TrialDataset parse_trial_csv(std::istream& in);
TrialDataset read_trial_csv(const std::string& path);

/// Writes the same schema with round-trip precision.
void write_trial_csv(std::ostream& out, const TrialDataset& ds);

struct ArmStats {
  std::size_t n = 0;
  double mean_pre = 0.0;
  double mean_post = 0.0;
  double ss_pre = 0.0;    // sum of squared deviations about the arm mean
  double ss_post = 0.0;
  double sp_cross = 0.0;  // cross-product of pre/post deviations

  /// Pearson correlation of pre and post; 0 when either SS vanishes.
  double correlation() const;
};

struct SufficientStats {
  std::array<ArmStats, 2> arms;
  double grand_mean_pre = 0.0;  // overall baseline sample mean
  double var_pre = 0.0;         // overall baseline variance, divisor N - 1
  double p0 = 0.0;
  double p1 = 0.0;

  std::size_t n_total() const { return arms[0].n + arms[1].n; }
  /// mean_pre(treatment) - mean_pre(control)
  double baseline_imbalance() const { return arms[1].mean_pre - arms[0].mean_pre; }
  double ss_pre_within() const { return arms[0].ss_pre + arms[1].ss_pre; }
};

SufficientStats sufficient_stats(const TrialDataset& ds);

/// y_post - y_pre per subject, in record order.
std::vector<double> change_scores(const TrialDataset& ds);

/// (to - from) / from. Throws DataError when from == 0.
double percent_change(double from, double to);

struct PercentChangeSummary {
  double mean_control = 0.0;
  double mean_treatment = 0.0;
  double tau_star = 0.0;
  // Percent change is skewed and non-additive; never use it for inference.
  bool descriptive_only = true;
};

/// Throws DataError naming the subject when any baseline is zero.
PercentChangeSummary percent_change_summary(const TrialDataset& ds);

/// Long format: two rows per subject, time 0 (baseline) then time 1.
struct LongRecord {
  std::string subject_id;
  int arm = 0;
  int time = 0;
  double y = 0.0;
};

std::vector<LongRecord> to_long_format(const TrialDataset& ds);
void write_long_csv(std::ostream& out, std::span<const LongRecord> rows);

}  // namespace prepost
