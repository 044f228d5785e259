#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "prepost/random.hpp"
#include "prepost/trial_data.hpp"

namespace testing {

using prepost::SubjectRecord;
using prepost::TrialDataset;

inline TrialDataset make_dataset(const std::vector<std::pair<double, double>>& control,
                                 const std::vector<std::pair<double, double>>& treated) {
  std::vector<SubjectRecord> recs;
  int k = 0;
  for (const auto& [pre, post] : control) recs.push_back({"s" + std::to_string(++k), 0, pre, post});
  for (const auto& [pre, post] : treated) recs.push_back({"s" + std::to_string(++k), 1, pre, post});
  return TrialDataset::from_records(std::move(recs));
}

// control {(1,2),(3,4)}, treatment {(2,1),(4,3)}
inline TrialDataset d4() { return make_dataset({{1, 2}, {3, 4}}, {{2, 1}, {4, 3}}); }

// Arbitrary dataset with arm-dependent location, scale and slope.
inline TrialDataset random_dataset(prepost::Rng& rng, std::size_t n0, std::size_t n1) {
  std::vector<SubjectRecord> recs;
  const double shift = 10.0 * rng.normal();
  const double scale = 0.5 + 5.0 * rng.uniform();
  const std::array<double, 2> slope{rng.normal(), rng.normal()};
  const std::array<double, 2> noise{0.2 + rng.uniform(), 0.2 + 2.0 * rng.uniform()};
  const double effect = rng.normal();
  std::size_t k = 0;
  for (int arm = 0; arm < 2; ++arm) {
    const std::size_t n = arm == 0 ? n0 : n1;
    for (std::size_t i = 0; i < n; ++i) {
      const double pre = shift + scale * rng.normal();
      const double post = shift + arm * effect + slope[static_cast<std::size_t>(arm)] * (pre - shift) +
                          noise[static_cast<std::size_t>(arm)] * rng.normal();
      recs.push_back({"r" + std::to_string(k++), arm, pre, post});
    }
  }
  return TrialDataset::from_records(std::move(recs));
}

inline TrialDataset transform(const TrialDataset& ds, double scale, double shift) {
  std::vector<SubjectRecord> recs(ds.records().begin(), ds.records().end());
  for (auto& r : recs) {
    r.y_pre = scale * r.y_pre + shift;
    r.y_post = scale * r.y_post + shift;
  }
  return TrialDataset::from_records(std::move(recs));
}

inline TrialDataset swap_arms(const TrialDataset& ds) {
  std::vector<SubjectRecord> recs(ds.records().begin(), ds.records().end());
  for (auto& r : recs) r.arm = 1 - r.arm;
  return TrialDataset::from_records(std::move(recs));
}

}  // namespace testing
