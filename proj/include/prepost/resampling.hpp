#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "prepost/estimators.hpp"
#include "prepost/random.hpp"
#include "prepost/trial_data.hpp"

namespace prepost {

struct BootstrapOptions {
  unsigned threads = 0;
  FitOptions fit;
};

struct BootstrapResult {
  double se = 0.0;  // SD of replicate estimates, divisor B - 1
  std::size_t replicates = 0;
  std::size_t redraws = 0;  // resamples discarded because the fit failed
  std::optional<std::array<double, 2>> percentile_ci95;
  std::uint64_t seed = 0;
  std::vector<double> estimates;  // in replicate order
};

/// Resamples subjects with replacement within each arm, keeping n0 and n1.
/// Copies of a subject get ids "<id>#<k>" with k the position in the resample.
TrialDataset stratified_resample(const TrialDataset& ds, Rng& rng);

/// Requires B >= 100. Replicate b draws from stream (seed, b, attempt); a
/// resample whose fit throws is redrawn with the next attempt. Throws
/// NumericError if more than B/10 resamples fail in total.
BootstrapResult bootstrap_se(const TrialDataset& ds, MethodId method, std::size_t B, std::uint64_t seed,
                             const BootstrapOptions& options = {});

}  // namespace prepost
