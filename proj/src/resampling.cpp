#include "prepost/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "prepost/parallel.hpp"
#include "prepost/summation.hpp"

namespace prepost {

TrialDataset stratified_resample(const TrialDataset& ds, Rng& rng) {
  std::array<std::vector<const SubjectRecord*>, 2> by_arm;
  for (const auto& r : ds.records()) by_arm[static_cast<std::size_t>(r.arm)].push_back(&r);
  std::vector<SubjectRecord> out;
  out.reserve(ds.size());
  for (const auto& arm : by_arm) {
    for (std::size_t i = 0; i < arm.size(); ++i) {
      const SubjectRecord& src = *arm[rng.below(arm.size())];
      SubjectRecord copy = src;
      copy.subject_id = src.subject_id + "#" + std::to_string(out.size());
      out.push_back(std::move(copy));
    }
  }
  return TrialDataset::from_records(std::move(out));
}

namespace {

// Linear interpolation between order statistics (the common "type 7" rule).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

BootstrapResult bootstrap_se(const TrialDataset& ds, MethodId method, std::size_t B, std::uint64_t seed,
                             const BootstrapOptions& options) {
  if (B < 100) throw std::invalid_argument("bootstrap needs at least 100 replicates, got " + std::to_string(B));
  const std::size_t max_failures = B / 10;

  std::vector<double> estimates(B);
  std::vector<std::size_t> failures(B, 0);
  parallel_for(B, options.threads, [&](std::size_t b) {
    for (std::size_t attempt = 0; attempt <= max_failures; ++attempt) {
      Rng rng(derive_stream_seed(seed, b, attempt));
      try {
        estimates[b] = fit_method(method, stratified_resample(ds, rng), options.fit).estimate;
        return;
      } catch (const std::exception&) {
        ++failures[b];
      }
    }
  });

  std::size_t redraws = 0;
  for (std::size_t f : failures) redraws += f;
  if (redraws > max_failures) {
    throw NumericError("bootstrap: " + std::to_string(redraws) + " of " + std::to_string(B + redraws) +
                       " resamples failed to fit " + std::string(method_name(method)));
  }

  CompensatedSum sum;
  for (double e : estimates) sum += e;
  const double mean = sum.value() / static_cast<double>(B);
  CompensatedSum ss;
  for (double e : estimates) ss += (e - mean) * (e - mean);

  BootstrapResult res;
  res.se = std::sqrt(ss.value() / static_cast<double>(B - 1));
  res.replicates = B;
  res.redraws = redraws;
  res.seed = seed;
  std::vector<double> sorted = estimates;
  std::sort(sorted.begin(), sorted.end());
  res.percentile_ci95 = std::array<double, 2>{quantile_sorted(sorted, 0.025), quantile_sorted(sorted, 0.975)};
  res.estimates = std::move(estimates);
  return res;
}

}  // namespace prepost
