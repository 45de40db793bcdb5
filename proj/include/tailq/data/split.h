#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "tailq/data/sample.h"

namespace tailq::data {

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

/// Seeded shuffle, then contiguous partition. Sizes are round(n * ratio) for
/// train and validation (each at least 1), the rest goes to test.
/// Throws DomainError for invalid ratios, DataError for fewer than 3 samples.
DatasetSplit split_dataset(std::span<const Sample> samples, const SplitRatios& ratios, std::uint64_t seed);

/// Longitudinal-action histogram over fixed-width bins; key is floor(a / width).
struct ActionHistogram {
  double bin_width = 0.2;
  std::map<long long, std::size_t> counts;

  std::size_t max_count() const;
};

ActionHistogram action_histogram(std::span<const Sample> samples, double bin_width);

struct OversampleResult {
  std::vector<Sample> samples;
  ActionHistogram before;
  ActionHistogram after;
};

/// Flatten-to-max rebalancing of a training split: every nonempty bin is
/// topped up to the largest bin count by duplicating its members uniformly at
/// random. The originals come first, in input order, followed by the
/// duplicates bin by bin. Throws DomainError for a nonpositive bin width.
OversampleResult oversample(std::span<const Sample> train, double bin_width, std::uint64_t seed);

}  // namespace tailq::data
