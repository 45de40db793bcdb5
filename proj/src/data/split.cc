#include "tailq/data/split.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "tailq/error.h"

namespace tailq::data {

DatasetSplit split_dataset(std::span<const Sample> samples, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0)) {
    throw DomainError("split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw DomainError("split ratios must sum to 1");
  }
  const std::size_t n = samples.size();
  if (n < 3) throw DataError("need at least 3 samples to split, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const double nd = static_cast<double>(n);
  std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(nd * ratios.train)));
  std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(nd * ratios.validation)));
  n_train = std::min(n_train, n - 2);
  n_val = std::min(n_val, n - n_train - 1);

  DatasetSplit split;
  split.train.reserve(n_train);
  split.validation.reserve(n_val);
  split.test.reserve(n - n_train - n_val);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = samples[order[i]];
    if (i < n_train) {
      split.train.push_back(s);
    } else if (i < n_train + n_val) {
      split.validation.push_back(s);
    } else {
      split.test.push_back(s);
    }
  }
  return split;
}

std::size_t ActionHistogram::max_count() const {
  std::size_t m = 0;
  for (const auto& [bin, count] : counts) m = std::max(m, count);
  return m;
}

namespace {
long long bin_of(double a, double width) { return static_cast<long long>(std::floor(a / width)); }
}  // namespace

ActionHistogram action_histogram(std::span<const Sample> samples, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("bin width must be positive, got " + std::to_string(bin_width));
  ActionHistogram h;
  h.bin_width = bin_width;
  for (const auto& s : samples) ++h.counts[bin_of(s.action[0], bin_width)];
  return h;
}

OversampleResult oversample(std::span<const Sample> train, double bin_width, std::uint64_t seed) {
  OversampleResult result;
  result.before = action_histogram(train, bin_width);
  std::map<long long, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < train.size(); ++i) members[bin_of(train[i].action[0], bin_width)].push_back(i);

  const std::size_t target = result.before.max_count();
  result.samples.assign(train.begin(), train.end());
  std::mt19937_64 rng(seed);
  for (const auto& [bin, idx] : members) {
    std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
    for (std::size_t k = idx.size(); k < target; ++k) result.samples.push_back(train[idx[pick(rng)]]);
  }
  result.after = action_histogram(result.samples, bin_width);
  return result;
}

}  // namespace tailq::data
