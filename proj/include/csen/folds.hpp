#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csen/dataset.hpp"

namespace csen {

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> train;
  std::vector<std::vector<std::size_t>> test;
};

// Shuffles each class with the seed and deals its samples round-robin over
// the folds. Each class starts dealing where the previous class stopped, so
// remainders spread across folds.
FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

struct BalancedSet {
  FeatureDataset data;
  // Row of the input each output row came from; the first `original_count`
  // rows are the input itself, in order.
  std::vector<std::size_t> origin;
  std::size_t original_count = 0;
};

// Upsamples every class to the majority count by seeded resampling with
// replacement plus Gaussian jitter of jitter_sigma times the per-feature
// standard deviation.
BalancedSet balance_training_set(const FeatureDataset& train, std::uint64_t seed,
                                 double jitter_sigma = 0.05);

// Stable 64-bit mix of a base seed with stream identifiers.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace csen
