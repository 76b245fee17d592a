#include "csen/folds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "csen/error.hpp"

namespace csen {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over a simple combination.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  require(k >= 2, ErrorKind::parameter, "stratified_kfold needs k >= 2");
  int classes = 0;
  for (int label : labels) {
    require(label >= 0, ErrorKind::data, "negative label");
    classes = std::max(classes, label + 1);
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.test.resize(static_cast<std::size_t>(k));
  plan.train.resize(static_cast<std::size_t>(k));

  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(labels.size(), -1);
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    require(members.size() >= static_cast<std::size_t>(k), ErrorKind::data,
            "class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                " samples, fewer than k=" + std::to_string(k));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t idx : members) {
      fold_of[idx] = static_cast<int>(cursor % static_cast<std::size_t>(k));
      ++cursor;
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      auto& target = f == fold_of[i] ? plan.test : plan.train;
      target[static_cast<std::size_t>(f)].push_back(i);
    }
  }
  return plan;
}

BalancedSet balance_training_set(const FeatureDataset& train, std::uint64_t seed,
                                 double jitter_sigma) {
  require(train.size() >= 1, ErrorKind::data, "cannot balance an empty training set");
  require(jitter_sigma >= 0.0 && std::isfinite(jitter_sigma), ErrorKind::parameter,
          "jitter must be nonnegative");
  const auto counts = train.class_counts();
  const std::size_t target = *std::max_element(counts.begin(), counts.end());

  std::vector<std::vector<std::size_t>> by_class(counts.size());
  for (std::size_t i = 0; i < train.labels.size(); ++i)
    by_class[static_cast<std::size_t>(train.labels[i])].push_back(i);

  const Vector mean = train.features.colwise().mean().transpose();
  const Vector std_dev =
      ((train.features.rowwise() - mean.transpose()).colwise().squaredNorm() /
       static_cast<double>(train.size()))
          .cwiseSqrt()
          .transpose();

  BalancedSet out;
  out.original_count = static_cast<std::size_t>(train.size());
  out.origin.resize(out.original_count);
  for (std::size_t i = 0; i < out.original_count; ++i) out.origin[i] = i;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> extra_rows;
  std::vector<Vector> extra_values;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& members = by_class[c];
    if (members.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t n = members.size(); n < target; ++n) {
      const std::size_t src = members[pick(rng)];
      Vector v = train.features.row(static_cast<Index>(src)).transpose();
      if (jitter_sigma > 0.0) {
        for (Index j = 0; j < v.size(); ++j) v[j] += jitter_sigma * std_dev[j] * normal(rng);
      }
      extra_rows.push_back(src);
      extra_values.push_back(std::move(v));
    }
  }

  out.data.class_names = train.class_names;
  out.data.provenance = train.provenance;
  out.data.features.resize(train.size() + static_cast<Index>(extra_rows.size()), train.dim());
  out.data.features.topRows(train.size()) = train.features;
  out.data.labels = train.labels;
  for (std::size_t e = 0; e < extra_rows.size(); ++e) {
    out.data.features.row(train.size() + static_cast<Index>(e)) = extra_values[e].transpose();
    out.data.labels.push_back(train.labels[extra_rows[e]]);
    out.origin.push_back(extra_rows[e]);
  }
  return out;
}

}  // namespace csen
