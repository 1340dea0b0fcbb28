#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "sveval/errors.hpp"
#include "sveval/rng.hpp"

namespace sveval {

/// Row indices of a class-balanced training set: every original row once,
/// followed by minority-class rows drawn uniformly with replacement until
/// both classes have the same count. Balanced input is returned unchanged.
inline std::vector<std::size_t> upsample_minority(std::span<const int> labels, Rng& rng) {
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? positives : negatives).push_back(i);
  if (positives.empty() || negatives.empty())
    throw DataError("upsampling needs both outcome classes");

  std::vector<std::size_t> rows(labels.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto& minority = positives.size() < negatives.size() ? positives : negatives;
  const std::size_t deficit = positives.size() < negatives.size()
                                  ? negatives.size() - positives.size()
                                  : positives.size() - negatives.size();
  rows.reserve(rows.size() + deficit);
  for (std::size_t k = 0; k < deficit; ++k) rows.push_back(minority[rng.index(minority.size())]);
  return rows;
}

}  // namespace sveval
