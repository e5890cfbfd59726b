// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/sampling.hpp"

#include "core/common.hpp"

namespace glae::sampling {

DatasetIndex DatasetIndex::build(std::span<const int> class_of_id, int K) {
  require(K >= 0, ErrorKind::invalid_argument, "DatasetIndex: K must be >= 0");
  DatasetIndex idx;
  idx.ids_by_class.resize(static_cast<size_t>(K) + 1);
  idx.counts.assign(static_cast<size_t>(K) + 1, 0);
  for (size_t i = 0; i < class_of_id.size(); ++i) {
    const int k = class_of_id[i];
    require(k >= 0 && k <= K, ErrorKind::invalid_argument,
            "DatasetIndex: class label out of range");
    idx.ids_by_class[k].push_back(static_cast<int>(i));
    ++idx.counts[k];
  }
  idx.total = static_cast<int>(class_of_id.size());
  return idx;
}

int DatasetIndex::nonempty_classes() const {
  int m = 0;
  for (int c : counts) m += (c > 0);
  return m;
}

std::vector<int> instance_balanced_indices(const DatasetIndex& index, uint64_t seed,
                                           size_t n, EpochMode mode) {
  require(index.total > 0, ErrorKind::invalid_argument,
          "instance_balanced_indices: empty dataset");
  require(n >= 1, ErrorKind::invalid_argument, "instance_balanced_indices: n must be >= 1");
  std::vector<int> all;
  all.reserve(index.total);
  for (const auto& ids : index.ids_by_class)
    all.insert(all.end(), ids.begin(), ids.end());

  Rng rng(mix_seed(seed, 0x1B5A));
  std::vector<int> out;
  out.reserve(n);
  if (mode == EpochMode::permutation) {
    while (out.size() < n) {
      rng.shuffle(all.data(), all.size());
      const size_t take = std::min(n - out.size(), all.size());
      out.insert(out.end(), all.begin(), all.begin() + take);
    }
  } else {
    for (size_t i = 0; i < n; ++i)
      out.push_back(all[rng.below(all.size())]);
  }
  return out;
}

std::vector<int> class_balanced_indices(const DatasetIndex& index, uint64_t seed, size_t n) {
  std::vector<int> nonempty;
  for (size_t k = 0; k < index.counts.size(); ++k)
    if (index.counts[k] > 0) nonempty.push_back(static_cast<int>(k));
  require(!nonempty.empty(), ErrorKind::invalid_argument,
          "class_balanced_indices: all classes empty");

  Rng rng(mix_seed(seed, 0xCB5A));
  std::vector<int> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const int k = nonempty[rng.below(nonempty.size())];
    const auto& ids = index.ids_by_class[k];
    out.push_back(ids[rng.below(ids.size())]);
  }
  return out;
}

}  // namespace glae::sampling
