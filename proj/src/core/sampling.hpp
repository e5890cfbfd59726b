// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Index samplers for the two training stages. Instance-balanced sampling
// gives every sample the same draw probability (stage 1); class-balanced
// sampling gives every non-empty class the same probability and draws with
// replacement inside it (stage 2). Sequences are pure functions of
// (index, seed, n).

#ifndef GLAE_CORE_SAMPLING_HPP
#define GLAE_CORE_SAMPLING_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace glae::sampling {

struct DatasetIndex {
  std::vector<std::vector<int>> ids_by_class;  // K+1 lists of sample ids
  std::vector<int> counts;                     // N_k
  int total = 0;

  static DatasetIndex build(std::span<const int> class_of_id, int K);
  int num_classes() const { return static_cast<int>(counts.size()); }
  int nonempty_classes() const;
};

enum class EpochMode {
  permutation,  // n = N draws each id exactly once, shuffled
  draws,        // independent uniform draws with replacement
};

std::vector<int> instance_balanced_indices(const DatasetIndex& index, uint64_t seed,
                                           size_t n, EpochMode mode = EpochMode::permutation);

std::vector<int> class_balanced_indices(const DatasetIndex& index, uint64_t seed, size_t n);

}  // namespace glae::sampling

#endif
