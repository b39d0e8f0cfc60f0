#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qdec/token.hpp"

namespace qdec {

struct BleuConfig {
  std::size_t max_ngram_order = 4;
  // Add-one smoothing on the clipped-match and total counts for orders >= 2
  // so near misses keep a nonzero score; order-1 precision stays unsmoothed.
  bool smooth_higher_orders = true;
};

struct RewardConfig {
  double equality_tolerance = 1e-9;
};

// Sentence-level smoothed BLEU in [0, 1]. Geometric mean of modified n-gram
// precisions with a brevity penalty of exp(1 - |ref|/|cand|) when the
// candidate is shorter than the reference. Empty candidate scores 0; an
// empty reference is rejected.
double smoothed_bleu(std::span<const TokenId> candidate, std::span<const TokenId> reference,
                     const BleuConfig& config = {});

// Sign of the score change, gated by the equality tolerance: +1, -1 or 0.
// Both scores must lie in [0, 1].
int reward_from_bleu(double previous_score, double current_score,
                     const RewardConfig& config = {});

double corpus_average_bleu(const std::vector<std::pair<Sentence, Sentence>>& pairs,
                           const BleuConfig& config = {});

}  // namespace qdec
