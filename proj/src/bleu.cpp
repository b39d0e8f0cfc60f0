#include "qdec/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace qdec {

namespace {

struct NgramHash {
  std::size_t operator()(const std::vector<TokenId>& g) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (TokenId t : g) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(t));
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

using NgramCounts = std::unordered_map<std::vector<TokenId>, std::size_t, NgramHash>;

NgramCounts count_ngrams(std::span<const TokenId> sentence, std::size_t order) {
  NgramCounts counts;
  if (sentence.size() < order) return counts;
  std::vector<TokenId> gram(order);
  for (std::size_t i = 0; i + order <= sentence.size(); ++i) {
    std::copy(sentence.begin() + i, sentence.begin() + i + order, gram.begin());
    ++counts[gram];
  }
  return counts;
}

}  // namespace

double smoothed_bleu(std::span<const TokenId> candidate, std::span<const TokenId> reference,
                     const BleuConfig& config) {
  if (reference.empty()) throw std::invalid_argument("smoothed_bleu: empty reference");
  if (config.max_ngram_order < 1)
    throw std::invalid_argument("smoothed_bleu: max_ngram_order must be >= 1");
  if (candidate.empty()) return 0.0;

  double log_precision_sum = 0.0;
  for (std::size_t order = 1; order <= config.max_ngram_order; ++order) {
    const NgramCounts cand = count_ngrams(candidate, order);
    const NgramCounts ref = count_ngrams(reference, order);
    std::size_t clipped = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) clipped += std::min(count, it->second);
    }
    const bool smooth = config.smooth_higher_orders && order >= 2;
    const double num = static_cast<double>(clipped) + (smooth ? 1.0 : 0.0);
    const double den = static_cast<double>(total) + (smooth ? 1.0 : 0.0);
    if (num == 0.0) return 0.0;  // only reachable for unsmoothed orders
    log_precision_sum += std::log(num / den);
  }

  double log_bleu = log_precision_sum / static_cast<double>(config.max_ngram_order);
  if (candidate.size() < reference.size()) {
    log_bleu += 1.0 - static_cast<double>(reference.size()) /
                          static_cast<double>(candidate.size());
  }
  return std::exp(log_bleu);
}

int reward_from_bleu(double previous_score, double current_score,
                     const RewardConfig& config) {
  if (previous_score < 0.0 || previous_score > 1.0 || current_score < 0.0 ||
      current_score > 1.0)
    throw std::invalid_argument("reward_from_bleu: scores must lie in [0, 1]");
  const double diff = current_score - previous_score;
  if (diff > config.equality_tolerance) return 1;
  if (diff < -config.equality_tolerance) return -1;
  return 0;
}

double corpus_average_bleu(const std::vector<std::pair<Sentence, Sentence>>& pairs,
                           const BleuConfig& config) {
  if (pairs.empty()) throw std::invalid_argument("corpus_average_bleu: empty pair list");
  double total = 0.0;
  for (const auto& [candidate, reference] : pairs)
    total += smoothed_bleu(candidate, reference, config);
  return total / static_cast<double>(pairs.size());
}

}  // namespace qdec
