#pragma once

#include <filesystem>
#include <vector>

#include "qdec/rng.hpp"
#include "qdec/token.hpp"
#include "qdec/vocab.hpp"

namespace qdec {

struct SentencePair {
  Sentence source;
  Sentence target;

  bool operator==(const SentencePair&) const = default;
};

struct SynthSpec {
  std::size_t content_vocab = 50;  // number of non-special word types
  std::size_t min_length = 3;
  std::size_t max_length = 10;
  std::size_t pair_count = 500;
  double zipf_exponent = 1.0;  // word k (1-based rank) drawn with weight k^-s
  // Redraw colliding sources so the train/unseen partition is a clean
  // sentence-set split. At desk-scale densities the redraws are too rare to
  // distort the unigram skew.
  bool unique_sources = true;
};

// Regeneration pairs (target = source) over the synthetic vocabulary, with
// Zipf-skewed unigram frequencies. Sources are unique within one corpus so
// dataset splits partition cleanly into seen and unseen sentence sets.
std::vector<SentencePair> synthesize_corpus(const SynthSpec& spec, Rng& rng);

// The normalized unigram distribution the generator samples from, indexed by
// content token id minus kNumSpecialTokens.
std::vector<double> zipf_distribution(std::size_t content_vocab, double exponent);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> seen_test;  // sampled from train without replacement
  std::vector<std::size_t> unseen_test;
};

struct DatasetSplits {
  std::vector<SentencePair> train;
  std::vector<SentencePair> validation;
  std::vector<SentencePair> seen_test;
  std::vector<SentencePair> unseen_test;
};

struct SplitSpec {
  double validation_fraction = 1.0 / 12.0;
  double unseen_fraction = 1.0 / 12.0;
  // 0 means "same size as the unseen test split".
  std::size_t seen_test_size = 0;
};

SplitIndices split_indices(std::size_t pair_count, const SplitSpec& spec, Rng& rng);
DatasetSplits split_dataset(const std::vector<SentencePair>& pairs, const SplitSpec& spec,
                            Rng& rng);
DatasetSplits materialize_splits(const std::vector<SentencePair>& pairs,
                                 const SplitIndices& indices);

// Corpus file: UTF-8 text, one sentence per line, tokens space-separated.
void write_corpus(const std::filesystem::path& path, const std::vector<Sentence>& sentences,
                  const Vocab& vocab);
// Sentences longer than max_length are rejected, not truncated.
std::vector<Sentence> read_corpus(const std::filesystem::path& path, const Vocab& vocab,
                                  std::size_t max_length);

// Split manifest: one "name: idx idx ..." line per split, indices referring
// to 0-based line numbers of the corpus file.
void write_split_manifest(const std::filesystem::path& path, const SplitIndices& indices);
SplitIndices read_split_manifest(const std::filesystem::path& path);

}  // namespace qdec
