#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "qdec/corpus.hpp"
#include "qdec/rng.hpp"
#include "qdec/vocab.hpp"

using namespace qdec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qdec_corpus_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("vocabulary construction and round trips") {
  const std::vector<std::vector<std::string>> sentences = {
      {"the", "cat", "sat"}, {"the", "dog", "sat"}, {"the", "cat", "ran"}};

  SUBCASE("keeps all tokens when there is room") {
    const Vocab vocab = Vocab::build(sentences, 10);
    CHECK(vocab.size() == 9);  // 5 distinct + 4 specials
    CHECK(vocab.encode_token("the") == 4);  // most frequent first
  }

  SUBCASE("frequency ties break lexicographically") {
    // cat and sat both occur twice; dog and ran once
    const Vocab vocab = Vocab::build(sentences, 4 + 2);
    CHECK(vocab.encode_token("the") == 4);
    CHECK(vocab.encode_token("cat") == 5);  // beats "sat" on spelling
    CHECK(vocab.encode_token("sat") == kUnkId);
  }

  SUBCASE("unknown tokens map to UNK and round trips hold") {
    const Vocab vocab = Vocab::build(sentences, 20);
    const std::vector<std::string> line = {"the", "aardvark", "sat"};
    const Sentence ids = vocab.encode(line);
    CHECK(ids[1] == kUnkId);
    const Sentence in_vocab = vocab.encode({"the", "cat", "ran"});
    CHECK(vocab.decode(in_vocab) == std::vector<std::string>{"the", "cat", "ran"});
    CHECK_THROWS_AS(vocab.decode(Sentence{999}), std::invalid_argument);
    CHECK_THROWS_AS(vocab.decode(Sentence{-1}), std::invalid_argument);
  }

  SUBCASE("empty corpus is rejected") {
    CHECK_THROWS_AS(Vocab::build({}, 10), std::invalid_argument);
  }

  SUBCASE("save and load") {
    const Vocab vocab = Vocab::build(sentences, 20);
    const fs::path path = temp_file("vocab.txt");
    vocab.save(path);
    const Vocab loaded = Vocab::load(path);
    CHECK(loaded.size() == vocab.size());
    CHECK(loaded.encode_token("dog") == vocab.encode_token("dog"));
  }
}

TEST_CASE("whitespace tokenization") {
  CHECK(whitespace_tokenize("  a b\tc  ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(whitespace_tokenize("") == std::vector<std::string>{});
}

TEST_CASE("synthetic corpus generation") {
  SynthSpec spec;
  spec.content_vocab = 50;
  spec.min_length = 3;
  spec.max_length = 10;
  spec.pair_count = 500;

  Rng rng(42);
  const auto pairs = synthesize_corpus(spec, rng);
  CHECK(pairs.size() == 500);
  std::set<Sentence> sources;
  for (const auto& pair : pairs) {
    CHECK(pair.source == pair.target);
    CHECK(pair.source.size() >= 3);
    CHECK(pair.source.size() <= 10);
    for (TokenId t : pair.source) {
      CHECK(t >= kNumSpecialTokens);
      CHECK(t < kNumSpecialTokens + 50);
    }
    sources.insert(pair.source);
  }
  CHECK(sources.size() == pairs.size());  // sources unique

  Rng rng2(42);
  CHECK(synthesize_corpus(spec, rng2) == pairs);
}

TEST_CASE("synthetic unigram frequencies follow the configured skew") {
  SynthSpec spec;
  spec.content_vocab = 50;
  spec.min_length = 3;
  spec.max_length = 10;
  spec.pair_count = 320000;  // about 2e6 tokens
  spec.unique_sources = false;  // measure the raw sampler
  Rng rng(7);
  const auto pairs = synthesize_corpus(spec, rng);

  std::vector<std::size_t> counts(50, 0);
  std::size_t total = 0;
  for (const auto& pair : pairs)
    for (TokenId t : pair.source) {
      ++counts[t - kNumSpecialTokens];
      ++total;
    }
  const auto expected = zipf_distribution(50, 1.0);
  for (std::size_t k = 0; k < 50; ++k) {
    const double empirical = static_cast<double>(counts[k]) / static_cast<double>(total);
    CHECK(std::abs(empirical - expected[k]) <= 0.05 * expected[k]);
  }
}

TEST_CASE("dataset splitting") {
  std::vector<SentencePair> pairs;
  for (int i = 0; i < 120; ++i) {
    const Sentence s = {static_cast<TokenId>(4 + i), static_cast<TokenId>(4 + i), 4};
    pairs.push_back(SentencePair{s, s});
  }

  SplitSpec spec;  // paper-proportional twelfths
  Rng rng(9);
  const DatasetSplits splits = split_dataset(pairs, spec, rng);
  CHECK(splits.train.size() == 100);
  CHECK(splits.validation.size() == 10);
  CHECK(splits.unseen_test.size() == 10);
  CHECK(splits.seen_test.size() == 10);

  const std::set<Sentence> train_set = [&] {
    std::set<Sentence> s;
    for (const auto& p : splits.train) s.insert(p.source);
    return s;
  }();
  for (const auto& p : splits.seen_test) CHECK(train_set.count(p.source) == 1);
  for (const auto& p : splits.unseen_test) CHECK(train_set.count(p.source) == 0);
  for (const auto& p : splits.validation) CHECK(train_set.count(p.source) == 0);

  Rng rng2(9);
  const DatasetSplits again = split_dataset(pairs, spec, rng2);
  CHECK(again.train == splits.train);
  CHECK(again.seen_test == splits.seen_test);

  SplitSpec too_big;
  too_big.validation_fraction = 0.6;
  too_big.unseen_fraction = 0.5;
  Rng rng3(1);
  CHECK_THROWS_AS(split_dataset(pairs, too_big, rng3), std::invalid_argument);
}

TEST_CASE("split shuffling permutes without loss or duplication") {
  Rng rng(31);
  const SplitIndices idx = split_indices(97, SplitSpec{}, rng);
  std::vector<std::size_t> all;
  all.insert(all.end(), idx.train.begin(), idx.train.end());
  all.insert(all.end(), idx.validation.begin(), idx.validation.end());
  all.insert(all.end(), idx.unseen_test.begin(), idx.unseen_test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  CHECK(all.size() == 97);
}

TEST_CASE("corpus file io") {
  const Vocab vocab = Vocab::synthetic(10);
  const std::vector<Sentence> sentences = {{4, 5, 6}, {7, 8}, {9, 4, 5, 6, 7}};
  const fs::path path = temp_file("corpus.txt");
  write_corpus(path, sentences, vocab);
  CHECK(read_corpus(path, vocab, 30) == sentences);

  // a sentence longer than the cap is rejected, not truncated
  CHECK_THROWS_AS(read_corpus(path, vocab, 4), std::invalid_argument);
  CHECK_THROWS_AS(read_corpus(temp_file("missing.txt"), vocab, 30), std::runtime_error);
}

TEST_CASE("split manifest io") {
  SplitIndices idx;
  idx.train = {0, 2, 4, 6};
  idx.validation = {1, 3};
  idx.seen_test = {2, 6};
  idx.unseen_test = {5, 7};
  const fs::path path = temp_file("splits.txt");
  write_split_manifest(path, idx);
  const SplitIndices loaded = read_split_manifest(path);
  CHECK(loaded.train == idx.train);
  CHECK(loaded.validation == idx.validation);
  CHECK(loaded.seen_test == idx.seen_test);
  CHECK(loaded.unseen_test == idx.unseen_test);
}
