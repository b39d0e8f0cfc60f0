#include "qdec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qdec {

std::vector<double> zipf_distribution(std::size_t content_vocab, double exponent) {
  if (content_vocab == 0)
    throw std::invalid_argument("zipf_distribution: vocabulary must be non-empty");
  std::vector<double> weights(content_vocab);
  double total = 0.0;
  for (std::size_t k = 0; k < content_vocab; ++k) {
    weights[k] = std::pow(static_cast<double>(k + 1), -exponent);
    total += weights[k];
  }
  for (double& w : weights) w /= total;
  return weights;
}

std::vector<SentencePair> synthesize_corpus(const SynthSpec& spec, Rng& rng) {
  if (spec.min_length == 0 || spec.min_length > spec.max_length)
    throw std::invalid_argument("synthesize_corpus: bad length range");
  if (spec.content_vocab == 0)
    throw std::invalid_argument("synthesize_corpus: vocabulary must be non-empty");

  const std::vector<double> dist = zipf_distribution(spec.content_vocab, spec.zipf_exponent);
  std::vector<SentencePair> pairs;
  pairs.reserve(spec.pair_count);
  std::set<Sentence> seen;
  while (pairs.size() < spec.pair_count) {
    const std::size_t len =
        spec.min_length + rng.uniform_int(spec.max_length - spec.min_length + 1);
    Sentence sentence(len);
    for (auto& tok : sentence)
      tok = static_cast<TokenId>(kNumSpecialTokens + rng.categorical(dist));
    if (spec.unique_sources && !seen.insert(sentence).second) continue;
    pairs.push_back(SentencePair{sentence, sentence});
  }
  return pairs;
}

SplitIndices split_indices(std::size_t pair_count, const SplitSpec& spec, Rng& rng) {
  const auto validation =
      static_cast<std::size_t>(std::llround(spec.validation_fraction * pair_count));
  const auto unseen =
      static_cast<std::size_t>(std::llround(spec.unseen_fraction * pair_count));
  const std::size_t seen = spec.seen_test_size == 0 ? unseen : spec.seen_test_size;
  if (validation + unseen >= pair_count)
    throw std::invalid_argument("split_indices: not enough pairs for the requested splits");
  const std::size_t train = pair_count - validation - unseen;
  if (seen > train)
    throw std::invalid_argument("split_indices: seen test larger than the training split");

  std::vector<std::size_t> order(pair_count);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  SplitIndices idx;
  idx.train.assign(order.begin(), order.begin() + train);
  idx.validation.assign(order.begin() + train, order.begin() + train + validation);
  idx.unseen_test.assign(order.begin() + train + validation, order.end());

  std::vector<std::size_t> train_copy = idx.train;
  rng.shuffle(train_copy);
  idx.seen_test.assign(train_copy.begin(), train_copy.begin() + seen);
  return idx;
}

DatasetSplits materialize_splits(const std::vector<SentencePair>& pairs,
                                 const SplitIndices& indices) {
  auto pick = [&pairs](const std::vector<std::size_t>& idx) {
    std::vector<SentencePair> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
      if (i >= pairs.size())
        throw std::invalid_argument("materialize_splits: index out of range");
      out.push_back(pairs[i]);
    }
    return out;
  };
  DatasetSplits splits;
  splits.train = pick(indices.train);
  splits.validation = pick(indices.validation);
  splits.seen_test = pick(indices.seen_test);
  splits.unseen_test = pick(indices.unseen_test);
  return splits;
}

DatasetSplits split_dataset(const std::vector<SentencePair>& pairs, const SplitSpec& spec,
                            Rng& rng) {
  return materialize_splits(pairs, split_indices(pairs.size(), spec, rng));
}

void write_corpus(const std::filesystem::path& path, const std::vector<Sentence>& sentences,
                  const Vocab& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_corpus: cannot open " + path.string());
  for (const Sentence& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out << ' ';
      out << vocab.token(s[i]);
    }
    out << '\n';
  }
}

std::vector<Sentence> read_corpus(const std::filesystem::path& path, const Vocab& vocab,
                                  std::size_t max_length) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_corpus: cannot open " + path.string());
  std::vector<Sentence> sentences;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = whitespace_tokenize(line);
    if (tokens.empty()) continue;
    if (tokens.size() > max_length) {
      std::ostringstream msg;
      msg << "read_corpus: line " << line_no << " exceeds max length " << max_length;
      throw std::invalid_argument(msg.str());
    }
    sentences.push_back(vocab.encode(tokens));
  }
  return sentences;
}

void write_split_manifest(const std::filesystem::path& path, const SplitIndices& indices) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_split_manifest: cannot open " + path.string());
  auto emit = [&out](const char* name, const std::vector<std::size_t>& idx) {
    out << name << ':';
    for (std::size_t i : idx) out << ' ' << i;
    out << '\n';
  };
  emit("train", indices.train);
  emit("validation", indices.validation);
  emit("seen_test", indices.seen_test);
  emit("unseen_test", indices.unseen_test);
}

SplitIndices read_split_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_split_manifest: cannot open " + path.string());
  SplitIndices indices;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string name = line.substr(0, colon);
    std::istringstream rest(line.substr(colon + 1));
    std::vector<std::size_t> idx;
    std::size_t v;
    while (rest >> v) idx.push_back(v);
    if (name == "train")
      indices.train = std::move(idx);
    else if (name == "validation")
      indices.validation = std::move(idx);
    else if (name == "seen_test")
      indices.seen_test = std::move(idx);
    else if (name == "unseen_test")
      indices.unseen_test = std::move(idx);
    else
      throw std::runtime_error("read_split_manifest: unknown split " + name);
  }
  return indices;
}

}  // namespace qdec
