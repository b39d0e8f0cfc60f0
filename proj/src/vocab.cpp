#include "qdec/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qdec {

std::vector<std::string> whitespace_tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

Vocab::Vocab() {
  add_token("<pad>");
  add_token("<sos>");
  add_token("<eos>");
  add_token("<unk>");
}

void Vocab::add_token(const std::string& token) {
  token_to_id_[token] = static_cast<TokenId>(id_to_token_.size());
  id_to_token_.push_back(token);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& sentences,
                   std::size_t max_size) {
  if (sentences.empty()) throw std::invalid_argument("Vocab::build: empty corpus");
  if (max_size <= kNumSpecialTokens)
    throw std::invalid_argument("Vocab::build: max_size must exceed the special count");

  std::map<std::string, std::size_t> freq;  // ordered map: ties fall out lexicographically
  for (const auto& sentence : sentences)
    for (const auto& token : sentence) ++freq[token];

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab vocab;
  const std::size_t keep = std::min(ranked.size(), max_size - kNumSpecialTokens);
  for (std::size_t i = 0; i < keep; ++i) vocab.add_token(ranked[i].first);
  return vocab;
}

Vocab Vocab::synthetic(std::size_t content_tokens) {
  Vocab vocab;
  for (std::size_t i = 0; i < content_tokens; ++i) {
    std::ostringstream name;
    name << 'w';
    if (i < 100) name << (i < 10 ? "00" : "0");
    name << i;
    vocab.add_token(name.str());
  }
  return vocab;
}

TokenId Vocab::encode_token(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

Sentence Vocab::encode(const std::vector<std::string>& tokens) const {
  Sentence ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) ids.push_back(encode_token(token));
  return ids;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    throw std::invalid_argument("Vocab: token id out of range");
  return id_to_token_[id];
}

std::vector<std::string> Vocab::decode(const Sentence& ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (TokenId id : ids) tokens.push_back(token(id));
  return tokens;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("Vocab::save: cannot open " + path.string());
  for (std::size_t i = kNumSpecialTokens; i < id_to_token_.size(); ++i)
    out << id_to_token_[i] << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Vocab::load: cannot open " + path.string());
  Vocab vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (vocab.token_to_id_.count(line))
      throw std::runtime_error("Vocab::load: duplicate token " + line);
    vocab.add_token(line);
  }
  return vocab;
}

}  // namespace qdec
