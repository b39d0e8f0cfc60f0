#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "qdec/token.hpp"

namespace qdec {

std::vector<std::string> whitespace_tokenize(const std::string& line);

// Token <-> id bijection with the four specials pinned at ids 0-3.
class Vocab {
 public:
  Vocab();

  // Keeps the max_size - 4 most frequent tokens (frequency ties broken by
  // lexicographic order); everything else encodes to UNK.
  static Vocab build(const std::vector<std::vector<std::string>>& sentences,
                     std::size_t max_size);

  // "w000", "w001", ... placeholder words for synthetic corpora.
  static Vocab synthetic(std::size_t content_tokens);

  std::size_t size() const { return id_to_token_.size(); }

  TokenId encode_token(const std::string& token) const;
  Sentence encode(const std::vector<std::string>& tokens) const;
  const std::string& token(TokenId id) const;  // invalid id -> invalid_argument
  std::vector<std::string> decode(const Sentence& ids) const;

  // One non-special token per line; line number = id - 4.
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

 private:
  void add_token(const std::string& token);

  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace qdec
