#pragma once

#include <vector>

namespace qdec {

using TokenId = int;
using Sentence = std::vector<TokenId>;

// Special token ids are fixed so checkpoints stay valid across corpora
// that share a vocabulary file.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kSosId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr int kNumSpecialTokens = 4;

}  // namespace qdec
