#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "qdec/corpus.hpp"
#include "qdec/lstm.hpp"
#include "qdec/optim.hpp"
#include "qdec/rng.hpp"
#include "qdec/tensor.hpp"
#include "qdec/token.hpp"

namespace qdec {

// Encoder-decoder pair with a shared input embedding and a bias-free output
// projection. The encoder compresses the source sentence into its final
// state; the decoder runs from that state and emits a word distribution per
// step. Once frozen the parameters are read-only and all forward passes are
// pure functions.
struct Seq2SeqParams {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 0;
  std::size_t hidden_dim = 0;
  Mat embedding;   // [V x E]
  LstmParams encoder;
  LstmParams decoder;
  Mat projection;  // [V x H]
  bool frozen = false;

  static Seq2SeqParams init(std::size_t vocab_size, std::size_t embed_dim,
                            std::size_t hidden_dim, double init_halfwidth, Rng& rng);
  static Seq2SeqParams zeros_like(const Seq2SeqParams& other);

  bool operator==(const Seq2SeqParams&) const = default;
};

// Stable flattening order shared by the optimizer, gradient clipping, the
// finite-difference checker and the checkpoint format.
std::vector<std::span<double>> param_spans(Seq2SeqParams& p);
std::vector<std::span<const double>> param_spans(const Seq2SeqParams& p);
std::size_t param_count(const Seq2SeqParams& p);

struct DecodeTrace {
  LstmState encoder_final;
  std::vector<Vec> decoder_hiddens;
  std::vector<Vec> probability_lists;
  Sentence argmax_tokens;  // per-step argmax, lowest token id on ties
  Sentence input_tokens;   // tokens fed to the decoder

  bool operator==(const DecodeTrace&) const = default;
};

// Final encoder state after consuming the embedded source left-to-right from
// the zero state. An EOS is appended when the source does not end with one.
LstmState encode(const Seq2SeqParams& params, const Sentence& source);

// Runs the decoder from encoder_final over the given input tokens; one
// probability list and argmax per step.
DecodeTrace decode_forward(const Seq2SeqParams& params, const LstmState& encoder_final,
                           const Sentence& decoder_inputs);

// Beam-1 autoregressive decode: step 1 consumes SOS, step t+1 consumes the
// argmax of step t; stops after emitting EOS or reaching max_length.
DecodeTrace greedy_decode(const Seq2SeqParams& params, const Sentence& source,
                          std::size_t max_length);

// The sentence a greedy trace stands for: argmax tokens with one trailing
// EOS stripped. Degenerate traces that emitted only EOS yield {EOS} so the
// result is never empty.
Sentence decoded_sentence(const DecodeTrace& trace);

// Per-connection dropout multipliers for one teacher-forced pass (0 for a
// dropped entry, 1/(1-rate) for a kept one). Dropout touches only the
// non-recurrent connections: embedded inputs and the pre-projection hidden.
struct TeacherForcedMasks {
  std::vector<Vec> encoder_input;
  std::vector<Vec> decoder_input;
  std::vector<Vec> decoder_hidden;
};

TeacherForcedMasks sample_teacher_forced_masks(const Seq2SeqParams& params,
                                               const SentencePair& pair, double rate,
                                               Rng& rng);

// Summed token cross-entropy of one teacher-forced pair (decoder inputs are
// the gold target shifted right by SOS; predictions cover target + EOS).
// Pass masks to reuse a fixed dropout draw, nullptr for no dropout. When
// grads is non-null the full backward pass accumulates into it.
double teacher_forced_loss(const Seq2SeqParams& params, const SentencePair& pair,
                           const TeacherForcedMasks* masks, Seq2SeqParams* grads);

struct PretrainConfig {
  std::size_t epochs = 30;
  AdaGradConfig optimizer;
  double clip_threshold = 15.0;
  double dropout_rate = 0.2;
  std::size_t max_length = 30;
};

struct PretrainReport {
  std::vector<double> per_epoch_cost;        // mean per-token cross-entropy
  std::vector<double> per_epoch_train_bleu;  // mean greedy-decode smoothed BLEU
};

// Shuffle-and-step supervised training, one update per sentence pair.
PretrainReport pretrain(Seq2SeqParams& params, const std::vector<SentencePair>& corpus,
                        const PretrainConfig& config, Rng& rng);

// Read-only copy for the Q-learning phase; mutating entry points reject it.
Seq2SeqParams freeze(const Seq2SeqParams& params);

void save_seq2seq(const Seq2SeqParams& params, const std::filesystem::path& path);
Seq2SeqParams load_seq2seq(const std::filesystem::path& path);

}  // namespace qdec
