#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "qdec/bilstm.hpp"
#include "qdec/bleu.hpp"
#include "qdec/optim.hpp"
#include "qdec/rng.hpp"
#include "qdec/seq2seq.hpp"
#include "qdec/token.hpp"

namespace qdec {

// One Q-learning state: the source sentence plus the current decode.
struct DqnState {
  Sentence source;
  Sentence decoded;

  bool operator==(const DqnState&) const = default;
};

// Bidirectional LSTM over the decoder's hidden vectors with a shared linear
// head per position and a mean-pooled head for the keep-as-is action. Shared
// heads let one network score sentences of any length.
struct QNetParams {
  std::size_t hidden_dim = 0;
  BiLstmParams bilstm;  // input dim = hidden_dim, hidden dim = hidden_dim
  Vec position_w;       // [2H]
  double position_b = 0.0;
  Vec noop_w;           // [2H]
  double noop_b = 0.0;

  static QNetParams init(std::size_t hidden_dim, double init_halfwidth, Rng& rng);
  static QNetParams zeros_like(const QNetParams& other);

  bool operator==(const QNetParams&) const = default;
};

std::vector<std::span<double>> param_spans(QNetParams& q);
std::vector<std::span<const double>> param_spans(const QNetParams& q);
std::size_t param_count(const QNetParams& q);

struct ActionChoice {
  enum class Kind { kReplace, kNoop };
  Kind kind = Kind::kNoop;
  std::size_t position = 0;  // valid when kind == kReplace
  TokenId new_token = -1;    // top-1 word of that position's probability list

  bool operator==(const ActionChoice&) const = default;
};

struct Transition {
  DqnState state;
  ActionChoice action;
  int reward = 0;  // in {-1, 0, +1}
  DqnState next_state;
  double next_bleu = 0.0;
  bool terminal = false;  // next_bleu > bleu_threshold
};

// Bounded FIFO of transitions with uniform sampling.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void store(Transition transition);
  const Transition& sample(Rng& rng) const;  // empty memory -> logic_error

  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Index 0 is the oldest surviving transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // insertion point once full
  std::vector<Transition> buffer_;
};

struct DqnTrainConfig {
  double discount = 0.95;
  double bleu_threshold = 0.92;
  double epsilon_start = 1.0;
  double epsilon_final = 0.1;
  std::size_t epsilon_anneal_steps = 10000;
  double error_bias_weight = 3.0;
  std::size_t target_sync_period = 100;
  std::size_t episode_length_multiplier = 2;
  std::size_t replay_capacity = 50000;
  std::size_t minibatch_size = 1;  // replay samples averaged per update
  std::size_t epochs = 10;
  std::size_t max_length = 30;
  double clip_threshold = 15.0;
  double init_range = 0.15;
  AdaGradConfig optimizer;
  BleuConfig bleu;
  RewardConfig reward;
};

struct QForwardResult {
  Vec q_values;      // one per decoded position plus the trailing no-op entry
  DecodeTrace trace; // candidate replacement words are its argmax tokens
};

// Scores every action for one state: the frozen encoder-decoder supplies the
// per-position hidden vectors and candidate words, the bidirectional LSTM
// (both directions started from the encoder's final state) summarizes them,
// and the heads map position t to q[t] and the pooled summary to q[T].
QForwardResult q_forward(const QNetParams& qnet, const Seq2SeqParams& model,
                         const DqnState& state);

// Epsilon-greedy over the q-values. Greedy picks the argmax (lowest index on
// ties); the exploration branch samples positions in error_positions with
// weight `error_bias_weight` and every other action, no-op included, with
// weight 1.
ActionChoice select_action(const Vec& q_values, double epsilon,
                           std::span<const std::size_t> error_positions,
                           double error_bias_weight, Rng& rng);

// Positions where the decode disagrees with the target, counting any
// overhang beyond the target's length as wrong.
std::vector<std::size_t> compute_error_positions(const Sentence& decoded,
                                                 const Sentence& target);

// Replace edits one position with the trace's argmax token; no-op returns
// the state unchanged. The source sentence is never touched.
DqnState apply_action(const DqnState& state, const ActionChoice& action,
                      const DecodeTrace& trace);

// Bellman target: the raw reward at terminal transitions, otherwise
// reward + discount * max_a Q(next_state, a) under the target network.
double compute_target(const Transition& transition, const QNetParams& target_qnet,
                      const Seq2SeqParams& model, const DqnTrainConfig& config);

// (target_q - Q(state, action))^2 for one transition; accumulates dloss/dθ
// into `grads` when non-null. Gradients stop at the decoder hidden vectors;
// the encoder-decoder parameters receive none.
double dqn_loss(const QNetParams& qnet, const Seq2SeqParams& model,
                const Transition& transition, double target_q, QNetParams* grads);

// Squared-error step on the taken action's q-value: dqn_loss gradients,
// clipped, then one optimizer update.
void dqn_gradient_step(QNetParams& qnet, const Seq2SeqParams& model,
                       const Transition& transition, double target_q, AdaGrad& optimizer,
                       double clip_threshold);

struct DqnEpochLog {
  double mean_episode_reward = 0.0;  // mean over episodes of summed reward
  double mean_final_bleu = 0.0;
  double epsilon = 0.0;          // value after the epoch's last step
  double validation_bleu = -1.0;  // -1 when no validation set was given
};

struct EpisodeStats {
  std::size_t epoch = 0;
  std::size_t target_length = 0;
  std::size_t steps = 0;
  bool terminated_early = false;
  double final_bleu = 0.0;
  int total_reward = 0;
};

struct DqnTrainLog {
  std::vector<DqnEpochLog> epochs;
  std::vector<EpisodeStats> episodes;
  std::size_t selected_epoch = 0;  // 1-based epoch of the returned network
};

// Full training run per the iterative-editing scheme: each sentence pair
// yields one episode of 2l steps (l = target length) with epsilon-greedy
// error-biased actions, BLEU-difference rewards, replay sampling and a
// periodically synced target network. Requires frozen seq2seq parameters.
// When `validation` is non-empty the network is scored on it after every
// epoch and the best-scoring snapshot is returned; otherwise the final
// network is. `transition_log`, when given, receives a copy of every stored
// transition; `final_replay` receives the replay contents after training.
std::pair<QNetParams, DqnTrainLog> train_dqn(const Seq2SeqParams& model,
                                             const std::vector<SentencePair>& corpus,
                                             const DqnTrainConfig& config, Rng& rng,
                                             const std::vector<SentencePair>& validation = {},
                                             std::vector<Transition>* transition_log = nullptr,
                                             std::vector<Transition>* final_replay = nullptr);

// Test-time iterative decoding: greedy decode, then 2l edit steps under the
// learned policy. Exploration (epsilon > 0) draws uniformly over actions
// since no target exists to bias toward. With epsilon = 0 the rng is unused
// and the result is a deterministic function of the source.
Sentence decode_iterative(const QNetParams& qnet, const Seq2SeqParams& model,
                          const Sentence& source, double epsilon,
                          const DqnTrainConfig& config, Rng* rng = nullptr);

// Average corpus BLEU of decode_iterative per epsilon. Every sentence gets
// its own derived random stream, so results are independent of evaluation
// order.
std::vector<std::pair<double, double>> epsilon_sweep(
    const QNetParams& qnet, const Seq2SeqParams& model,
    const std::vector<SentencePair>& testset, std::span<const double> epsilons,
    const DqnTrainConfig& config, std::uint64_t eval_seed);

void save_qnet(const QNetParams& qnet, const std::filesystem::path& path);
QNetParams load_qnet(const std::filesystem::path& path);

}  // namespace qdec
