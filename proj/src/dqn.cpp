#include "qdec/dqn.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "qdec/checkpoint.hpp"
#include "qdec/kernels.hpp"
#include "qdec/ops.hpp"

namespace qdec {

namespace {

void require_frozen(const Seq2SeqParams& model, const char* who) {
  if (!model.frozen)
    throw std::logic_error(std::string(who) + ": seq2seq parameters must be frozen");
}

double anneal_epsilon(const DqnTrainConfig& cfg, std::size_t global_step) {
  if (cfg.epsilon_anneal_steps == 0 || global_step >= cfg.epsilon_anneal_steps)
    return cfg.epsilon_final;
  const double frac =
      static_cast<double>(global_step) / static_cast<double>(cfg.epsilon_anneal_steps);
  return cfg.epsilon_start + (cfg.epsilon_final - cfg.epsilon_start) * frac;
}

Vec mean_pool(const std::vector<Vec>& outputs) {
  Vec pooled(outputs[0].size(), 0.0);
  for (const Vec& v : outputs)
    kern::active().axpy(1.0, v.data(), pooled.data(), pooled.size());
  kern::active().scale(pooled.data(), 1.0 / static_cast<double>(outputs.size()),
                       pooled.size());
  return pooled;
}

void accumulate_lstm(LstmParams& into, const LstmParams& from) {
  const auto& k = kern::active();
  k.axpy(1.0, from.w_x.data(), into.w_x.data(), into.w_x.size());
  k.axpy(1.0, from.w_h.data(), into.w_h.data(), into.w_h.size());
  k.axpy(1.0, from.bias.data(), into.bias.data(), into.bias.size());
}

}  // namespace

QNetParams QNetParams::init(std::size_t hidden_dim, double init_halfwidth, Rng& rng) {
  QNetParams q;
  q.hidden_dim = hidden_dim;
  q.bilstm = BiLstmParams::init(hidden_dim, hidden_dim, init_halfwidth, rng);
  q.position_w = init_uniform_vec(2 * hidden_dim, init_halfwidth, rng);
  q.position_b = rng.uniform(-init_halfwidth, init_halfwidth);
  q.noop_w = init_uniform_vec(2 * hidden_dim, init_halfwidth, rng);
  q.noop_b = rng.uniform(-init_halfwidth, init_halfwidth);
  return q;
}

QNetParams QNetParams::zeros_like(const QNetParams& other) {
  QNetParams q;
  q.hidden_dim = other.hidden_dim;
  q.bilstm = BiLstmParams::zeros(other.hidden_dim, other.hidden_dim);
  q.position_w = Vec(2 * other.hidden_dim, 0.0);
  q.position_b = 0.0;
  q.noop_w = Vec(2 * other.hidden_dim, 0.0);
  q.noop_b = 0.0;
  return q;
}

std::vector<std::span<double>> param_spans(QNetParams& q) {
  return {q.bilstm.forward.w_x.flat(),  q.bilstm.forward.w_h.flat(),
          std::span<double>(q.bilstm.forward.bias), q.bilstm.backward.w_x.flat(),
          q.bilstm.backward.w_h.flat(), std::span<double>(q.bilstm.backward.bias),
          std::span<double>(q.position_w), std::span<double>(&q.position_b, 1),
          std::span<double>(q.noop_w),     std::span<double>(&q.noop_b, 1)};
}

std::vector<std::span<const double>> param_spans(const QNetParams& q) {
  return {q.bilstm.forward.w_x.flat(),  q.bilstm.forward.w_h.flat(),
          std::span<const double>(q.bilstm.forward.bias), q.bilstm.backward.w_x.flat(),
          q.bilstm.backward.w_h.flat(), std::span<const double>(q.bilstm.backward.bias),
          std::span<const double>(q.position_w), std::span<const double>(&q.position_b, 1),
          std::span<const double>(q.noop_w),     std::span<const double>(&q.noop_b, 1)};
}

std::size_t param_count(const QNetParams& q) {
  std::size_t total = 0;
  for (const auto& s : param_spans(q)) total += s.size();
  return total;
}

namespace {

// Memo of encode() results per source sentence. Encoding a frozen model is
// a pure function, so cached states are bit-identical to fresh ones; a
// training run revisits the same few hundred sources constantly.
class EncoderCache {
 public:
  explicit EncoderCache(const Seq2SeqParams& model) : model_(&model) {}

  const LstmState& get(const Sentence& source) {
    auto it = memo_.find(source);
    if (it != memo_.end()) return it->second;
    return memo_.emplace(source, encode(*model_, source)).first->second;
  }

 private:
  const Seq2SeqParams* model_;
  std::map<Sentence, LstmState> memo_;
};

struct QForwardWork {
  QForwardResult result;
  std::vector<Vec> bilstm_inputs;
  std::vector<Vec> bilstm_outputs;
  BiLstmTrace bilstm_trace;
  Vec pooled;
};

QForwardWork q_forward_traced(const QNetParams& qnet, const Seq2SeqParams& model,
                              const DqnState& state, bool keep_trace,
                              EncoderCache* cache = nullptr) {
  if (state.decoded.empty()) throw std::invalid_argument("q_forward: empty decoded sentence");
  require_frozen(model, "q_forward");

  QForwardWork work;
  const LstmState encoder_final =
      cache ? cache->get(state.source) : encode(model, state.source);
  work.result.trace = decode_forward(model, encoder_final, state.decoded);
  work.bilstm_inputs = work.result.trace.decoder_hiddens;
  work.bilstm_outputs =
      bilstm_forward(qnet.bilstm, work.bilstm_inputs, encoder_final, encoder_final,
                     keep_trace ? &work.bilstm_trace : nullptr);

  const std::size_t steps = work.bilstm_outputs.size();
  const auto& k = kern::active();
  work.result.q_values.resize(steps + 1);
  for (std::size_t t = 0; t < steps; ++t) {
    work.result.q_values[t] =
        k.dot(qnet.position_w.data(), work.bilstm_outputs[t].data(), qnet.position_w.size()) +
        qnet.position_b;
  }
  work.pooled = mean_pool(work.bilstm_outputs);
  work.result.q_values[steps] =
      k.dot(qnet.noop_w.data(), work.pooled.data(), qnet.noop_w.size()) + qnet.noop_b;
  return work;
}

}  // namespace

QForwardResult q_forward(const QNetParams& qnet, const Seq2SeqParams& model,
                         const DqnState& state) {
  return q_forward_traced(qnet, model, state, false).result;
}

ActionChoice select_action(const Vec& q_values, double epsilon,
                           std::span<const std::size_t> error_positions,
                           double error_bias_weight, Rng& rng) {
  if (q_values.size() < 2)
    throw std::invalid_argument("select_action: need at least one position plus no-op");
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("select_action: epsilon must lie in [0, 1]");
  const std::size_t noop_index = q_values.size() - 1;

  std::size_t picked;
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    Vec weights(q_values.size(), 1.0);
    for (std::size_t pos : error_positions)
      if (pos < noop_index) weights[pos] = error_bias_weight;
    picked = rng.categorical(weights);
  } else {
    picked = argmax_lowest(q_values);
  }

  ActionChoice choice;
  if (picked == noop_index) {
    choice.kind = ActionChoice::Kind::kNoop;
  } else {
    choice.kind = ActionChoice::Kind::kReplace;
    choice.position = picked;
  }
  return choice;
}

std::vector<std::size_t> compute_error_positions(const Sentence& decoded,
                                                 const Sentence& target) {
  if (target.empty()) throw std::invalid_argument("compute_error_positions: empty target");
  std::vector<std::size_t> errors;
  for (std::size_t t = 0; t < decoded.size(); ++t)
    if (t >= target.size() || decoded[t] != target[t]) errors.push_back(t);
  return errors;
}

DqnState apply_action(const DqnState& state, const ActionChoice& action,
                      const DecodeTrace& trace) {
  DqnState next = state;
  if (action.kind == ActionChoice::Kind::kNoop) return next;
  if (action.position >= state.decoded.size())
    throw std::invalid_argument("apply_action: position beyond decoded length");
  if (trace.argmax_tokens.size() != state.decoded.size())
    throw std::invalid_argument("apply_action: trace does not match state");
  next.decoded[action.position] = trace.argmax_tokens[action.position];
  return next;
}

namespace {

double compute_target_impl(const Transition& transition, const QNetParams& target_qnet,
                           const Seq2SeqParams& model, const DqnTrainConfig& config,
                           EncoderCache* cache) {
  if (transition.terminal) return static_cast<double>(transition.reward);
  const QForwardResult next =
      q_forward_traced(target_qnet, model, transition.next_state, false, cache).result;
  const double best =
      next.q_values[argmax_lowest(std::span<const double>(next.q_values))];
  return static_cast<double>(transition.reward) + config.discount * best;
}

}  // namespace

double compute_target(const Transition& transition, const QNetParams& target_qnet,
                      const Seq2SeqParams& model, const DqnTrainConfig& config) {
  return compute_target_impl(transition, target_qnet, model, config, nullptr);
}

namespace {

double dqn_loss_impl(const QNetParams& qnet, const Seq2SeqParams& model,
                     const Transition& transition, double target_q, QNetParams* grads,
                     EncoderCache* cache) {
  QForwardWork work =
      q_forward_traced(qnet, model, transition.state, grads != nullptr, cache);
  const std::size_t steps = work.bilstm_outputs.size();
  const std::size_t width = 2 * qnet.hidden_dim;
  const auto& k = kern::active();

  std::size_t action_index;
  if (transition.action.kind == ActionChoice::Kind::kNoop) {
    action_index = steps;
  } else {
    action_index = transition.action.position;
    if (action_index >= steps)
      throw std::invalid_argument("dqn_loss: action does not fit the state");
  }

  const double residual = work.result.q_values[action_index] - target_q;
  if (!grads) return residual * residual;

  const double d_q = 2.0 * residual;
  std::vector<Vec> d_outputs(steps, Vec(width, 0.0));
  if (transition.action.kind == ActionChoice::Kind::kNoop) {
    k.axpy(d_q, work.pooled.data(), grads->noop_w.data(), width);
    grads->noop_b += d_q;
    const double per_step = d_q / static_cast<double>(steps);
    for (std::size_t t = 0; t < steps; ++t)
      k.axpy(per_step, qnet.noop_w.data(), d_outputs[t].data(), width);
  } else {
    k.axpy(d_q, work.bilstm_outputs[action_index].data(), grads->position_w.data(), width);
    grads->position_b += d_q;
    k.axpy(d_q, qnet.position_w.data(), d_outputs[action_index].data(), width);
  }

  // Gradients stop here: d_inputs would flow into the frozen decoder.
  BiLstmBackwardResult back = bilstm_backward(qnet.bilstm, work.bilstm_trace, d_outputs);
  accumulate_lstm(grads->bilstm.forward, back.grads.forward);
  accumulate_lstm(grads->bilstm.backward, back.grads.backward);
  return residual * residual;
}

}  // namespace

double dqn_loss(const QNetParams& qnet, const Seq2SeqParams& model,
                const Transition& transition, double target_q, QNetParams* grads) {
  return dqn_loss_impl(qnet, model, transition, target_q, grads, nullptr);
}

void dqn_gradient_step(QNetParams& qnet, const Seq2SeqParams& model,
                       const Transition& transition, double target_q, AdaGrad& optimizer,
                       double clip_threshold) {
  QNetParams grads = QNetParams::zeros_like(qnet);
  dqn_loss(qnet, model, transition, target_q, &grads);
  auto grad_spans = param_spans(grads);
  clip_gradient_norm(grad_spans, clip_threshold);
  std::vector<std::span<const double>> grad_views(grad_spans.begin(), grad_spans.end());
  optimizer.step(param_spans(qnet), grad_views);
}

namespace {

// One replay-driven update: minibatch_size samples, averaged gradients.
void replay_update(QNetParams& qnet, const QNetParams& target_net,
                   const Seq2SeqParams& model, const ReplayMemory& replay,
                   const DqnTrainConfig& config, AdaGrad& optimizer, Rng& rng,
                   EncoderCache* cache) {
  QNetParams grads = QNetParams::zeros_like(qnet);
  const std::size_t batch = std::max<std::size_t>(1, config.minibatch_size);
  for (std::size_t b = 0; b < batch; ++b) {
    const Transition& sampled = replay.sample(rng);
    const double target_q = compute_target_impl(sampled, target_net, model, config, cache);
    dqn_loss_impl(qnet, model, sampled, target_q, &grads, cache);
  }
  auto grad_spans = param_spans(grads);
  if (batch > 1) {
    const double inv = 1.0 / static_cast<double>(batch);
    for (auto& span : grad_spans) kern::active().scale(span.data(), inv, span.size());
  }
  clip_gradient_norm(grad_spans, config.clip_threshold);
  std::vector<std::span<const double>> grad_views(grad_spans.begin(), grad_spans.end());
  optimizer.step(param_spans(qnet), grad_views);
}

}  // namespace

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayMemory: capacity must be positive");
}

void ReplayMemory::store(Transition transition) {
  if (buffer_.size() < capacity_) {
    buffer_.push_back(std::move(transition));
    return;
  }
  buffer_[head_] = std::move(transition);  // overwrite the oldest
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayMemory::sample(Rng& rng) const {
  if (buffer_.empty()) throw std::logic_error("ReplayMemory::sample: empty memory");
  return buffer_[rng.uniform_int(buffer_.size())];
}

const Transition& ReplayMemory::at(std::size_t i) const {
  if (i >= buffer_.size()) throw std::invalid_argument("ReplayMemory::at: index out of range");
  return buffer_[(head_ + i) % buffer_.size()];
}

std::pair<QNetParams, DqnTrainLog> train_dqn(const Seq2SeqParams& model,
                                             const std::vector<SentencePair>& corpus,
                                             const DqnTrainConfig& config, Rng& rng,
                                             const std::vector<SentencePair>& validation,
                                             std::vector<Transition>* transition_log,
                                             std::vector<Transition>* final_replay) {
  require_frozen(model, "train_dqn");
  if (corpus.empty()) throw std::invalid_argument("train_dqn: empty corpus");
  for (const auto& pair : corpus)
    if (pair.source.empty() || pair.target.empty())
      throw std::invalid_argument("train_dqn: empty sentence in corpus");

  QNetParams qnet = QNetParams::init(model.hidden_dim, config.init_range, rng);
  QNetParams target_net = qnet;
  AdaGrad optimizer(config.optimizer, param_count(qnet));
  ReplayMemory replay(config.replay_capacity);
  DqnTrainLog log;
  QNetParams best_qnet = qnet;
  double best_validation = -1.0;
  EncoderCache cache(model);

  std::size_t global_step = 0;
  double epsilon = config.epsilon_start;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double reward_sum = 0.0;
    double bleu_sum = 0.0;
    for (const SentencePair& pair : corpus) {
      DqnState state{pair.source, decoded_sentence(greedy_decode(model, pair.source,
                                                                 config.max_length))};
      double prev_bleu = smoothed_bleu(state.decoded, pair.target, config.bleu);

      EpisodeStats stats;
      stats.epoch = epoch;
      stats.target_length = pair.target.size();
      const std::size_t budget = config.episode_length_multiplier * pair.target.size();
      for (std::size_t step = 0; step < budget; ++step) {
        epsilon = anneal_epsilon(config, global_step);
        const QForwardResult fwd =
            q_forward_traced(qnet, model, state, false, &cache).result;
        const auto errors = compute_error_positions(state.decoded, pair.target);
        ActionChoice action =
            select_action(fwd.q_values, epsilon, errors, config.error_bias_weight, rng);
        if (action.kind == ActionChoice::Kind::kReplace)
          action.new_token = fwd.trace.argmax_tokens[action.position];

        const DqnState next = apply_action(state, action, fwd.trace);
        const double bleu = smoothed_bleu(next.decoded, pair.target, config.bleu);
        const int reward = reward_from_bleu(prev_bleu, bleu, config.reward);
        const bool terminal = bleu > config.bleu_threshold;

        Transition transition{state, action, reward, next, bleu, terminal};
        if (transition_log) transition_log->push_back(transition);
        replay.store(std::move(transition));

        replay_update(qnet, target_net, model, replay, config, optimizer, rng, &cache);

        ++global_step;
        if (config.target_sync_period > 0 && global_step % config.target_sync_period == 0)
          target_net = qnet;

        stats.steps += 1;
        stats.total_reward += reward;
        stats.final_bleu = bleu;
        state = next;
        prev_bleu = bleu;
        if (terminal) {
          stats.terminated_early = stats.steps < budget;
          break;
        }
      }
      reward_sum += static_cast<double>(stats.total_reward);
      bleu_sum += stats.final_bleu;
      log.episodes.push_back(std::move(stats));
    }
    DqnEpochLog epoch_log;
    epoch_log.mean_episode_reward = reward_sum / static_cast<double>(corpus.size());
    epoch_log.mean_final_bleu = bleu_sum / static_cast<double>(corpus.size());
    epoch_log.epsilon = epsilon;
    if (!validation.empty()) {
      double v = 0.0;
      for (const auto& pair : validation) {
        const Sentence decoded = decode_iterative(qnet, model, pair.source, 0.0, config);
        v += smoothed_bleu(decoded, pair.target, config.bleu);
      }
      epoch_log.validation_bleu = v / static_cast<double>(validation.size());
      if (epoch_log.validation_bleu > best_validation) {
        best_validation = epoch_log.validation_bleu;
        best_qnet = qnet;
        log.selected_epoch = epoch + 1;
      }
    }
    log.epochs.push_back(epoch_log);
  }

  if (final_replay) {
    final_replay->clear();
    for (std::size_t i = 0; i < replay.size(); ++i) final_replay->push_back(replay.at(i));
  }
  if (!validation.empty()) return {std::move(best_qnet), std::move(log)};
  log.selected_epoch = config.epochs;
  return {std::move(qnet), std::move(log)};
}

Sentence decode_iterative(const QNetParams& qnet, const Seq2SeqParams& model,
                          const Sentence& source, double epsilon,
                          const DqnTrainConfig& config, Rng* rng) {
  require_frozen(model, "decode_iterative");
  if (epsilon > 0.0 && rng == nullptr)
    throw std::invalid_argument("decode_iterative: exploration needs a random source");

  DqnState state{source, decoded_sentence(greedy_decode(model, source, config.max_length))};
  EncoderCache cache(model);
  const std::size_t budget = config.episode_length_multiplier * state.decoded.size();
  for (std::size_t step = 0; step < budget; ++step) {
    const QForwardResult fwd = q_forward_traced(qnet, model, state, false, &cache).result;
    std::size_t picked;
    if (epsilon > 0.0 && rng->uniform() < epsilon) {
      picked = rng->uniform_int(fwd.q_values.size());
    } else {
      picked = argmax_lowest(fwd.q_values);
    }
    ActionChoice action;
    if (picked + 1 == fwd.q_values.size()) {
      action.kind = ActionChoice::Kind::kNoop;
    } else {
      action.kind = ActionChoice::Kind::kReplace;
      action.position = picked;
      action.new_token = fwd.trace.argmax_tokens[picked];
    }

    const DqnState next = apply_action(state, action, fwd.trace);
    if (epsilon == 0.0 && next == state) break;  // greedy fixed point; nothing can change
    state = next;
  }
  return state.decoded;
}

std::vector<std::pair<double, double>> epsilon_sweep(
    const QNetParams& qnet, const Seq2SeqParams& model,
    const std::vector<SentencePair>& testset, std::span<const double> epsilons,
    const DqnTrainConfig& config, std::uint64_t eval_seed) {
  if (epsilons.empty()) throw std::invalid_argument("epsilon_sweep: empty epsilon list");
  if (testset.empty()) throw std::invalid_argument("epsilon_sweep: empty test set");

  std::vector<std::pair<double, double>> rows;
  rows.reserve(epsilons.size());
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    double bleu_sum = 0.0;
    for (std::size_t i = 0; i < testset.size(); ++i) {
      Rng sentence_rng = Rng::substream(
          eval_seed, "sweep/" + std::to_string(e) + "/" + std::to_string(i));
      const Sentence decoded =
          decode_iterative(qnet, model, testset[i].source, epsilons[e], config, &sentence_rng);
      bleu_sum += smoothed_bleu(decoded, testset[i].target, config.bleu);
    }
    rows.emplace_back(epsilons[e], bleu_sum / static_cast<double>(testset.size()));
  }
  return rows;
}

void save_qnet(const QNetParams& q, const std::filesystem::path& path) {
  Checkpoint ckpt;
  const std::size_t h = q.hidden_dim;
  ckpt.add_scalar("meta/hidden_dim", static_cast<double>(h));
  ckpt.add("bilstm/forward/w_x", q.bilstm.forward.w_x.flat(), {4 * h, h});
  ckpt.add("bilstm/forward/w_h", q.bilstm.forward.w_h.flat(), {4 * h, h});
  ckpt.add("bilstm/forward/bias", q.bilstm.forward.bias, {4 * h});
  ckpt.add("bilstm/backward/w_x", q.bilstm.backward.w_x.flat(), {4 * h, h});
  ckpt.add("bilstm/backward/w_h", q.bilstm.backward.w_h.flat(), {4 * h, h});
  ckpt.add("bilstm/backward/bias", q.bilstm.backward.bias, {4 * h});
  ckpt.add("heads/position_w", q.position_w, {2 * h});
  ckpt.add_scalar("heads/position_b", q.position_b);
  ckpt.add("heads/noop_w", q.noop_w, {2 * h});
  ckpt.add_scalar("heads/noop_b", q.noop_b);
  ckpt.save(path);
}

QNetParams load_qnet(const std::filesystem::path& path) {
  const Checkpoint ckpt = Checkpoint::load(path);
  QNetParams q;
  q.hidden_dim = static_cast<std::size_t>(ckpt.get_scalar("meta/hidden_dim"));
  const std::size_t h = q.hidden_dim;
  auto load_lstm = [&](const std::string& prefix, LstmParams& p) {
    p.input_dim = h;
    p.hidden_dim = h;
    const auto& wx = ckpt.get(prefix + "/w_x");
    const auto& wh = ckpt.get(prefix + "/w_h");
    const auto& b = ckpt.get(prefix + "/bias");
    p.w_x = Mat(4 * h, h);
    std::copy(wx.data.begin(), wx.data.end(), p.w_x.data());
    p.w_h = Mat(4 * h, h);
    std::copy(wh.data.begin(), wh.data.end(), p.w_h.data());
    p.bias = b.data;
  };
  load_lstm("bilstm/forward", q.bilstm.forward);
  load_lstm("bilstm/backward", q.bilstm.backward);
  q.position_w = ckpt.get("heads/position_w").data;
  q.position_b = ckpt.get_scalar("heads/position_b");
  q.noop_w = ckpt.get("heads/noop_w").data;
  q.noop_b = ckpt.get_scalar("heads/noop_b");
  return q;
}

}  // namespace qdec
