#include "qdec/seq2seq.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "qdec/bleu.hpp"
#include "qdec/checkpoint.hpp"
#include "qdec/kernels.hpp"
#include "qdec/ops.hpp"

namespace qdec {

namespace {

void validate_ids(const Sentence& ids, std::size_t vocab_size, const char* who) {
  for (TokenId id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size)
      throw std::invalid_argument(std::string(who) + ": token id out of vocabulary");
}

Sentence with_eos(const Sentence& source) {
  Sentence src = source;
  if (src.empty() || src.back() != kEosId) src.push_back(kEosId);
  return src;
}

Vec embed(const Seq2SeqParams& p, TokenId id) {
  const double* row = p.embedding.row(static_cast<std::size_t>(id));
  return Vec(row, row + p.embed_dim);
}

void mul_inplace(Vec& v, const Vec& mask) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mask[i];
}

void accumulate(LstmParams& into, const LstmParams& from) {
  const auto& k = kern::active();
  k.axpy(1.0, from.w_x.data(), into.w_x.data(), into.w_x.size());
  k.axpy(1.0, from.w_h.data(), into.w_h.data(), into.w_h.size());
  k.axpy(1.0, from.bias.data(), into.bias.data(), into.bias.size());
}

}  // namespace

Seq2SeqParams Seq2SeqParams::init(std::size_t vocab_size, std::size_t embed_dim,
                                  std::size_t hidden_dim, double init_halfwidth, Rng& rng) {
  Seq2SeqParams p;
  p.vocab_size = vocab_size;
  p.embed_dim = embed_dim;
  p.hidden_dim = hidden_dim;
  p.embedding = init_uniform_mat(vocab_size, embed_dim, init_halfwidth, rng);
  p.encoder = LstmParams::init(embed_dim, hidden_dim, init_halfwidth, rng);
  p.decoder = LstmParams::init(embed_dim, hidden_dim, init_halfwidth, rng);
  p.projection = init_uniform_mat(vocab_size, hidden_dim, init_halfwidth, rng);
  return p;
}

Seq2SeqParams Seq2SeqParams::zeros_like(const Seq2SeqParams& other) {
  Seq2SeqParams p;
  p.vocab_size = other.vocab_size;
  p.embed_dim = other.embed_dim;
  p.hidden_dim = other.hidden_dim;
  p.embedding = Mat(other.vocab_size, other.embed_dim);
  p.encoder = LstmParams::zeros(other.embed_dim, other.hidden_dim);
  p.decoder = LstmParams::zeros(other.embed_dim, other.hidden_dim);
  p.projection = Mat(other.vocab_size, other.hidden_dim);
  return p;
}

std::vector<std::span<double>> param_spans(Seq2SeqParams& p) {
  return {p.embedding.flat(), p.encoder.w_x.flat(), p.encoder.w_h.flat(),
          std::span<double>(p.encoder.bias), p.decoder.w_x.flat(), p.decoder.w_h.flat(),
          std::span<double>(p.decoder.bias), p.projection.flat()};
}

std::vector<std::span<const double>> param_spans(const Seq2SeqParams& p) {
  return {p.embedding.flat(), p.encoder.w_x.flat(), p.encoder.w_h.flat(),
          std::span<const double>(p.encoder.bias), p.decoder.w_x.flat(),
          p.decoder.w_h.flat(), std::span<const double>(p.decoder.bias),
          p.projection.flat()};
}

std::size_t param_count(const Seq2SeqParams& p) {
  std::size_t total = 0;
  for (const auto& s : param_spans(p)) total += s.size();
  return total;
}

LstmState encode(const Seq2SeqParams& p, const Sentence& source) {
  if (source.empty()) throw std::invalid_argument("encode: empty source");
  const Sentence src = with_eos(source);
  validate_ids(src, p.vocab_size, "encode");
  std::vector<Vec> inputs;
  inputs.reserve(src.size());
  for (TokenId id : src) inputs.push_back(embed(p, id));
  auto states = lstm_sequence_forward(p.encoder, inputs, zero_state(p.hidden_dim));
  return states.back();
}

DecodeTrace decode_forward(const Seq2SeqParams& p, const LstmState& encoder_final,
                           const Sentence& decoder_inputs) {
  if (decoder_inputs.empty())
    throw std::invalid_argument("decode_forward: empty decoder input");
  validate_ids(decoder_inputs, p.vocab_size, "decode_forward");
  if (encoder_final.hidden.size() != p.hidden_dim ||
      encoder_final.cell.size() != p.hidden_dim)
    throw std::logic_error("decode_forward: encoder state dimension mismatch");

  const auto& k = kern::active();
  DecodeTrace trace;
  trace.encoder_final = encoder_final;
  trace.input_tokens = decoder_inputs;
  LstmState state = encoder_final;
  for (TokenId id : decoder_inputs) {
    state = lstm_cell_forward(p.decoder, embed(p, id), state);
    Vec logits(p.vocab_size, 0.0);
    k.matvec_add(p.projection.data(), p.vocab_size, p.hidden_dim, state.hidden.data(),
                 logits.data());
    Vec probs = softmax(logits);
    trace.argmax_tokens.push_back(static_cast<TokenId>(argmax_lowest(probs)));
    trace.decoder_hiddens.push_back(state.hidden);
    trace.probability_lists.push_back(std::move(probs));
  }
  return trace;
}

DecodeTrace greedy_decode(const Seq2SeqParams& p, const Sentence& source,
                          std::size_t max_length) {
  if (max_length == 0) throw std::invalid_argument("greedy_decode: max_length must be > 0");
  const LstmState encoder_final = encode(p, source);

  const auto& k = kern::active();
  DecodeTrace trace;
  trace.encoder_final = encoder_final;
  LstmState state = encoder_final;
  TokenId input = kSosId;
  for (std::size_t t = 0; t < max_length; ++t) {
    trace.input_tokens.push_back(input);
    state = lstm_cell_forward(p.decoder, embed(p, input), state);
    Vec logits(p.vocab_size, 0.0);
    k.matvec_add(p.projection.data(), p.vocab_size, p.hidden_dim, state.hidden.data(),
                 logits.data());
    Vec probs = softmax(logits);
    const auto tok = static_cast<TokenId>(argmax_lowest(probs));
    trace.argmax_tokens.push_back(tok);
    trace.decoder_hiddens.push_back(state.hidden);
    trace.probability_lists.push_back(std::move(probs));
    if (tok == kEosId) break;
    input = tok;
  }
  return trace;
}

Sentence decoded_sentence(const DecodeTrace& trace) {
  Sentence out = trace.argmax_tokens;
  if (!out.empty() && out.back() == kEosId) out.pop_back();
  if (out.empty()) out.push_back(kEosId);
  return out;
}

TeacherForcedMasks sample_teacher_forced_masks(const Seq2SeqParams& params,
                                               const SentencePair& pair, double rate,
                                               Rng& rng) {
  const Sentence src = with_eos(pair.source);
  const std::size_t dec_steps = pair.target.size() + 1;
  TeacherForcedMasks masks;
  Vec ones_e(params.embed_dim, 1.0);
  Vec ones_h(params.hidden_dim, 1.0);
  masks.encoder_input.resize(src.size());
  masks.decoder_input.resize(dec_steps);
  masks.decoder_hidden.resize(dec_steps);
  for (auto& m : masks.encoder_input) apply_dropout(ones_e, rate, rng, true, &m);
  for (auto& m : masks.decoder_input) apply_dropout(ones_e, rate, rng, true, &m);
  for (auto& m : masks.decoder_hidden) apply_dropout(ones_h, rate, rng, true, &m);
  return masks;
}

double teacher_forced_loss(const Seq2SeqParams& p, const SentencePair& pair,
                           const TeacherForcedMasks* masks, Seq2SeqParams* grads) {
  if (pair.source.empty() || pair.target.empty())
    throw std::invalid_argument("teacher_forced_loss: empty sentence");
  const Sentence src = with_eos(pair.source);
  validate_ids(src, p.vocab_size, "teacher_forced_loss");
  validate_ids(pair.target, p.vocab_size, "teacher_forced_loss");

  Sentence dec_in;
  dec_in.reserve(pair.target.size() + 1);
  dec_in.push_back(kSosId);
  dec_in.insert(dec_in.end(), pair.target.begin(), pair.target.end());
  Sentence dec_tgt = pair.target;
  dec_tgt.push_back(kEosId);

  const std::size_t h = p.hidden_dim;
  const std::size_t v = p.vocab_size;
  const auto& k = kern::active();

  std::vector<Vec> enc_inputs(src.size());
  for (std::size_t t = 0; t < src.size(); ++t) {
    enc_inputs[t] = embed(p, src[t]);
    if (masks) mul_inplace(enc_inputs[t], masks->encoder_input[t]);
  }
  LstmTrace enc_trace;
  auto enc_states =
      lstm_sequence_forward(p.encoder, enc_inputs, zero_state(h), grads ? &enc_trace : nullptr);

  std::vector<Vec> dec_inputs(dec_in.size());
  for (std::size_t t = 0; t < dec_in.size(); ++t) {
    dec_inputs[t] = embed(p, dec_in[t]);
    if (masks) mul_inplace(dec_inputs[t], masks->decoder_input[t]);
  }
  LstmTrace dec_trace;
  auto dec_states = lstm_sequence_forward(p.decoder, dec_inputs, enc_states.back(),
                                          grads ? &dec_trace : nullptr);

  double loss = 0.0;
  std::vector<Vec> hidden_dropped(dec_in.size());
  std::vector<Vec> probs(dec_in.size());
  for (std::size_t t = 0; t < dec_in.size(); ++t) {
    hidden_dropped[t] = dec_states[t].hidden;
    if (masks) mul_inplace(hidden_dropped[t], masks->decoder_hidden[t]);
    Vec logits(v, 0.0);
    k.matvec_add(p.projection.data(), v, h, hidden_dropped[t].data(), logits.data());
    probs[t] = softmax(logits);
    loss += cross_entropy(probs[t], static_cast<std::size_t>(dec_tgt[t]));
  }
  if (!grads) return loss;

  std::vector<Vec> d_dec_hidden(dec_in.size(), Vec(h, 0.0));
  for (std::size_t t = 0; t < dec_in.size(); ++t) {
    Vec d_logits = probs[t];
    d_logits[static_cast<std::size_t>(dec_tgt[t])] -= 1.0;
    k.outer_add(grads->projection.data(), v, h, d_logits.data(), hidden_dropped[t].data());
    Vec d_hidden(h, 0.0);
    k.matvec_t_add(p.projection.data(), v, h, d_logits.data(), d_hidden.data());
    if (masks) mul_inplace(d_hidden, masks->decoder_hidden[t]);
    d_dec_hidden[t] = std::move(d_hidden);
  }

  auto dec_back = lstm_backward(p.decoder, dec_trace, d_dec_hidden);
  accumulate(grads->decoder, dec_back.grads);
  for (std::size_t t = 0; t < dec_in.size(); ++t) {
    Vec d_input = std::move(dec_back.d_inputs[t]);
    if (masks) mul_inplace(d_input, masks->decoder_input[t]);
    k.axpy(1.0, d_input.data(), grads->embedding.row(static_cast<std::size_t>(dec_in[t])),
           p.embed_dim);
  }

  std::vector<Vec> d_enc_hidden(src.size(), Vec(h, 0.0));
  d_enc_hidden.back() = dec_back.d_init.hidden;
  auto enc_back = lstm_backward(p.encoder, enc_trace, d_enc_hidden, &dec_back.d_init.cell);
  accumulate(grads->encoder, enc_back.grads);
  for (std::size_t t = 0; t < src.size(); ++t) {
    Vec d_input = std::move(enc_back.d_inputs[t]);
    if (masks) mul_inplace(d_input, masks->encoder_input[t]);
    k.axpy(1.0, d_input.data(), grads->embedding.row(static_cast<std::size_t>(src[t])),
           p.embed_dim);
  }
  return loss;
}

PretrainReport pretrain(Seq2SeqParams& p, const std::vector<SentencePair>& corpus,
                        const PretrainConfig& config, Rng& rng) {
  if (corpus.empty()) throw std::invalid_argument("pretrain: empty corpus");
  if (p.frozen) throw std::logic_error("pretrain: parameters are frozen");
  for (const auto& pair : corpus) {
    if (pair.source.empty() || pair.target.empty())
      throw std::invalid_argument("pretrain: empty sentence in corpus");
    if (pair.source.size() > config.max_length || pair.target.size() > config.max_length)
      throw std::invalid_argument("pretrain: sentence exceeds max length");
  }

  AdaGrad optimizer(config.optimizer, param_count(p));
  Seq2SeqParams grads = Seq2SeqParams::zeros_like(p);
  auto grad_spans = param_spans(grads);
  std::vector<std::span<const double>> grad_views(grad_spans.begin(), grad_spans.end());
  auto p_spans = param_spans(p);

  PretrainReport report;
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double cost_sum = 0.0;
    for (std::size_t idx : order) {
      const SentencePair& pair = corpus[idx];
      for (auto& s : grad_spans) std::fill(s.begin(), s.end(), 0.0);

      double loss;
      if (config.dropout_rate > 0.0) {
        const TeacherForcedMasks masks =
            sample_teacher_forced_masks(p, pair, config.dropout_rate, rng);
        loss = teacher_forced_loss(p, pair, &masks, &grads);
      } else {
        loss = teacher_forced_loss(p, pair, nullptr, &grads);
      }
      cost_sum += loss / static_cast<double>(pair.target.size() + 1);

      clip_gradient_norm(grad_spans, config.clip_threshold);
      optimizer.step(p_spans, grad_views);
    }
    report.per_epoch_cost.push_back(cost_sum / static_cast<double>(corpus.size()));

    double bleu_sum = 0.0;
    for (const auto& pair : corpus) {
      const DecodeTrace trace = greedy_decode(p, pair.source, config.max_length);
      bleu_sum += smoothed_bleu(decoded_sentence(trace), pair.target);
    }
    report.per_epoch_train_bleu.push_back(bleu_sum / static_cast<double>(corpus.size()));
  }
  return report;
}

Seq2SeqParams freeze(const Seq2SeqParams& params) {
  Seq2SeqParams frozen = params;
  frozen.frozen = true;
  return frozen;
}

void save_seq2seq(const Seq2SeqParams& p, const std::filesystem::path& path) {
  Checkpoint ckpt;
  ckpt.add_scalar("meta/vocab_size", static_cast<double>(p.vocab_size));
  ckpt.add_scalar("meta/embed_dim", static_cast<double>(p.embed_dim));
  ckpt.add_scalar("meta/hidden_dim", static_cast<double>(p.hidden_dim));
  ckpt.add("embedding", p.embedding.flat(), {p.vocab_size, p.embed_dim});
  ckpt.add("encoder/w_x", p.encoder.w_x.flat(), {4 * p.hidden_dim, p.embed_dim});
  ckpt.add("encoder/w_h", p.encoder.w_h.flat(), {4 * p.hidden_dim, p.hidden_dim});
  ckpt.add("encoder/bias", p.encoder.bias, {4 * p.hidden_dim});
  ckpt.add("decoder/w_x", p.decoder.w_x.flat(), {4 * p.hidden_dim, p.embed_dim});
  ckpt.add("decoder/w_h", p.decoder.w_h.flat(), {4 * p.hidden_dim, p.hidden_dim});
  ckpt.add("decoder/bias", p.decoder.bias, {4 * p.hidden_dim});
  ckpt.add("projection", p.projection.flat(), {p.vocab_size, p.hidden_dim});
  ckpt.save(path);
}

namespace {

void load_mat(const Checkpoint& ckpt, const std::string& name, Mat& out, std::size_t rows,
              std::size_t cols) {
  const auto& e = ckpt.get(name);
  if (e.dims != std::vector<std::uint64_t>{rows, cols})
    throw std::runtime_error("checkpoint: unexpected shape for " + name);
  out = Mat(rows, cols);
  std::copy(e.data.begin(), e.data.end(), out.data());
}

void load_vec(const Checkpoint& ckpt, const std::string& name, Vec& out, std::size_t n) {
  const auto& e = ckpt.get(name);
  if (e.dims != std::vector<std::uint64_t>{n})
    throw std::runtime_error("checkpoint: unexpected shape for " + name);
  out = e.data;
}

}  // namespace

Seq2SeqParams load_seq2seq(const std::filesystem::path& path) {
  const Checkpoint ckpt = Checkpoint::load(path);
  Seq2SeqParams p;
  p.vocab_size = static_cast<std::size_t>(ckpt.get_scalar("meta/vocab_size"));
  p.embed_dim = static_cast<std::size_t>(ckpt.get_scalar("meta/embed_dim"));
  p.hidden_dim = static_cast<std::size_t>(ckpt.get_scalar("meta/hidden_dim"));
  load_mat(ckpt, "embedding", p.embedding, p.vocab_size, p.embed_dim);
  p.encoder.input_dim = p.embed_dim;
  p.encoder.hidden_dim = p.hidden_dim;
  load_mat(ckpt, "encoder/w_x", p.encoder.w_x, 4 * p.hidden_dim, p.embed_dim);
  load_mat(ckpt, "encoder/w_h", p.encoder.w_h, 4 * p.hidden_dim, p.hidden_dim);
  load_vec(ckpt, "encoder/bias", p.encoder.bias, 4 * p.hidden_dim);
  p.decoder.input_dim = p.embed_dim;
  p.decoder.hidden_dim = p.hidden_dim;
  load_mat(ckpt, "decoder/w_x", p.decoder.w_x, 4 * p.hidden_dim, p.embed_dim);
  load_mat(ckpt, "decoder/w_h", p.decoder.w_h, 4 * p.hidden_dim, p.hidden_dim);
  load_vec(ckpt, "decoder/bias", p.decoder.bias, 4 * p.hidden_dim);
  load_mat(ckpt, "projection", p.projection, p.vocab_size, p.hidden_dim);
  return p;
}

}  // namespace qdec
