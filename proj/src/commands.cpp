#include "qdec/commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "qdec/bleu.hpp"
#include "qdec/kernels.hpp"

namespace qdec::cmd {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

PretrainConfig pretrain_config(const RunConfig& c) {
  PretrainConfig p;
  p.epochs = c.pretrain_epochs;
  p.optimizer = AdaGradConfig{c.learning_rate, c.weight_decay, c.adagrad_epsilon};
  p.clip_threshold = c.clip_threshold;
  p.dropout_rate = c.dropout_rate;
  p.max_length = c.max_length;
  return p;
}

DqnTrainConfig dqn_config(const RunConfig& c) {
  DqnTrainConfig d;
  d.discount = c.discount;
  d.bleu_threshold = c.bleu_threshold;
  d.epsilon_start = c.epsilon_start;
  d.epsilon_final = c.epsilon_final;
  d.epsilon_anneal_steps = c.epsilon_anneal_steps;
  d.error_bias_weight = c.error_bias_weight;
  d.target_sync_period = c.target_sync_period;
  d.episode_length_multiplier = c.episode_length_multiplier;
  d.replay_capacity = c.replay_capacity;
  d.epochs = c.dqn_epochs;
  d.max_length = c.max_length;
  d.clip_threshold = c.clip_threshold;
  d.init_range = c.init_range;
  d.optimizer = AdaGradConfig{c.learning_rate, c.weight_decay, c.adagrad_epsilon};
  return d;
}

std::vector<SentencePair> regeneration_pairs(const std::vector<Sentence>& sentences,
                                             const std::vector<std::size_t>& indices) {
  std::vector<SentencePair> pairs;
  pairs.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= sentences.size())
      throw std::invalid_argument("split manifest index beyond corpus size");
    pairs.push_back(SentencePair{sentences[i], sentences[i]});
  }
  return pairs;
}

namespace {

void require_file(const std::string& path, const char* what) {
  if (path.empty())
    throw std::invalid_argument(std::string(what) + " path not set");
  if (!fs::exists(path))
    throw std::invalid_argument(std::string(what) + " not found: " + path);
}

fs::path prepare_out_dir(const RunConfig& config) {
  if (config.out_dir.empty()) throw std::invalid_argument("out_dir not set");
  fs::path dir(config.out_dir);
  fs::create_directories(dir);
  return dir;
}

struct LoadedData {
  Vocab vocab;
  std::vector<Sentence> sentences;
  SplitIndices splits;
};

LoadedData load_data(const RunConfig& config) {
  require_file(config.corpus_path, "corpus");
  require_file(config.vocab_path, "vocabulary");
  LoadedData data;
  data.vocab = Vocab::load(config.vocab_path);
  data.sentences = read_corpus(config.corpus_path, data.vocab, config.max_length);
  if (config.splits_path.empty()) {
    data.splits.train.resize(data.sentences.size());
    for (std::size_t i = 0; i < data.sentences.size(); ++i) data.splits.train[i] = i;
  } else {
    require_file(config.splits_path, "split manifest");
    data.splits = read_split_manifest(config.splits_path);
  }
  return data;
}

Seq2SeqParams load_frozen_model(const std::string& checkpoint,
                                const Vocab& vocab) {
  require_file(checkpoint, "seq2seq checkpoint");
  Seq2SeqParams model = load_seq2seq(checkpoint);
  if (model.vocab_size != vocab.size())
    throw std::invalid_argument("checkpoint vocabulary size (" +
                                std::to_string(model.vocab_size) +
                                ") does not match the vocabulary file (" +
                                std::to_string(vocab.size()) + ")");
  return freeze(model);
}

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void run_synth(const RunConfig& config) {
  config.validate();
  kern::select(config.kernels);
  const fs::path dir = prepare_out_dir(config);

  SynthSpec spec;
  spec.content_vocab = config.synth_vocab;
  spec.min_length = config.synth_min_length;
  spec.max_length = config.synth_max_length;
  spec.pair_count = config.synth_pairs;
  spec.zipf_exponent = config.synth_zipf_exponent;

  Rng rng = Rng::substream(config.seed, "corpus");
  const auto pairs = synthesize_corpus(spec, rng);
  std::vector<Sentence> sentences;
  sentences.reserve(pairs.size());
  for (const auto& pair : pairs) sentences.push_back(pair.source);

  SplitSpec split_spec;
  split_spec.validation_fraction = config.validation_fraction;
  split_spec.unseen_fraction = config.unseen_fraction;
  split_spec.seen_test_size = config.seen_test_size;
  const SplitIndices indices = split_indices(sentences.size(), split_spec, rng);

  const Vocab vocab = Vocab::synthetic(config.synth_vocab);
  write_corpus(dir / "corpus.txt", sentences, vocab);
  vocab.save(dir / "vocab.txt");
  write_split_manifest(dir / "splits.txt", indices);
}

void run_pretrain(const RunConfig& config) {
  config.validate();
  kern::select(config.kernels);
  const LoadedData data = load_data(config);
  const fs::path dir = prepare_out_dir(config);
  const auto train = regeneration_pairs(data.sentences, data.splits.train);
  if (train.empty()) throw std::invalid_argument("training split is empty");

  Rng rng = Rng::substream(config.seed, "pretrain");
  Seq2SeqParams params = Seq2SeqParams::init(data.vocab.size(), config.embed_dim,
                                             config.hidden_dim, config.init_range, rng);
  const PretrainReport report = pretrain(params, train, pretrain_config(config), rng);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t e = 0; e < report.per_epoch_cost.size(); ++e)
    rows.push_back({std::to_string(e + 1), format_double(report.per_epoch_cost[e]),
                    format_double(report.per_epoch_train_bleu[e])});
  write_csv(dir / "pretrain.csv", "epoch,cost,train_bleu", rows);
  save_seq2seq(params, dir / "stategf.ckpt");
}

void run_train_dqn(const RunConfig& config, const std::string& stategf_checkpoint) {
  config.validate();
  kern::select(config.kernels);
  const LoadedData data = load_data(config);
  const Seq2SeqParams model = load_frozen_model(stategf_checkpoint, data.vocab);
  const fs::path dir = prepare_out_dir(config);
  const auto train = regeneration_pairs(data.sentences, data.splits.train);
  if (train.empty()) throw std::invalid_argument("training split is empty");

  const auto validation = regeneration_pairs(data.sentences, data.splits.validation);

  Rng rng = Rng::substream(config.seed, "dqn");
  auto [qnet, log] = train_dqn(model, train, dqn_config(config), rng, validation);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t e = 0; e < log.epochs.size(); ++e)
    rows.push_back({std::to_string(e + 1), format_double(log.epochs[e].mean_episode_reward),
                    format_double(log.epochs[e].mean_final_bleu),
                    format_double(log.epochs[e].epsilon)});
  write_csv(dir / "dqn.csv", "epoch,mean_reward,mean_bleu,epsilon", rows);
  save_qnet(qnet, dir / "qnet.ckpt");
}

void run_decode(const RunConfig& config, const std::string& stategf_checkpoint,
                const std::string& qnet_checkpoint, const std::string& input_path,
                const std::string& output_path, DecodeMode mode) {
  config.validate();
  kern::select(config.kernels);
  require_file(config.vocab_path, "vocabulary");
  require_file(input_path, "input");
  const Vocab vocab = Vocab::load(config.vocab_path);
  const Seq2SeqParams model = load_frozen_model(stategf_checkpoint, vocab);
  QNetParams qnet;
  if (mode == DecodeMode::kDqn) {
    require_file(qnet_checkpoint, "q-network checkpoint");
    qnet = load_qnet(qnet_checkpoint);
    if (qnet.hidden_dim != model.hidden_dim)
      throw std::invalid_argument("q-network hidden size does not match the seq2seq model");
  }

  std::ifstream in(input_path);
  if (!in) throw std::runtime_error("cannot open " + input_path);
  std::ofstream out(output_path);
  if (!out) throw std::runtime_error("cannot open " + output_path);

  const DqnTrainConfig dcfg = dqn_config(config);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = whitespace_tokenize(line);
    if (tokens.empty()) {
      std::cerr << "warning: skipping empty input line " << line_no << "\n";
      continue;
    }
    if (tokens.size() > config.max_length) {
      std::cerr << "warning: skipping over-long input line " << line_no << "\n";
      continue;
    }
    const Sentence source = vocab.encode(tokens);
    Sentence decoded;
    if (mode == DecodeMode::kBaseline) {
      decoded = decoded_sentence(greedy_decode(model, source, config.max_length));
    } else {
      decoded = decode_iterative(qnet, model, source, 0.0, dcfg);
    }
    const auto words = vocab.decode(decoded);
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out << ' ';
      out << words[i];
    }
    out << '\n';
  }
}

namespace {

double corpus_bleu_baseline(const Seq2SeqParams& model,
                            const std::vector<SentencePair>& pairs,
                            const DqnTrainConfig& cfg) {
  std::vector<std::pair<Sentence, Sentence>> scored;
  scored.reserve(pairs.size());
  for (const auto& pair : pairs)
    scored.emplace_back(decoded_sentence(greedy_decode(model, pair.source, cfg.max_length)),
                        pair.target);
  return corpus_average_bleu(scored, cfg.bleu);
}

double corpus_bleu_dqn(const QNetParams& qnet, const Seq2SeqParams& model,
                       const std::vector<SentencePair>& pairs, const DqnTrainConfig& cfg) {
  std::vector<std::pair<Sentence, Sentence>> scored;
  scored.reserve(pairs.size());
  for (const auto& pair : pairs)
    scored.emplace_back(decode_iterative(qnet, model, pair.source, 0.0, cfg), pair.target);
  return corpus_average_bleu(scored, cfg.bleu);
}

}  // namespace

void run_eval(const RunConfig& config, const std::string& stategf_checkpoint,
              const std::string& qnet_checkpoint) {
  config.validate();
  kern::select(config.kernels);
  const LoadedData data = load_data(config);
  const Seq2SeqParams model = load_frozen_model(stategf_checkpoint, data.vocab);
  require_file(qnet_checkpoint, "q-network checkpoint");
  const QNetParams qnet = load_qnet(qnet_checkpoint);
  if (qnet.hidden_dim != model.hidden_dim)
    throw std::invalid_argument("q-network hidden size does not match the seq2seq model");
  const fs::path dir = prepare_out_dir(config);

  const auto seen = regeneration_pairs(data.sentences, data.splits.seen_test);
  const auto unseen = regeneration_pairs(data.sentences, data.splits.unseen_test);
  if (seen.empty() || unseen.empty())
    throw std::invalid_argument("eval needs non-empty seen and unseen test splits");

  const DqnTrainConfig dcfg = dqn_config(config);
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"baseline", format_double(corpus_bleu_baseline(model, seen, dcfg)),
                  format_double(corpus_bleu_baseline(model, unseen, dcfg))});
  rows.push_back({"dqn", format_double(corpus_bleu_dqn(qnet, model, seen, dcfg)),
                  format_double(corpus_bleu_dqn(qnet, model, unseen, dcfg))});
  write_csv(dir / "eval.csv", "system,seen_bleu,unseen_bleu", rows);
}

void run_sweep_epsilon(const RunConfig& config, const std::string& stategf_checkpoint,
                       const std::string& qnet_checkpoint,
                       const std::vector<double>& epsilons) {
  config.validate();
  kern::select(config.kernels);
  if (epsilons.empty()) throw std::invalid_argument("epsilon list is empty");
  for (double e : epsilons)
    if (e < 0.0 || e > 1.0) throw std::invalid_argument("epsilon values must lie in [0, 1]");
  const LoadedData data = load_data(config);
  const Seq2SeqParams model = load_frozen_model(stategf_checkpoint, data.vocab);
  require_file(qnet_checkpoint, "q-network checkpoint");
  const QNetParams qnet = load_qnet(qnet_checkpoint);
  if (qnet.hidden_dim != model.hidden_dim)
    throw std::invalid_argument("q-network hidden size does not match the seq2seq model");
  const fs::path dir = prepare_out_dir(config);

  const auto unseen = regeneration_pairs(data.sentences, data.splits.unseen_test);
  if (unseen.empty()) throw std::invalid_argument("sweep needs a non-empty unseen split");

  Rng eval_rng = Rng::substream(config.seed, "eval");
  const std::uint64_t eval_seed = eval_rng.next_u64();
  const auto rows_data =
      epsilon_sweep(qnet, model, unseen, epsilons, dqn_config(config), eval_seed);

  std::vector<std::vector<std::string>> rows;
  for (const auto& [eps, bleu] : rows_data)
    rows.push_back({format_double(eps), format_double(bleu)});
  write_csv(dir / "sweep.csv", "epsilon,avg_bleu", rows);
}

}  // namespace qdec::cmd
