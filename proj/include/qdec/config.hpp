#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qdec {

// One flat bag of knobs for every pipeline phase. Values are validated as a
// whole before any command runs; unknown config keys are rejected.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string kernels = "auto";  // auto | scalar | avx2

  // model
  std::size_t hidden_dim = 100;
  std::size_t embed_dim = 100;
  double init_range = 0.15;
  std::size_t max_length = 30;

  // optimization
  double learning_rate = 0.05;
  double weight_decay = 0.00016;
  double adagrad_epsilon = 1e-8;
  double clip_threshold = 15.0;
  double dropout_rate = 0.2;
  std::size_t pretrain_epochs = 30;

  // Q-learning
  double discount = 0.95;
  double bleu_threshold = 0.92;
  double epsilon_start = 1.0;
  double epsilon_final = 0.1;
  std::size_t epsilon_anneal_steps = 10000;
  double error_bias_weight = 3.0;
  std::size_t target_sync_period = 100;
  std::size_t episode_length_multiplier = 2;
  std::size_t replay_capacity = 50000;
  std::size_t dqn_epochs = 10;

  // synthetic corpus + splits
  std::size_t synth_vocab = 50;
  std::size_t synth_min_length = 3;
  std::size_t synth_max_length = 10;
  std::size_t synth_pairs = 600;
  double synth_zipf_exponent = 1.0;
  double validation_fraction = 1.0 / 12.0;
  double unseen_fraction = 1.0 / 12.0;
  std::size_t seen_test_size = 0;  // 0 = same size as the unseen split

  // files (flags may override)
  std::string corpus_path;
  std::string vocab_path;
  std::string splits_path;
  std::string out_dir;

  // Applies `key = value` pairs; throws std::invalid_argument on unknown
  // keys or unparseable values.
  void apply(const std::map<std::string, std::string>& kv);

  // Bound checks across all fields; throws std::invalid_argument.
  void validate() const;
};

// Flat key-value file: one `key = value` per line, '#' starts a comment.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

// Every key RunConfig::apply accepts, in a stable order (used to register
// one override flag per key on the CLI).
const std::vector<std::string>& config_keys();

}  // namespace qdec
