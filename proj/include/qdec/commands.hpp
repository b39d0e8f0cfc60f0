#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qdec/config.hpp"
#include "qdec/corpus.hpp"
#include "qdec/dqn.hpp"
#include "qdec/seq2seq.hpp"

namespace qdec::cmd {

// Shortest round-trip decimal form; keeps CSV output byte-stable.
std::string format_double(double value);

PretrainConfig pretrain_config(const RunConfig& config);
DqnTrainConfig dqn_config(const RunConfig& config);

// Corpus sentences paired with themselves (the regeneration task), selected
// by a split manifest section.
std::vector<SentencePair> regeneration_pairs(const std::vector<Sentence>& sentences,
                                             const std::vector<std::size_t>& indices);

// All commands throw std::invalid_argument for unusable inputs (missing
// files, mismatched checkpoints) and std::runtime_error for I/O failures.
// Outputs are only written after all inputs have validated.

// corpus.txt + vocab.txt + splits.txt into out_dir.
void run_synth(const RunConfig& config);

// stategf.ckpt + pretrain.csv into out_dir.
void run_pretrain(const RunConfig& config);

// qnet.ckpt + dqn.csv into out_dir.
void run_train_dqn(const RunConfig& config, const std::string& stategf_checkpoint);

enum class DecodeMode { kBaseline, kDqn };

void run_decode(const RunConfig& config, const std::string& stategf_checkpoint,
                const std::string& qnet_checkpoint, const std::string& input_path,
                const std::string& output_path, DecodeMode mode);

// eval.csv with baseline and DQN corpus BLEU on the seen and unseen splits.
void run_eval(const RunConfig& config, const std::string& stategf_checkpoint,
              const std::string& qnet_checkpoint);

// sweep.csv with one (epsilon, avg_bleu) row per requested epsilon.
void run_sweep_epsilon(const RunConfig& config, const std::string& stategf_checkpoint,
                       const std::string& qnet_checkpoint,
                       const std::vector<double>& epsilons);

}  // namespace qdec::cmd
