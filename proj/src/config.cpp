#include "qdec/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qdec {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + value);
  }
}

double parse_f64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": " + value);
  }
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "config: line " << line_no << " is not `key = value`";
      throw std::invalid_argument(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key");
    if (kv.count(key)) throw std::invalid_argument("config: duplicate key " + key);
    kv[key] = value;
  }
  return kv;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "seed",
      "kernels",
      "hidden_dim",
      "embed_dim",
      "init_range",
      "max_length",
      "learning_rate",
      "weight_decay",
      "adagrad_epsilon",
      "clip_threshold",
      "dropout_rate",
      "pretrain_epochs",
      "discount",
      "bleu_threshold",
      "epsilon_start",
      "epsilon_final",
      "epsilon_anneal_steps",
      "error_bias_weight",
      "target_sync_period",
      "episode_length_multiplier",
      "replay_capacity",
      "dqn_epochs",
      "synth_vocab",
      "synth_min_length",
      "synth_max_length",
      "synth_pairs",
      "synth_zipf_exponent",
      "validation_fraction",
      "unseen_fraction",
      "seen_test_size",
      "corpus_path",
      "vocab_path",
      "splits_path",
      "out_dir",
  };
  return keys;
}

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "seed") seed = parse_u64(key, value);
    else if (key == "kernels") kernels = value;
    else if (key == "hidden_dim") hidden_dim = parse_u64(key, value);
    else if (key == "embed_dim") embed_dim = parse_u64(key, value);
    else if (key == "init_range") init_range = parse_f64(key, value);
    else if (key == "max_length") max_length = parse_u64(key, value);
    else if (key == "learning_rate") learning_rate = parse_f64(key, value);
    else if (key == "weight_decay") weight_decay = parse_f64(key, value);
    else if (key == "adagrad_epsilon") adagrad_epsilon = parse_f64(key, value);
    else if (key == "clip_threshold") clip_threshold = parse_f64(key, value);
    else if (key == "dropout_rate") dropout_rate = parse_f64(key, value);
    else if (key == "pretrain_epochs") pretrain_epochs = parse_u64(key, value);
    else if (key == "discount") discount = parse_f64(key, value);
    else if (key == "bleu_threshold") bleu_threshold = parse_f64(key, value);
    else if (key == "epsilon_start") epsilon_start = parse_f64(key, value);
    else if (key == "epsilon_final") epsilon_final = parse_f64(key, value);
    else if (key == "epsilon_anneal_steps") epsilon_anneal_steps = parse_u64(key, value);
    else if (key == "error_bias_weight") error_bias_weight = parse_f64(key, value);
    else if (key == "target_sync_period") target_sync_period = parse_u64(key, value);
    else if (key == "episode_length_multiplier")
      episode_length_multiplier = parse_u64(key, value);
    else if (key == "replay_capacity") replay_capacity = parse_u64(key, value);
    else if (key == "dqn_epochs") dqn_epochs = parse_u64(key, value);
    else if (key == "synth_vocab") synth_vocab = parse_u64(key, value);
    else if (key == "synth_min_length") synth_min_length = parse_u64(key, value);
    else if (key == "synth_max_length") synth_max_length = parse_u64(key, value);
    else if (key == "synth_pairs") synth_pairs = parse_u64(key, value);
    else if (key == "synth_zipf_exponent") synth_zipf_exponent = parse_f64(key, value);
    else if (key == "validation_fraction") validation_fraction = parse_f64(key, value);
    else if (key == "unseen_fraction") unseen_fraction = parse_f64(key, value);
    else if (key == "seen_test_size") seen_test_size = parse_u64(key, value);
    else if (key == "corpus_path") corpus_path = value;
    else if (key == "vocab_path") vocab_path = value;
    else if (key == "splits_path") splits_path = value;
    else if (key == "out_dir") out_dir = value;
    else throw std::invalid_argument("config: unknown key " + key);
  }
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };

  if (kernels != "auto" && kernels != "scalar" && kernels != "avx2")
    fail("kernels must be auto, scalar or avx2");
  if (hidden_dim == 0) fail("hidden_dim must be positive");
  if (embed_dim == 0) fail("embed_dim must be positive");
  if (!(init_range > 0.0)) fail("init_range must be positive");
  if (max_length == 0) fail("max_length must be positive");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (weight_decay < 0.0) fail("weight_decay must be non-negative");
  if (!(adagrad_epsilon > 0.0)) fail("adagrad_epsilon must be positive");
  if (!(clip_threshold > 0.0)) fail("clip_threshold must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) fail("dropout_rate must be in [0, 1)");
  if (pretrain_epochs == 0) fail("pretrain_epochs must be positive");
  if (discount < 0.0 || discount >= 1.0) fail("discount must be in [0, 1)");
  if (!(bleu_threshold > 0.0) || !(bleu_threshold < 1.0))
    fail("bleu_threshold must be in (0, 1)");
  if (epsilon_start < 0.0 || epsilon_start > 1.0) fail("epsilon_start must be in [0, 1]");
  if (epsilon_final < 0.0 || epsilon_final > 1.0) fail("epsilon_final must be in [0, 1]");
  if (epsilon_anneal_steps == 0) fail("epsilon_anneal_steps must be positive");
  if (error_bias_weight < 1.0) fail("error_bias_weight must be >= 1");
  if (target_sync_period == 0) fail("target_sync_period must be positive");
  if (episode_length_multiplier == 0) fail("episode_length_multiplier must be positive");
  if (replay_capacity == 0) fail("replay_capacity must be positive");
  if (dqn_epochs == 0) fail("dqn_epochs must be positive");
  if (synth_vocab == 0) fail("synth_vocab must be positive");
  if (synth_min_length == 0 || synth_min_length > synth_max_length)
    fail("synth length range is empty");
  if (synth_max_length > max_length) fail("synth_max_length exceeds max_length");
  if (synth_pairs == 0) fail("synth_pairs must be positive");
  if (synth_zipf_exponent < 0.0) fail("synth_zipf_exponent must be non-negative");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    fail("validation_fraction must be in [0, 1)");
  if (unseen_fraction < 0.0 || unseen_fraction >= 1.0)
    fail("unseen_fraction must be in [0, 1)");
  if (validation_fraction + unseen_fraction >= 1.0)
    fail("validation and unseen fractions leave no training data");
}

}  // namespace qdec
