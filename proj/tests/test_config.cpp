#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "qdec/commands.hpp"
#include "qdec/config.hpp"

using namespace qdec;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path dir = fs::temp_directory_path() / "qdec_config_tests";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("defaults validate") {
  RunConfig config;
  CHECK_NOTHROW(config.validate());
  CHECK(config.hidden_dim == 100);
  CHECK(config.learning_rate == 0.05);
  CHECK(config.clip_threshold == 15.0);
  CHECK(config.weight_decay == 0.00016);
  CHECK(config.dropout_rate == 0.2);
  CHECK(config.discount == 0.95);
  CHECK(config.bleu_threshold == 0.92);
  CHECK(config.epsilon_final == 0.1);
  CHECK(config.episode_length_multiplier == 2);
  CHECK(config.max_length == 30);
  CHECK(config.init_range == 0.15);
}

TEST_CASE("config file parsing") {
  const fs::path path = write_config("ok.cfg",
                                     "# toy setup\n"
                                     "hidden_dim = 64\n"
                                     "learning_rate = 0.01   # inline comment\n"
                                     "out_dir = /tmp/run\n"
                                     "\n"
                                     "seed=9\n");
  RunConfig config;
  config.apply(parse_config_file(path));
  CHECK(config.hidden_dim == 64);
  CHECK(config.learning_rate == 0.01);
  CHECK(config.out_dir == "/tmp/run");
  CHECK(config.seed == 9);
  CHECK_NOTHROW(config.validate());
}

TEST_CASE("unknown keys and malformed values are rejected") {
  RunConfig config;
  CHECK_THROWS_AS(config.apply({{"hidden_dims", "64"}}), std::invalid_argument);
  CHECK_THROWS_AS(config.apply({{"hidden_dim", "sixty"}}), std::invalid_argument);
  CHECK_THROWS_AS(config.apply({{"learning_rate", "0.05x"}}), std::invalid_argument);

  const fs::path bad = write_config("bad.cfg", "hidden_dim 64\n");
  CHECK_THROWS_AS(parse_config_file(bad), std::invalid_argument);
  const fs::path dup = write_config("dup.cfg", "seed = 1\nseed = 2\n");
  CHECK_THROWS_AS(parse_config_file(dup), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/qdec.cfg"), std::invalid_argument);
}

TEST_CASE("out-of-range values fail validation") {
  auto expect_invalid = [](auto&& mutate) {
    RunConfig config;
    mutate(config);
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  };
  expect_invalid([](RunConfig& c) { c.hidden_dim = 0; });
  expect_invalid([](RunConfig& c) { c.dropout_rate = 1.0; });
  expect_invalid([](RunConfig& c) { c.dropout_rate = -0.5; });
  expect_invalid([](RunConfig& c) { c.discount = 1.0; });
  expect_invalid([](RunConfig& c) { c.bleu_threshold = 0.0; });
  expect_invalid([](RunConfig& c) { c.epsilon_start = 1.5; });
  expect_invalid([](RunConfig& c) { c.error_bias_weight = 0.5; });
  expect_invalid([](RunConfig& c) { c.episode_length_multiplier = 0; });
  expect_invalid([](RunConfig& c) { c.synth_min_length = 11; });  // > synth_max_length
  expect_invalid([](RunConfig& c) { c.synth_max_length = 64; });  // > max_length
  expect_invalid([](RunConfig& c) { c.kernels = "sse2"; });
  expect_invalid([](RunConfig& c) {
    c.validation_fraction = 0.6;
    c.unseen_fraction = 0.5;
  });
}

TEST_CASE("every advertised key round-trips through apply") {
  RunConfig config;
  std::map<std::string, std::string> kv;
  for (const std::string& key : config_keys()) {
    if (key == "kernels") kv[key] = "scalar";
    else if (key == "corpus_path" || key == "vocab_path" || key == "splits_path" ||
             key == "out_dir") kv[key] = "x";
    else if (key == "init_range" || key == "learning_rate" || key == "weight_decay" ||
             key == "adagrad_epsilon" || key == "clip_threshold" || key == "dropout_rate" ||
             key == "discount" || key == "bleu_threshold" || key == "epsilon_start" ||
             key == "epsilon_final" || key == "error_bias_weight" ||
             key == "synth_zipf_exponent" || key == "validation_fraction" ||
             key == "unseen_fraction") kv[key] = "0.5";
    else kv[key] = "7";
  }
  CHECK_NOTHROW(config.apply(kv));
}

TEST_CASE("csv doubles format deterministically") {
  CHECK(cmd::format_double(0.5) == "0.5");
  CHECK(cmd::format_double(1.0) == "1");
  CHECK(cmd::format_double(0.1) == "0.1");
  CHECK(cmd::format_double(1.0 / 3.0) == cmd::format_double(1.0 / 3.0));
  // shortest round-trip form parses back to the same bits
  const double value = 0.12345678901234567;
  CHECK(std::stod(cmd::format_double(value)) == value);
}
