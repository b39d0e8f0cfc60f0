// qdecode: train and run the iterative Q-learning sentence decoder.
//
// Subcommands: synth, pretrain, train-dqn, decode, eval, sweep-epsilon.
// Values resolve as flag > config file > built-in default.
// Exit codes: 0 success, 1 usage/config error, 2 runtime error.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "qdec/commands.hpp"
#include "qdec/config.hpp"

namespace {

struct CommonArgs {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

void add_common_options(CLI::App* app, CommonArgs& args) {
  app->add_option("--config", args.config_file, "flat `key = value` config file");
  for (const std::string& key : qdec::config_keys()) {
    app->add_option_function<std::string>(
        "--" + key, [&args, key](const std::string& value) { args.overrides[key] = value; },
        "override config key " + key);
  }
  // spec'd aliases for the common paths
  app->add_option_function<std::string>(
      "--out", [&args](const std::string& v) { args.overrides["out_dir"] = v; },
      "output directory (alias for --out_dir)");
  app->add_option_function<std::string>(
      "--corpus", [&args](const std::string& v) { args.overrides["corpus_path"] = v; },
      "corpus file (alias for --corpus_path)");
  app->add_option_function<std::string>(
      "--vocab", [&args](const std::string& v) { args.overrides["vocab_path"] = v; },
      "vocabulary file (alias for --vocab_path)");
  app->add_option_function<std::string>(
      "--splits", [&args](const std::string& v) { args.overrides["splits_path"] = v; },
      "split manifest (alias for --splits_path)");
}

qdec::RunConfig resolve_config(const CommonArgs& args) {
  qdec::RunConfig config;
  if (!args.config_file.empty()) config.apply(qdec::parse_config_file(args.config_file));
  config.apply(args.overrides);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iterative Q-learning sentence decoder"};
  app.require_subcommand(1);

  CommonArgs synth_args, pretrain_args, dqn_args, decode_args, eval_args, sweep_args;
  std::string dqn_stategf, decode_stategf, decode_qnet, decode_input, decode_output,
      decode_mode = "baseline", eval_stategf, eval_qnet, sweep_stategf, sweep_qnet;
  std::vector<double> sweep_epsilons = {0.0, 0.05, 0.1, 0.2, 0.5};

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus with splits");
  add_common_options(synth, synth_args);

  CLI::App* pretrain =
      app.add_subcommand("pretrain", "supervised encoder-decoder training");
  add_common_options(pretrain, pretrain_args);

  CLI::App* train_dqn = app.add_subcommand("train-dqn", "train the Q-network decoder");
  add_common_options(train_dqn, dqn_args);
  train_dqn->add_option("--stategf", dqn_stategf, "pretrained seq2seq checkpoint")
      ->required();

  CLI::App* decode = app.add_subcommand("decode", "decode sentences from a text file");
  add_common_options(decode, decode_args);
  decode->add_option("--stategf", decode_stategf, "pretrained seq2seq checkpoint")
      ->required();
  decode->add_option("--qnet", decode_qnet, "trained q-network checkpoint");
  decode->add_option("--input", decode_input, "input text file")->required();
  decode->add_option("--output", decode_output, "output text file")->required();
  decode->add_option("--mode", decode_mode, "baseline | dqn")
      ->check(CLI::IsMember({"baseline", "dqn"}));

  CLI::App* eval = app.add_subcommand("eval", "score both decoders on both test splits");
  add_common_options(eval, eval_args);
  eval->add_option("--stategf", eval_stategf, "pretrained seq2seq checkpoint")->required();
  eval->add_option("--qnet", eval_qnet, "trained q-network checkpoint")->required();

  CLI::App* sweep =
      app.add_subcommand("sweep-epsilon", "test-time exploration sweep on the unseen split");
  add_common_options(sweep, sweep_args);
  sweep->add_option("--stategf", sweep_stategf, "pretrained seq2seq checkpoint")->required();
  sweep->add_option("--qnet", sweep_qnet, "trained q-network checkpoint")->required();
  sweep->add_option("--epsilons", sweep_epsilons, "epsilon values to sweep")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) {
      qdec::cmd::run_synth(resolve_config(synth_args));
    } else if (pretrain->parsed()) {
      qdec::cmd::run_pretrain(resolve_config(pretrain_args));
    } else if (train_dqn->parsed()) {
      qdec::cmd::run_train_dqn(resolve_config(dqn_args), dqn_stategf);
    } else if (decode->parsed()) {
      const auto mode = decode_mode == "dqn" ? qdec::cmd::DecodeMode::kDqn
                                             : qdec::cmd::DecodeMode::kBaseline;
      qdec::cmd::run_decode(resolve_config(decode_args), decode_stategf, decode_qnet,
                            decode_input, decode_output, mode);
    } else if (eval->parsed()) {
      qdec::cmd::run_eval(resolve_config(eval_args), eval_stategf, eval_qnet);
    } else if (sweep->parsed()) {
      qdec::cmd::run_sweep_epsilon(resolve_config(sweep_args), sweep_stategf, sweep_qnet,
                                   sweep_epsilons);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
