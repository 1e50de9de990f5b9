#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdml/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Skeleton one-shot action recognition toolkit"};
  app.require_subcommand(1);

  sdml::CommandOptions options;
  std::string config, checkpoint, out;
  std::uint64_t seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"encode", "Encode every capture to an image and write a manifest"},
      {"train", "Train the embedder on the auxiliary classes"},
      {"eval", "One-shot evaluation of a checkpoint on the novel classes"},
      {"reduce", "Train and evaluate for several auxiliary set sizes"},
      {"ablate", "Loss x augmentation x embedding size grid"},
      {"synth", "Write a synthetic NTU-layout dataset"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Configuration file")->required();
    sub->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate or resume from");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", seed, "Root seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? sdml::kExitOk : sdml::kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  options.config = config;
  if (chosen->count("--checkpoint")) options.checkpoint = checkpoint;
  if (chosen->count("--out")) options.out = out;
  if (chosen->count("--seed")) options.seed = seed;
  return sdml::run_command(chosen->get_name(), options, std::cout, std::cerr);
}
