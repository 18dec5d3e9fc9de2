#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "btrf/commands.hpp"
#include "btrf/config.hpp"
#include "btrf/parallel.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string dataset;
  std::string model;
  std::string output;
  std::string format;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_output) {
  cmd->add_option("-c,--config", o.config_path, "key = value configuration file");
  cmd->add_option("-d,--dataset", o.dataset, "dataset directory (overrides `dataset`)");
  cmd->add_option("-m,--model", o.model, "model file (overrides `model`)");
  if (with_output) {
    cmd->add_option("-o,--output", o.output, "output directory (overrides `output_dir`)");
    cmd->add_option("-f,--format", o.format, "report format: text, csv, json-lines");
  }
  cmd->add_option("-s,--set", o.overrides, "extra `key=value` assignment, repeatable");
}

btrf::RunConfig resolve(const CommonOptions& o) {
  btrf::RunConfig config = o.config_path.empty() ? btrf::RunConfig{} : btrf::load_config_file(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw btrf::ConfigError("--set expects key=value, got '" + kv + "'");
    btrf::set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.dataset.empty()) config.dataset = o.dataset;
  if (!o.model.empty()) config.model = o.model;
  if (!o.output.empty()) config.output_dir = o.output;
  if (!o.format.empty()) btrf::set_config_value(config, "report_format", o.format);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene coordinate regression forests for camera relocalization"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  int threads = btrf::default_thread_count();
  bool print_defaults = false;
  app.add_option("-j,--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--print-defaults", print_defaults, "print the default configuration and exit");

  CommonOptions synth_opts, train_opts, reloc_opts, eval_opts;
  std::string inspect_model;
  auto* synth = app.add_subcommand("synth", "render the synthetic benchmark dataset");
  add_common(synth, synth_opts, false);
  auto* train = app.add_subcommand("train", "train a forest on a dataset's training split");
  add_common(train, train_opts, false);
  auto* reloc = app.add_subcommand("relocalize", "estimate poses for the test split");
  add_common(reloc, reloc_opts, true);
  auto* eval = app.add_subcommand("evaluate", "relocalize and score the test split for each N_max");
  add_common(eval, eval_opts, true);
  auto* inspect = app.add_subcommand("inspect", "print tree statistics of a model");
  inspect->add_option("model", inspect_model, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? btrf::kExitOk : btrf::kExitUsage;
  }

  if (print_defaults) {
    btrf::write_config(std::cout, btrf::RunConfig{});
    return btrf::kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return btrf::kExitUsage;
  }

  btrf::CommandContext ctx;
  ctx.threads = threads;
  return btrf::run_guarded(
      [&]() -> int {
        if (*synth) return btrf::cmd_synth(resolve(synth_opts), ctx);
        if (*train) return btrf::cmd_train(resolve(train_opts), ctx);
        if (*reloc) return btrf::cmd_relocalize(resolve(reloc_opts), ctx);
        if (*eval) return btrf::cmd_evaluate(resolve(eval_opts), ctx);
        return btrf::cmd_inspect(inspect_model, ctx);
      },
      std::cerr);
}
