#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qudit/commands.hpp"
#include "qudit/error.hpp"
#include "qudit/version.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> data;
  bool allow_large_rank = false;
};

qudit::RunConfig load_config(const Options& o) {
  if (o.config_path.empty() == o.preset.empty()) {
    throw qudit::ConfigError("command line", "exactly one of --config or --preset is required");
  }
  std::string text;
  if (!o.preset.empty()) {
    text = qudit::preset_text(o.preset);
  } else {
    std::ifstream in(o.config_path);
    if (!in) throw qudit::ConfigError(o.config_path, "cannot open configuration file");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  if (!o.overrides.empty()) text = qudit::apply_overrides(text, o.overrides);
  qudit::RunConfig config = qudit::parse_config(text);
  if (o.seed) config.ensemble.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw qudit::ConfigError("--threads", "must be at least 1");
    config.ensemble.threads = *o.threads;
  }
  return config;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  cmd->add_option("--preset", o.preset, "bundled preset (lagd, gdlu, gd2)");
  cmd->add_option("--set", o.overrides, "override, e.g. system.J_K=0 (repeatable)");
  cmd->add_option("--seed", o.seed, "ensemble seed");
  cmd->add_option("--threads", o.threads, "worker threads");
}

const char* describe(const std::string& task) {
  if (task == "spectrum") return "powder EPR spectrum over the field grid";
  if (task == "heatcap") return "magnetic heat capacity c/R versus temperature";
  if (task == "chi") return "powder chi*T versus temperature";
  if (task == "levels") return "energy levels at the configured field";
  if (task == "rabi-map") return "transition frequencies and Rabi rates per mT of drive";
  if (task == "universality") return "reachability closure of the addressable transition graph";
  if (task == "fit-decay") return "fit echo decay traces";
  if (task == "nutation") return "Fourier analysis of nutation traces";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-qudit simulation toolkit"};
  app.set_version_flag("--version", std::string("qudit ") + qudit::kVersion);
  app.require_subcommand(1);
  Options o;

  for (const auto& name : qudit::subcommand_names()) {
    CLI::App* cmd = app.add_subcommand(name, describe(name));
    add_common(cmd, o);
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--data", o.data, "baseline table (heatcap) or trace files/directories (fit-decay, nutation)");
    cmd->add_flag("--allow-large-rank", o.allow_large_rank, "allow the Lie-rank check above 16 levels");
  }
  CLI::App* show = app.add_subcommand("config", "print the resolved configuration as canonical JSON");
  add_common(show, o);
  app.add_subcommand("presets", "list the bundled presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(qudit::ExitCode::usage);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "presets") {
    for (const auto& p : qudit::preset_names()) std::cout << p << "\n";
    return 0;
  }

  qudit::CommandContext ctx;
  try {
    ctx.config = load_config(o);
  } catch (const qudit::ConfigError& e) {
    std::cerr << "qudit " << name << ": " << e.what() << "\n";
    return static_cast<int>(qudit::ExitCode::usage);
  }
  if (name == "config") {
    std::cout << qudit::serialize_config(ctx.config) << "# config_hash=" << qudit::config_hash(ctx.config) << "\n";
    return 0;
  }
  ctx.out_dir = o.out_dir;
  ctx.data.assign(o.data.begin(), o.data.end());
  ctx.allow_large_rank = o.allow_large_rank;
  return static_cast<int>(qudit::run_subcommand(name, ctx, std::cout, std::cerr).code);
}
