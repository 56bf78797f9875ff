// Command-line front end; talks to the library only through the C API.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "tubesynth/tubesynth.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  long long seed = -1;
  bool quiet = false;
};

int run(const std::string& command, const Options& opt) {
  tsyn_experiment* exp = nullptr;
  tsyn_status st = tsyn_experiment_load(opt.config.c_str(), &exp);
  if (st != TSYN_OK) {
    std::fprintf(stderr, "tubesynth: %s\n", tsyn_last_error());
    return st;
  }
  if (!opt.out.empty()) tsyn_experiment_set_output_dir(exp, opt.out.c_str());
  if (opt.seed >= 0) tsyn_experiment_set_seed(exp, static_cast<uint64_t>(opt.seed));

  if (command == "decompose") st = tsyn_decompose(exp);
  else if (command == "synth") st = tsyn_synth(exp);
  else if (command == "simulate") st = tsyn_simulate(exp);
  else st = tsyn_verify(exp);

  const char* summary = tsyn_experiment_summary(exp);
  // The decomposition listing is the command's output, so --quiet keeps it.
  if (*summary && (!opt.quiet || command == "decompose")) std::fputs(summary, stdout);
  if (*tsyn_experiment_last_error(exp)) std::fprintf(stderr, "tubesynth: %s\n", tsyn_experiment_last_error(exp));
  else if (st != TSYN_OK && !opt.quiet) std::fprintf(stderr, "tubesynth: %s\n", tsyn_status_name(st));
  if (!opt.quiet && command != "decompose")
    std::fprintf(stderr, "output directory: %s\n", tsyn_experiment_output_dir(exp));
  tsyn_experiment_free(exp);
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controller synthesis for Buchi specifications with spatiotemporal tubes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tsyn_version()));
  Options opt;
  std::string chosen;
  for (const char* name : {"decompose", "synth", "simulate", "verify"}) {
    const char* help = std::string(name) == "decompose" ? "print the accepting fragment, triplets and switcher"
                       : std::string(name) == "synth"   ? "synthesize and verify one tube per distinct triplet"
                       : std::string(name) == "simulate" ? "run the closed loop and monitor the trace"
                                                         : "re-run the monitor on <out>/trace.csv";
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (default: config output_dir, then $TUBESYNTH_OUT)");
    sub->add_option("--seed", opt.seed, "override the disturbance seed")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", opt.quiet, "suppress the summary");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : TSYN_CONFIG_ERROR;
  }
  return run(chosen, opt);
}
