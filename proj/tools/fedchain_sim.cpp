#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fedchain/harness.hpp"

namespace {

using fedchain::BlowupError;
using fedchain::Config;
using fedchain::ConfigError;
using fedchain::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitRunError = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitBlowup = 3;

void usage(std::ostream& out) {
  out << "usage: fedchain-sim <command> [flags]\n"
         "\n"
         "commands:\n"
         "  run         execute every optimizer spec in a config, write CSVs\n"
         "  compare     rank >= 2 optimizer specs by median suboptimality\n"
         "  lowerbound  run an optimizer on the hard instance and check the\n"
         "              analytic round-complexity floor\n"
         "  presets     `presets list` prints available preset experiments;\n"
         "              `presets run NAME` executes one\n"
         "\n"
         "flags:\n"
         "  --config PATH   experiment config (run/compare)\n"
         "  --seed U64      override run.seed\n"
         "  --out DIR       override out.dir\n"
         "  --repeat N      override run.repeat\n"
         "  --threads N     worker threads (or env FEDCHAIN_SIM_THREADS)\n"
         "lowerbound flags: --l2 V --zeta-hat V [--mu V] --rounds R\n"
         "                  --method NAME [--k N] [--eta V|preset]\n"
         "                  [--s N] [--wild-guess]\n";
}

struct Flags {
  std::map<std::string, std::string> values;
  bool wild_guess = false;

  bool has(const std::string& k) const { return values.count(k) > 0; }
  std::string get(const std::string& k, const std::string& dflt = "") const {
    auto it = values.find(k);
    return it == values.end() ? dflt : it->second;
  }
};

Flags parse_flags(int argc, char** argv, int start) {
  Flags f;
  for (int i = start; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--wild-guess") {
      f.wild_guess = true;
      continue;
    }
    if (a.rfind("--", 0) != 0) {
      throw ConfigError("unexpected argument: " + a);
    }
    if (i + 1 >= argc) throw ConfigError("flag " + a + " needs a value");
    f.values[a.substr(2)] = argv[++i];
  }
  return f;
}

int resolve_threads(const Flags& f) {
  if (f.has("threads")) return std::stoi(f.get("threads"));
  if (const char* env = std::getenv("FEDCHAIN_SIM_THREADS")) {
    return std::stoi(env);
  }
  return 1;
}

ExperimentConfig load_experiment(const Flags& f) {
  if (!f.has("config")) throw ConfigError("missing --config PATH");
  ExperimentConfig exp =
      fedchain::parse_experiment(Config::load(f.get("config")));
  if (f.has("seed")) exp.seed = std::stoull(f.get("seed"));
  if (f.has("out")) exp.out_dir = f.get("out");
  if (f.has("repeat")) exp.repeat = std::stoi(f.get("repeat"));
  exp.threads = resolve_threads(f);
  return exp;
}

int dispatch(int argc, char** argv) {
  if (argc < 2) {
    usage(std::cerr);
    return kExitConfigError;
  }
  const std::string cmd = argv[1];

  if (cmd == "run") {
    cli_run(load_experiment(parse_flags(argc, argv, 2)), std::cout);
    return kExitOk;
  }
  if (cmd == "compare") {
    cli_compare(load_experiment(parse_flags(argc, argv, 2)), std::cout);
    return kExitOk;
  }
  if (cmd == "lowerbound") {
    const Flags f = parse_flags(argc, argv, 2);
    fedchain::OptimizerSpec spec;
    spec.method = f.get("method", "sgd");
    spec.name = spec.method;
    spec.k = f.has("k") ? std::stoi(f.get("k")) : 1;
    spec.eta = f.get("eta", "preset");
    spec.s = f.has("s") ? std::stoi(f.get("s")) : 0;
    const double l2 = std::stod(f.get("l2", "1"));
    const double zh = std::stod(f.get("zeta-hat", "1"));
    const double mu = f.has("mu") ? std::stod(f.get("mu")) : 0.0;
    const int rounds = std::stoi(f.get("rounds", "10"));
    run_lowerbound(l2, zh, mu, rounds, spec, f.wild_guess, std::cout);
    return kExitOk;
  }
  if (cmd == "presets") {
    if (argc >= 3 && std::string(argv[2]) == "list") {
      for (const auto& n : fedchain::preset_names()) std::cout << n << "\n";
      return kExitOk;
    }
    if (argc >= 4 && std::string(argv[2]) == "run") {
      const Flags f = parse_flags(argc, argv, 4);
      const std::string out_dir = f.get("out", "preset_out");
      const std::uint64_t seed =
          f.has("seed") ? std::stoull(f.get("seed")) : 1;
      auto exps = fedchain::make_preset(argv[3], out_dir, seed);
      for (auto& exp : exps) {
        exp.threads = resolve_threads(f);
        cli_run(exp, std::cout);
      }
      return kExitOk;
    }
    usage(std::cerr);
    return kExitConfigError;
  }
  if (cmd == "--help" || cmd == "-h" || cmd == "help") {
    usage(std::cout);
    return kExitOk;
  }
  std::cerr << "unknown command: " << cmd << "\n";
  usage(std::cerr);
  return kExitConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const BlowupError& e) {
    std::cerr << "numerical blow-up: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunError;
  }
}
