// irkm — run, sweep and verify kernel feature-learning experiments.
//
// Exit codes: 0 ok, 1 verification failure, 2 bad config, 3 numerical failure.

#include <iostream>

#include <CLI11.hpp>

#include "irkm/experiments.hpp"
#include "irkm/verify.hpp"

namespace {

constexpr int kVerifyFailed = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const irkm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const irkm::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kConfigError;
  } catch (const irkm::FileNotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const irkm::MissingColumn& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iteratively reweighted kernel machines: experiments and checks"};
  app.set_version_flag("--version", irkm::version_string());
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Train one configuration and write trace.jsonl / summary.json");
  run->add_option("config", config_path, "JSON config")->required();
  auto* sweep = app.add_subcommand("sweep", "Run every (n, seed) pair and write sweep.csv / plotdata.csv");
  sweep->add_option("config", config_path, "JSON config")->required();
  auto* verify = app.add_subcommand("verify", "Run the oracle and invariant checks");
  std::string expr;
  auto* parse = app.add_subcommand("parse-target", "Parse a target expression and print its normal form");
  parse->add_option("expr", expr, "e.g. \"x1 + x2 + x1*x2*x3\"")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    return guarded([&] {
      const auto dir = irkm::cmd_run(irkm::load_config(config_path));
      std::cout << "wrote " << (dir / "trace.jsonl").string() << " and " << (dir / "summary.json").string() << "\n";
      return 0;
    });
  }
  if (*sweep) {
    return guarded([&] {
      const irkm::ExperimentConfig config = irkm::load_config(config_path);
      const auto rows = irkm::cmd_sweep(config);
      std::cout << "wrote " << rows.size() << " rows to " << config.out_dir << "/sweep.csv\n";
      return 0;
    });
  }
  if (*verify) {
    const auto checks = irkm::run_verification();
    std::cout << irkm::format_report(checks);
    for (const auto& c : checks) {
      if (!c.passed) return kVerifyFailed;
    }
    return 0;
  }
  return guarded([&] {
    const irkm::FourierPolynomial f = irkm::parse_target(expr);
    std::cout << irkm::to_string(f) << "\n";
    std::cout << "terms " << f.size() << ", degree " << f.degree() << ", dim " << f.dim() << ", leap "
              << irkm::leap_complexity(f) << "\n";
    return 0;
  });
}
