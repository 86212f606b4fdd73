#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "gpe/run.hpp"

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  bool paper_scale = false;
};

gpe::RunConfig load(const Common& o) {
  std::map<std::string, std::string> kv;
  if (!o.config.empty()) kv = gpe::parse_key_values(gpe::io::read_file(o.config));
  for (const auto& s : o.sets) gpe::apply_override(kv, s);
  return gpe::config_from_key_values(kv);
}

std::filesystem::path out_dir(const Common& o, const gpe::RunConfig& c) {
  return o.out.empty() ? std::filesystem::path(c.output_dir) : std::filesystem::path(o.out);
}

int report(const gpe::SolveResult& r) {
  std::cout << "status=" << to_string(r.status) << " energy=" << gpe::io::format_double(r.energy)
            << " iterations=" << r.iterations() << " fft_count=" << r.fft_count << "\n";
  if (r.status != gpe::SolveStatus::converged) {
    std::cerr << "solver did not converge (" << to_string(r.status) << ")\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of the rotating Gross-Pitaevskii equation"};
  app.require_subcommand(1);

  Common o;
  std::string suite = "all";
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config, "configuration file (key = value)");
    if (needs_config) opt->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "override, key=value")->allow_extra_args(false);
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--paper-scale", o.paper_scale, "use the published problem sizes");
  };

  auto* solve = app.add_subcommand("solve", "single run");
  add_common(solve, true);
  auto* mg = app.add_subcommand("multigrid", "coarse-to-fine continuation");
  add_common(mg, true);
  auto* bench = app.add_subcommand("bench", "benchmark suite");
  add_common(bench, false);
  bench->add_option("suite", suite, "solvers_1d|precond_1d|eta_sweep_1d|rotation_2d|multigrid_2d|all");
  auto* analyze = app.add_subcommand("analyze", "condition numbers and amplification rates");
  add_common(analyze, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) {
      const std::filesystem::path dir = o.out.empty() ? "bench" : o.out;
      std::filesystem::create_directories(dir);
      std::vector<std::string> suites =
          suite == "all" ? gpe::benchmark_suites() : std::vector<std::string>{suite};
      for (const auto& s : suites) {
        const std::string table = gpe::run_benchmark(
            s, o.paper_scale, [&](const std::string& label) { std::cerr << s << ": " << label << "\n"; });
        gpe::io::write_atomic(dir / ("bench_" + s + ".csv"), table);
        std::cout << table;
      }
      return 0;
    }
    const gpe::RunConfig c = load(o);
    if (solve->parsed()) return report(gpe::run_single(c, out_dir(o, c)));
    if (mg->parsed()) return report(gpe::run_multigrid(c, out_dir(o, c)).final());
    if (analyze->parsed()) {
      gpe::run_analysis(c, out_dir(o, c));
      return 0;
    }
  } catch (const gpe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gpe::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
