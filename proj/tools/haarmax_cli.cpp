// Command-line front end: simulate (config-driven experiment), the constants
// verification report, direct tail queries, and a coupling-diagnostics sweep.
// Exit codes: 0 success, 1 a configured acceptance threshold failed,
// 2 config/usage error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "haarmax/experiments.hpp"

namespace {

haarmax::ExtremalMode parse_mode(const std::string& s) {
  if (s == "max_signed") return haarmax::ExtremalMode::MaxSigned;
  if (s == "max_abs") return haarmax::ExtremalMode::MaxAbs;
  if (s == "min") return haarmax::ExtremalMode::Min;
  throw haarmax::ConfigError("mode", "expected max_signed|max_abs|min, got '" + s + "'");
}

haarmax::EmitFormat parse_format(const std::string& s) {
  if (s == "csv") return haarmax::EmitFormat::Csv;
  if (s == "json") return haarmax::EmitFormat::Json;
  if (s == "plotdata") return haarmax::EmitFormat::Plotdata;
  throw haarmax::ConfigError("format", "expected csv|json|plotdata, got '" + s + "'");
}

int cmd_simulate(const std::string& config_path, const std::string& seed_str,
                 int workers, const std::string& out_path, const std::string& format) {
  haarmax::ExperimentConfig cfg = haarmax::load_config(config_path);
  if (!seed_str.empty()) cfg.seed = haarmax::detail::parse_u64("seed", seed_str);
  if (workers > 0) cfg.workers = workers;
  haarmax::ExperimentResult result = haarmax::run(cfg);
  haarmax::emit(result, parse_format(format), out_path);
  if (out_path != "-") {
    std::cerr << "wrote " << format << " to " << out_path << " (m = " << cfg.M
              << ", runtime " << result.runtime_seconds << " s)\n";
    if (result.haar)
      std::cerr << "  haar: ks_vs_limit = " << result.haar->ks_vs_limit
                << (result.haar->ks_vs_exact
                        ? ", ks_vs_exact = " + std::to_string(*result.haar->ks_vs_exact)
                        : "")
                << "\n";
    if (result.gaussian)
      std::cerr << "  gaussian: ks_vs_limit = " << result.gaussian->ks_vs_limit << "\n";
    if (result.ks_two_sample)
      std::cerr << "  two-sample ks = " << *result.ks_two_sample << "\n";
  }
  return haarmax::thresholds_ok(result) ? 0 : 1;
}

int cmd_tail(const std::string& spectrum_csv, double t, const std::string& mode_s,
             long long samples, const std::string& seed_str) {
  const std::uint64_t seed =
      seed_str.empty() ? 0 : haarmax::detail::parse_u64("seed", seed_str);
  haarmax::Spectrum spectrum(
      haarmax::detail::parse_spectrum_values("spectrum", spectrum_csv));
  const haarmax::ExtremalMode mode = parse_mode(mode_s);
  haarmax::TailQuery query{spectrum, t, mode};

  if (mode != haarmax::ExtremalMode::Min && t > 0.0) {
    double a = spectrum.values[0];
    for (double v : spectrum.values) a = std::max(a, v);
    if (mode == haarmax::ExtremalMode::MaxAbs || a > 0.0) {
      const auto asym = haarmax::tail_asymptotic(query);
      std::cout << "asymptotic = " << haarmax::detail::fmt17(asym.value)
                << (asym.clipped ? "  (clipped to 1)" : "") << "\n";
    } else {
      std::cout << "asymptotic = n/a (no positive direction)\n";
    }
  } else {
    std::cout << "asymptotic = n/a for this query (lower tail / t <= 0)\n";
  }

  haarmax::RandomStream stream = haarmax::substream(seed, 0);
  const auto mc = haarmax::tail_mc(query, samples, stream);
  std::cout << "mc_estimate = " << haarmax::detail::fmt17(mc.estimate)
            << "  std_error = " << haarmax::detail::fmt17(mc.std_error) << "  (samples = "
            << samples << ")\n";
  return 0;
}

int cmd_diagnose(const std::string& grid_s, int replicas, const std::string& seed_str,
                 const std::string& field_s) {
  const std::uint64_t seed =
      seed_str.empty() ? 0 : haarmax::detail::parse_u64("seed", seed_str);
  if (field_s != "real" && field_s != "complex")
    throw haarmax::ConfigError("field", "expected real|complex");
  const haarmax::FieldKind field =
      field_s == "real" ? haarmax::FieldKind::Real : haarmax::FieldKind::Complex;

  std::vector<std::pair<long long, long long>> grid;
  std::stringstream ss(grid_s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto colon = cell.find(':');
    if (colon == std::string::npos)
      throw haarmax::ConfigError("grid", "expected N:k pairs, got '" + cell + "'");
    grid.emplace_back(std::stoll(cell.substr(0, colon)), std::stoll(cell.substr(colon + 1)));
  }

  std::printf("%8s %5s %12s %12s %8s %12s %12s %8s\n", "N", "k", "med_eps", "bound_eps",
              "ratio", "med_L", "bound_L", "ratio");
  for (const auto& [N, k] : grid) {
    std::vector<double> eps(replicas), maxL(replicas);
    for (int r = 0; r < replicas; ++r) {
      haarmax::RandomStream stream = haarmax::substream(seed, static_cast<std::uint64_t>(r));
      haarmax::CouplingDiagnostics d;
      if (field == haarmax::FieldKind::Real) {
        auto Y = haarmax::gaussian_block<double>(N, k, stream);
        d = haarmax::coupling_diagnostics(haarmax::gram_schmidt_partial(Y));
      } else {
        auto Y = haarmax::gaussian_block<std::complex<double>>(N, k, stream);
        d = haarmax::coupling_diagnostics(haarmax::gram_schmidt_partial(Y));
      }
      eps[r] = d.eps_N_k;
      maxL[r] = d.max_L;
    }
    const double logN = std::log(static_cast<double>(N));
    const double bound_eps =
        logN * logN * logN * std::sqrt(static_cast<double>(k) / static_cast<double>(N));
    const double bound_L = logN / std::sqrt(static_cast<double>(N));
    const double med_eps = haarmax::quantile(haarmax::EmpiricalSample(eps), 0.5);
    const double med_L = haarmax::quantile(haarmax::EmpiricalSample(maxL), 0.5);
    std::printf("%8lld %5lld %12.5g %12.5g %8.4f %12.5g %12.5g %8.4f\n", N, k, med_eps,
                bound_eps, med_eps / bound_eps, med_L, bound_L, med_L / bound_L);
    if (med_eps > bound_eps || med_L > bound_L)
      std::fprintf(stderr, "warning: median diagnostic exceeds its soft bound at N=%lld k=%lld\n",
                   N, k);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo harness for extremal statistics of quadratic forms of "
               "Haar-orthogonal and Gaussian columns"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run an experiment config");
  std::string config_path, out_path = "-", format = "csv", seed_str;
  int workers = 0;
  sim->add_option("--config", config_path, "config file path")->required();
  sim->add_option("--seed", seed_str, "override the config seed (decimal or 0x-hex)");
  sim->add_option("--workers", workers, "override the config worker count");
  sim->add_option("--out", out_path, "output path ('-' = stdout)");
  sim->add_option("--format", format, "csv|json|plotdata");

  // verify-constants
  auto* ver = app.add_subcommand("verify-constants",
                                 "closed-form constants vs oracle suite");

  // tail
  auto* tail = app.add_subcommand("tail", "tail probability query");
  std::string tail_spectrum, tail_mode = "max_signed", tail_seed;
  double tail_t = 0.0;
  long long tail_samples = 1000000;
  tail->add_option("--spectrum", tail_spectrum, "comma-separated values")->required();
  tail->add_option("--t", tail_t, "threshold")->required();
  tail->add_option("--mode", tail_mode, "max_signed|max_abs|min");
  tail->add_option("--samples", tail_samples, "MC sample count");
  tail->add_option("--seed", tail_seed, "MC seed (decimal or 0x-hex)");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "coupling diagnostics sweep");
  std::string diag_grid = "1000:5,2000:10,4000:20", diag_field = "real", diag_seed;
  int diag_replicas = 200;
  diag->add_option("--grid", diag_grid, "comma-separated N:k cells");
  diag->add_option("--replicas", diag_replicas, "replicas per cell");
  diag->add_option("--seed", diag_seed, "seed (decimal or 0x-hex)");
  diag->add_option("--field", diag_field, "real|complex");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, seed_str, workers, out_path, format);
    if (ver->parsed()) {
      const auto rep = haarmax::verify_constants();
      haarmax::print_report(rep, std::cout);
      return rep.all_pass() ? 0 : 1;
    }
    if (tail->parsed())
      return cmd_tail(tail_spectrum, tail_t, tail_mode, tail_samples, tail_seed);
    if (diag->parsed())
      return cmd_diagnose(diag_grid, diag_replicas, diag_seed, diag_field);
  } catch (const haarmax::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const haarmax::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;  // unreachable with require_subcommand(1)
}
