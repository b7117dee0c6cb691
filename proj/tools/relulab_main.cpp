// Command-line front end. Everything substantive happens behind the C API in
// the shared library; this file only parses flags, moves strings to disk, and
// maps statuses to exit codes (0 ok, 1 verification failure, 2 usage or
// precondition error).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "relulab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailed = 1;
constexpr int kExitUsage = 2;

struct ScopedString {
  char* value = nullptr;
  ~ScopedString() { rrl_string_free(value); }
  std::string str() const { return value == nullptr ? std::string() : std::string(value); }
};

int fail(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return kExitUsage;
}

int fail_api(const std::string& context) {
  std::cerr << "error: " << context << ": " << rrl_last_error() << "\n";
  return kExitUsage;
}

bool write_output(const std::string& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    return false;
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  return static_cast<bool>(out);
}

bool read_input(const std::string& path, std::string* content) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  *content = ss.str();
  return true;
}

// Every command echoes its effective configuration before doing any work;
// reruns with the same flags produce byte-identical files.
bool echo_config(const std::string& dir, const nlohmann::ordered_json& config) {
  return write_output(dir, "config.json", config.dump(2) + "\n");
}

struct BoundsArgs {
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  double sigma = 0.0;
  double tau = 0.0;
  double vs = 0.0;
  std::uint32_t depth = 0;
  double kappa = 4.0;
  double epsilon = 0.0;
  bool has_epsilon = false;
  std::string output_dir = ".";
  std::string format = "json";
};

std::string bounds_report_csv(const nlohmann::json& report) {
  std::ostringstream out;
  out.precision(17);
  out << "vf,c,delta,minimax_lb,mi_upper,packing_log_lb\n"
      << report["vf"].get<double>() << "," << report["c"].get<double>() << ","
      << report["delta"].get<double>() << "," << report["minimax_lb"].get<double>() << ","
      << report["mi_upper"].get<double>() << "," << report["packing_log_lb"].get<double>()
      << "\n";
  return out.str();
}

int run_bounds(const BoundsArgs& args, bool epsilon_required) {
  if (args.d < 10)
    return fail("bounds require an input dimension d >= 10 (got d=" + std::to_string(args.d) +
                ")");
  if (epsilon_required && !args.has_epsilon) return fail("complexity requires --epsilon");

  nlohmann::ordered_json config = {
      {"command", epsilon_required ? "complexity" : "bounds"},
      {"n", args.n},
      {"d", args.d},
      {"sigma", args.sigma},
      {"tau", args.tau},
      {"vs", args.vs},
      {"L", args.depth},
      {"kappa", args.kappa},
      {"output_dir", args.output_dir},
      {"format", args.format}};
  if (args.has_epsilon) config["epsilon"] = args.epsilon;
  if (!echo_config(args.output_dir, config)) return kExitUsage;

  rrl_theory_inputs inputs{args.n, args.d, args.sigma, args.tau,
                           args.vs, args.depth, args.kappa};
  ScopedString report_text;
  if (rrl_bound_report_json(&inputs, &report_text.value) != RRL_OK)
    return fail_api("bound report");

  nlohmann::ordered_json report = nlohmann::ordered_json::parse(report_text.str());
  if (args.has_epsilon) {
    std::uint64_t required = 0;
    if (rrl_sample_complexity(&inputs, args.epsilon, &required) != RRL_OK)
      return fail_api("sample complexity");
    report["epsilon"] = args.epsilon;
    report["sample_complexity"] = required;
  }

  const std::string report_json = report.dump();
  if (!write_output(args.output_dir, "report.json", report_json + "\n")) return kExitUsage;
  if (args.format == "csv")
    std::cout << bounds_report_csv(report);
  else
    std::cout << report_json << "\n";
  return kExitOk;
}

int run_pack(std::uint32_t d, std::int64_t m, double delta, double tau, double vf,
             std::uint64_t seed, const std::string& output_dir) {
  if (m > 0 && static_cast<std::uint64_t>(m) > d / 10)
    return fail("codeword weight m=" + std::to_string(m) + " exceeds floor(d/10)=" +
                std::to_string(d / 10) + "; use a larger input dimension d");
  nlohmann::ordered_json config = {{"command", "pack"}, {"d", d},     {"tau", tau},
                                   {"vf", vf},          {"seed", seed},
                                   {"output_dir", output_dir}};
  if (m > 0) config["m"] = m;
  if (delta > 0.0) config["delta"] = delta;
  if (!echo_config(output_dir, config)) return kExitUsage;

  rrl_ensemble* raw = nullptr;
  rrl_status status;
  if (m > 0)
    status = rrl_ensemble_build(d, static_cast<std::uint32_t>(m), tau, vf, seed, &raw);
  else
    status = rrl_ensemble_build_for_radius(d, delta, tau, vf, seed, &raw);
  if (status != RRL_OK) return fail_api("ensemble construction");
  std::unique_ptr<rrl_ensemble, decltype(&rrl_ensemble_free)> ensemble(raw, &rrl_ensemble_free);

  ScopedString codebook;
  ScopedString ensemble_text;
  ScopedString certificate;
  int all_pass = 0;
  if (rrl_ensemble_codebook_text(ensemble.get(), &codebook.value) != RRL_OK ||
      rrl_ensemble_json(ensemble.get(), &ensemble_text.value) != RRL_OK ||
      rrl_ensemble_certificate_csv(ensemble.get(), &certificate.value, &all_pass) != RRL_OK)
    return fail_api("ensemble export");

  if (!write_output(output_dir, "codebook.txt", codebook.str()) ||
      !write_output(output_dir, "ensemble.json", ensemble_text.str() + "\n") ||
      !write_output(output_dir, "certificate.csv", certificate.str()))
    return kExitUsage;

  std::uint32_t members = 0;
  std::uint32_t weight = 0;
  rrl_ensemble_size(ensemble.get(), &members);
  rrl_ensemble_weight(ensemble.get(), &weight);
  nlohmann::ordered_json summary = {
      {"members", members}, {"m", weight}, {"all_pairs_pass", all_pass == 1}};
  std::cout << summary.dump() << "\n";
  return all_pass == 1 ? kExitOk : kExitVerificationFailed;
}

int run_verify(std::uint64_t samples, std::uint64_t seed, const std::string& output_dir) {
  if (!echo_config(output_dir, {{"command", "verify"},
                                {"samples", samples},
                                {"seed", seed},
                                {"output_dir", output_dir}}))
    return kExitUsage;
  ScopedString csv;
  int all_pass = 0;
  if (rrl_verify_csv(samples, seed, &csv.value, &all_pass) != RRL_OK)
    return fail_api("verification suite");
  if (!write_output(output_dir, "verification.csv", csv.str())) return kExitUsage;
  std::cout << csv.str();
  return all_pass == 1 ? kExitOk : kExitVerificationFailed;
}

int run_scaling(const std::string& config_path, const std::string& output_dir) {
  std::string config_text;
  if (!read_input(config_path, &config_text))
    return fail("cannot read sweep config: " + config_path);

  ScopedString canonical;
  if (rrl_sweep_config_echo(config_text.c_str(), &canonical.value) != RRL_OK)
    return fail_api("sweep config");
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (!write_output(output_dir, "config.json", canonical.str())) return kExitUsage;

  ScopedString rows;
  ScopedString aggregate;
  if (rrl_sweep_run(config_text.c_str(), &rows.value, &aggregate.value) != RRL_OK)
    return fail_api("sweep");
  if (!write_output(output_dir, "series_rows.csv", rows.str()) ||
      !write_output(output_dir, "series_aggregate.csv", aggregate.str()))
    return kExitUsage;
  std::cout << aggregate.str();
  return kExitOk;
}

int run_fit(const std::string& series_path, const std::string& output_dir,
            const std::string& format) {
  if (!echo_config(output_dir, {{"command", "fit"},
                                {"series", series_path},
                                {"output_dir", output_dir},
                                {"format", format}}))
    return kExitUsage;
  std::string series_text;
  if (!read_input(series_path, &series_text))
    return fail("cannot read series: " + series_path);
  ScopedString verdict;
  ScopedString plot;
  if (rrl_fit_aggregate_csv(series_text.c_str(), &verdict.value, &plot.value) != RRL_OK)
    return fail_api("fit");
  if (!write_output(output_dir, "fit.json", verdict.str() + "\n") ||
      !write_output(output_dir, "fit_points.csv", plot.str()))
    return kExitUsage;
  if (format == "csv")
    std::cout << plot.str();
  else
    std::cout << verdict.str() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mini-max lower bounds, packing ensembles, and learning-curve "
               "rate fits for sparse ReLU feed-forward networks"};
  app.require_subcommand(1);

  BoundsArgs bounds_args;
  const auto add_bounds_flags = [&bounds_args](CLI::App* cmd) {
    cmd->add_option("--n", bounds_args.n, "training samples")->required();
    cmd->add_option("--d", bounds_args.d, "input dimension (>= 10)")->required();
    cmd->add_option("--sigma", bounds_args.sigma, "noise std")->required();
    cmd->add_option("--tau", bounds_args.tau, "packing constant")->required();
    cmd->add_option("--vs", bounds_args.vs, "layer l1 budget")->required();
    cmd->add_option("--L", bounds_args.depth, "hidden layers")->required();
    cmd->add_option("--kappa", bounds_args.kappa, "local-packing constant (default 4)");
    cmd->add_option("--output-dir,-o", bounds_args.output_dir, "output directory");
    cmd->add_option("--format", bounds_args.format, "stdout format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* bounds_cmd = app.add_subcommand("bounds", "closed-form risk lower bound report");
  add_bounds_flags(bounds_cmd);
  CLI::Option* eps_opt =
      bounds_cmd->add_option("--epsilon", bounds_args.epsilon, "also report the sample count");

  CLI::App* complexity_cmd =
      app.add_subcommand("complexity", "samples needed for a target error");
  add_bounds_flags(complexity_cmd);
  CLI::Option* eps_opt2 =
      complexity_cmd->add_option("--epsilon", bounds_args.epsilon, "target error sqrt")
          ->required();

  std::uint32_t pack_d = 0;
  std::int64_t pack_m = 0;
  double pack_delta = 0.0;
  double pack_tau = 0.0;
  double pack_vf = 0.0;
  std::uint64_t pack_seed = 0;
  std::string pack_out = ".";
  CLI::App* pack_cmd =
      app.add_subcommand("pack", "build a separated network family and its certificate");
  pack_cmd->add_option("--d", pack_d, "input dimension (>= 10)")->required();
  CLI::Option* m_opt = pack_cmd->add_option("--m", pack_m, "codeword weight");
  CLI::Option* delta_opt = pack_cmd->add_option("--delta", pack_delta, "packing radius");
  m_opt->excludes(delta_opt);
  pack_cmd->add_option("--tau", pack_tau, "packing constant")->required();
  pack_cmd->add_option("--vf", pack_vf, "capacity factor")->required();
  pack_cmd->add_option("--seed", pack_seed, "construction seed");
  pack_cmd->add_option("--output-dir,-o", pack_out, "output directory");

  std::uint64_t verify_samples = 1000000;
  std::uint64_t verify_seed = 0;
  std::string verify_out = ".";
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Monte Carlo verification of the closed-form moments");
  verify_cmd->add_option("--samples", verify_samples, "samples per estimate");
  verify_cmd->add_option("--seed", verify_seed, "base seed");
  verify_cmd->add_option("--output-dir,-o", verify_out, "output directory");

  std::string scaling_config;
  std::string scaling_out = ".";
  CLI::App* scaling_cmd =
      app.add_subcommand("scaling", "teacher-student error sweep over training-set sizes");
  scaling_cmd->add_option("--config", scaling_config, "sweep config JSON path")->required();
  scaling_cmd->add_option("--output-dir,-o", scaling_out, "output directory");

  std::string fit_series;
  std::string fit_out = ".";
  std::string fit_format = "json";
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit the two candidate rate curves");
  fit_cmd->add_option("--series", fit_series, "aggregate series CSV path")->required();
  fit_cmd->add_option("--output-dir,-o", fit_out, "output directory");
  fit_cmd->add_option("--format", fit_format, "stdout format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (bounds_cmd->parsed()) {
    bounds_args.has_epsilon = eps_opt->count() > 0;
    return run_bounds(bounds_args, /*epsilon_required=*/false);
  }
  if (complexity_cmd->parsed()) {
    bounds_args.has_epsilon = eps_opt2->count() > 0;
    return run_bounds(bounds_args, /*epsilon_required=*/true);
  }
  if (pack_cmd->parsed()) {
    if (m_opt->count() == 0 && delta_opt->count() == 0)
      return fail("pack requires either --m or --delta");
    return run_pack(pack_d, m_opt->count() > 0 ? pack_m : 0,
                    delta_opt->count() > 0 ? pack_delta : 0.0, pack_tau, pack_vf, pack_seed,
                    pack_out);
  }
  if (verify_cmd->parsed()) return run_verify(verify_samples, verify_seed, verify_out);
  if (scaling_cmd->parsed()) return run_scaling(scaling_config, scaling_out);
  if (fit_cmd->parsed()) return run_fit(fit_series, fit_out, fit_format);
  return kExitUsage;
}
