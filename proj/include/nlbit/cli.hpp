#pragma once

// Command-line front end. Exit codes: 0 pass, 1 statistical failure,
// 2 usage error, 3 I/O error.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nlbit/acceptance.hpp"
#include "nlbit/analysis.hpp"
#include "nlbit/report.hpp"

namespace nlbit::cli {

enum ExitCode : int { kPass = 0, kStatFailure = 1, kUsage = 2, kIoError = 3 };

struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string command;
  std::string protocol = "pr-singlet";
  std::uint64_t n = 100'000;
  std::uint64_t seed = kDefaultSeed;
  bool entropy_seed = false;
  unsigned workers = 1;
  std::string format = "json";
  std::string output_path;

  std::optional<double> theta;
  std::string nu_a;
  std::string nu_b;
  std::uint64_t angles = 13;
  std::string fixed = "alice";
  bool quick = false;
};

/// Parses "x,y,z" into a unit vector. Vectors off the sphere by more than
/// 1e-6 are normalized with a warning; more than 1e-3 is rejected.
inline UnitVector3 parse_unit_vector(const std::string& text, std::ostream& err) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    double v = 0.0;
    const auto* first = text.data() + start;
    const auto* last = text.data() + end;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw UsageFailure("malformed vector component in '" + text + "'");
    parts.push_back(v);
    start = end + 1;
  }
  if (parts.size() != 3) throw UsageFailure("vector '" + text + "' must have three components");
  const Vec3 v{parts[0], parts[1], parts[2]};
  if (!v.finite()) throw UsageFailure("vector '" + text + "' has non-finite components");
  const double n = norm(v);
  if (std::abs(n - 1.0) > 1e-3) throw UsageFailure(fmt::format("vector '{}' is not a unit vector (norm {})", text, n));
  if (std::abs(n - 1.0) > 1e-6) err << fmt::format("warning: normalizing '{}' (norm {})\n", text, n);
  return UnitVector3::normalized(v);
}

inline ProtocolId require_protocol(const std::string& name) {
  const auto id = parse_protocol(name);
  if (!id) throw UsageFailure("unknown protocol '" + name + "' (pr-singlet, toner-bacon, lhv-baseline)");
  return *id;
}

inline OutputFormat require_format(const std::string& name) {
  if (name == "json") return OutputFormat::Json;
  if (name == "csv") return OutputFormat::Csv;
  throw UsageFailure("unknown format '" + name + "' (json, csv)");
}

inline void emit(const ExperimentConfig& cfg, const std::vector<Record>& records, std::ostream& out) {
  const auto format = require_format(cfg.format);
  if (cfg.output_path.empty()) {
    write_records(out, records, format);
    return;
  }
  std::ofstream file(cfg.output_path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoFailure("cannot open '" + cfg.output_path + "' for writing");
  write_records(file, records, format);
  file.flush();
  if (!file) throw IoFailure("failed writing '" + cfg.output_path + "'");
}

inline int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto protocol = require_protocol(cfg.protocol);
  require_format(cfg.format);
  std::optional<MeasurementPair> pair;
  if (cfg.theta) {
    if (!std::isfinite(*cfg.theta)) throw UsageFailure("--theta must be finite");
    pair = MeasurementPair{UnitVector3(0.0, 0.0, 1.0), UnitVector3::from_polar(*cfg.theta)};
  } else if (!cfg.nu_a.empty() && !cfg.nu_b.empty()) {
    pair = MeasurementPair{parse_unit_vector(cfg.nu_a, err), parse_unit_vector(cfg.nu_b, err)};
  } else {
    throw UsageFailure("simulate needs --theta or both --nu-a and --nu-b");
  }
  const double theta = cfg.theta ? *cfg.theta : angle_between(pair->nu_a, pair->nu_b);
  const Tally tally = simulate(protocol, *pair, cfg.n, cfg.seed, cfg.workers);
  const double prediction = predicted_p_unequal(protocol, *pair);
  const auto record = correlation_record(protocol, theta, cfg.seed, tally, prediction);
  emit(cfg, {record}, out);
  const double z = z_score(CorrelationEstimate::from_counts(tally.unequal, tally.runs), prediction);
  return std::abs(z) <= kSigmaThreshold ? kPass : kStatFailure;
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  const auto protocol = require_protocol(cfg.protocol);
  require_format(cfg.format);
  if (cfg.angles < 2) throw UsageFailure("--angles must be at least 2");
  const auto rows = sweep_correlation(protocol, cfg.angles, cfg.n, cfg.seed, cfg.workers);
  emit(cfg, sweep_records(protocol, cfg.seed, rows), out);
  for (const auto& row : rows)
    if (!(std::abs(row.z) <= kSigmaThreshold)) return kStatFailure;
  return kPass;
}

/// `--protocol pr-box` evaluates the bare PR box exhaustively; the simulation
/// protocols are sampled at the singlet-optimal settings.
inline int cmd_chsh(const ExperimentConfig& cfg, std::ostream& out) {
  require_format(cfg.format);
  const auto optimal = optimal_singlet_chsh_settings();
  CHSHResult res;
  double bound = 4.0;
  if (cfg.protocol == "pr-box") {
    res = chsh_pr_box_exhaustive();
  } else {
    const auto protocol = require_protocol(cfg.protocol);
    res = chsh_protocol(protocol, optimal.settings, cfg.n, cfg.seed, cfg.workers);
    bound = protocol == ProtocolId::LhvBaseline ? 2.0 : 2.0 * std::numbers::sqrt2;
  }
  const bool exhaustive = res.method == ChshMethod::Exhaustive;
  const Record rec{{"protocol", cfg.protocol},
                   {"method", std::string(exhaustive ? "exhaustive" : "monte-carlo")},
                   {"n_per_term", exhaustive ? std::uint64_t{0} : cfg.n},
                   {"seed", cfg.seed},
                   {"a0", optimal.angles[0]},
                   {"a1", optimal.angles[1]},
                   {"b0", optimal.angles[2]},
                   {"b1", optimal.angles[3]},
                   {"E00", res.terms[0][0]},
                   {"E01", res.terms[0][1]},
                   {"E10", res.terms[1][0]},
                   {"E11", res.terms[1][1]},
                   {"S", res.s},
                   {"std_error", res.std_error},
                   {"bound", bound}};
  emit(cfg, {rec}, out);
  return res.s <= bound + kSigmaThreshold * res.std_error ? kPass : kStatFailure;
}

inline int cmd_monogamy(const ExperimentConfig& cfg, std::ostream& out) {
  require_format(cfg.format);
  if (cfg.n == 0) throw UsageFailure("--n must be at least 1");
  std::vector<Record> records;
  bool ok = true;
  for (unsigned x = 0; x < 2; ++x) {
    const double sampled = monogamy_attack(Bit(x), cfg.n, derive_seed(cfg.seed, x));
    const double exact = monogamy_attack_exhaustive(Bit(x));
    ok = ok && sampled == 1.0 && exact == 1.0;
    records.push_back({{"kind", std::string("attack")}, {"x", std::uint64_t{x}}, {"trials", cfg.n},
                       {"seed", cfg.seed}, {"success_rate", sampled}, {"std_error", 0.0}});
    records.push_back({{"kind", std::string("attack-exhaustive")}, {"x", std::uint64_t{x}}, {"trials", std::uint64_t{4}},
                       {"seed", cfg.seed}, {"success_rate", exact}, {"std_error", 0.0}});
  }
  const auto control = monogamy_control(cfg.n, derive_seed(cfg.seed, 2));
  ok = ok && std::abs(control.rate - 0.5) <= kSigmaThreshold * control.std_error;
  records.push_back({{"kind", std::string("control")}, {"x", std::string("random")}, {"trials", cfg.n},
                     {"seed", cfg.seed}, {"success_rate", control.rate}, {"std_error", control.std_error}});
  emit(cfg, records, out);
  return ok ? kPass : kStatFailure;
}

inline int cmd_nosignal(const ExperimentConfig& cfg, std::ostream& out) {
  const auto protocol = require_protocol(cfg.protocol);
  require_format(cfg.format);
  if (cfg.fixed != "alice" && cfg.fixed != "bob") throw UsageFailure("--fixed must be alice or bob");
  const bool alice = cfg.fixed == "alice";
  const double theta = cfg.theta.value_or(std::numbers::pi / 3);
  const UnitVector3 local(0.0, 0.0, 1.0);
  const std::vector<double> remote_thetas{theta, theta + std::numbers::pi, theta + std::numbers::pi / 2};
  std::vector<MeasurementPair> variants;
  for (double t : remote_thetas) {
    const auto remote = UnitVector3::from_polar(t);
    variants.push_back(alice ? MeasurementPair{local, remote} : MeasurementPair{remote, local});
  }
  const auto report = no_signaling_test(protocol, variants, cfg.n, cfg.seed,
                                        alice ? FixedParty::Alice : FixedParty::Bob, cfg.workers);
  const std::string exact = report.exact_pass ? (*report.exact_pass ? "pass" : "fail") : "n/a";
  std::vector<Record> records;
  for (std::size_t i = 0; i < variants.size(); ++i)
    records.push_back({{"protocol", cfg.protocol}, {"fixed", cfg.fixed}, {"variant", std::uint64_t{i}},
                       {"remote_theta", remote_thetas[i]}, {"n", cfg.n}, {"seed", cfg.seed},
                       {"p_zero", report.marginals[i].p_zero}, {"std_error", report.marginals[i].std_error},
                       {"max_deviation", report.max_deviation}, {"max_z", report.max_z}, {"exact", exact}});
  emit(cfg, records, out);
  return report.pass() ? kPass : kStatFailure;
}

inline int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
  const auto results = run_acceptance({cfg.seed, cfg.workers, cfg.quick});
  print_acceptance(out, results);
  if (all_pass(results)) {
    out << "all criteria passed\n";
    return kPass;
  }
  out << "failed:";
  for (const auto& r : results)
    if (!r.pass) out << ' ' << r.id;
  out << '\n';
  return kStatFailure;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-local box and singlet simulation experiments", "nlbit"};
  app.require_subcommand(1);
  ExperimentConfig cfg;

  auto add_common = [&](CLI::App* sub, bool with_format) {
    sub->add_option("--seed", cfg.seed, "64-bit seed")->capture_default_str();
    sub->add_flag("--entropy-seed", cfg.entropy_seed, "draw the seed from the OS entropy source");
    sub->add_option("--workers", cfg.workers, "worker threads (results do not depend on it)")
        ->capture_default_str()
        ->check(CLI::Range(1u, 1024u));
    if (with_format) {
      sub->add_option("--format", cfg.format, "json (newline-delimited) or csv")->capture_default_str();
      sub->add_option("--output", cfg.output_path, "output file (default stdout)");
    }
  };
  auto add_protocol = [&](CLI::App* sub) {
    sub->add_option("--protocol", cfg.protocol, "pr-singlet, toner-bacon or lhv-baseline")->capture_default_str();
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "estimate P(A != B) for one pair of settings");
  add_protocol(simulate_cmd);
  add_common(simulate_cmd, true);
  simulate_cmd->add_option("--n", cfg.n, "runs")->capture_default_str();
  auto* theta_opt = simulate_cmd->add_option("--theta", cfg.theta, "angle between settings, radians");
  simulate_cmd->add_option("--nu-a", cfg.nu_a, "Alice's setting as x,y,z")->excludes(theta_opt);
  simulate_cmd->add_option("--nu-b", cfg.nu_b, "Bob's setting as x,y,z")->excludes(theta_opt);

  auto* sweep_cmd = app.add_subcommand("sweep", "P(A != B) over an angle grid on [0, pi]");
  add_protocol(sweep_cmd);
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--n", cfg.n, "runs per angle")->capture_default_str();
  sweep_cmd->add_option("--angles", cfg.angles, "number of grid angles")->capture_default_str();

  auto* chsh_cmd = app.add_subcommand("chsh", "CHSH value at the singlet-optimal settings");
  chsh_cmd->add_option("--protocol", cfg.protocol, "pr-box, pr-singlet, toner-bacon or lhv-baseline")
      ->capture_default_str();
  add_common(chsh_cmd, true);
  chsh_cmd->add_option("--n", cfg.n, "runs per CHSH term")->capture_default_str();

  auto* monogamy_cmd = app.add_subcommand("monogamy", "tripartite box signaling attack");
  add_common(monogamy_cmd, true);
  monogamy_cmd->add_option("--n", cfg.n, "trials")->capture_default_str();

  auto* nosignal_cmd = app.add_subcommand("nosignal", "local marginals under varied remote settings");
  add_protocol(nosignal_cmd);
  add_common(nosignal_cmd, true);
  nosignal_cmd->add_option("--n", cfg.n, "runs per variant")->capture_default_str();
  nosignal_cmd->add_option("--theta", cfg.theta, "remote setting angle, radians (default pi/3)");
  nosignal_cmd->add_option("--fixed", cfg.fixed, "party whose setting is held fixed: alice or bob")
      ->capture_default_str();

  auto* verify_cmd = app.add_subcommand("verify", "run every acceptance criterion");
  add_common(verify_cmd, false);
  verify_cmd->add_flag("--quick", cfg.quick, "cap sample counts at 1e4");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (cfg.n == 0) throw UsageFailure("--n must be at least 1");
    if (cfg.entropy_seed) {
      std::random_device rd;
      cfg.seed = (std::uint64_t{rd()} << 32) | rd();
    }
    if (simulate_cmd->parsed()) return cmd_simulate(cfg, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, out);
    if (chsh_cmd->parsed()) return cmd_chsh(cfg, out);
    if (monogamy_cmd->parsed()) return cmd_monogamy(cfg, out);
    if (nosignal_cmd->parsed()) return cmd_nosignal(cfg, out);
    if (verify_cmd->parsed()) return cmd_verify(cfg, out);
  } catch (const UsageFailure& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kUsage;
}

}  // namespace nlbit::cli
