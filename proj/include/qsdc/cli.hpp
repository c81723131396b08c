#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qsdc/protocol_sim.hpp"
#include "qsdc/rate_engine.hpp"

namespace qsdc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInsecure = 2;
inline constexpr int kExitUsage = 64;

/// Bell-diagonal attack with independent bit and phase flips.
inline double independent_flip_t(double q_z, double q_x) { return q_z + q_x - 2.0 * q_z * q_x; }

namespace cli_detail {

inline const std::vector<std::string> kSchemeNames{"full", "excess", "weight", "parity"};

struct EngineFlags {
  std::size_t coarse_points = 129;
  double tolerance = 1e-7;
  int max_n = 5;
  std::string mixture = "reduced";

  void attach(CLI::App* app) {
    app->add_option("--coarse-points", coarse_points, "Coarse grid points per 1-D search")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
        ->capture_default_str();
    app->add_option("--tolerance", tolerance, "Golden-section bracket tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--max-n", max_n, "Largest ensemble size the engine accepts")
        ->check(CLI::Range(1, 6))
        ->capture_default_str();
    app->add_option("--mixture", mixture, "Mixture entropy path")
        ->check(CLI::IsMember({"reduced", "dense"}))
        ->capture_default_str();
  }

  EngineSettings settings() const {
    EngineSettings s;
    s.p_search = s.t_search = SearchSettings{coarse_points, tolerance};
    s.max_n = max_n;
    s.path = mixture == "dense" ? MixturePath::Dense : MixturePath::Reduced;
    return s;
  }
};

inline int basis_bit(const std::string& basis) { return basis == "x" ? 1 : 0; }

/// Writes to --output when given, otherwise to the command's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::out | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw std::runtime_error("write to output failed");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t chosen = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << chosen << '\n';
  return chosen;
}

inline void add_config(CLI::App* app) {
  app->add_option("--config", "INI file of `option = value` lines; command-line flags override it")
      ->type_name("FILE")
      ->expected(1);
}

inline bool names_option(const std::string& token, const std::string& name) {
  const std::string flag = "--" + name;
  return token == flag || token.rfind(flag + "=", 0) == 0;
}

/// Inlines `--config FILE` of the chosen subcommand as extra flags. CLI11
/// only reads config files attached to the top-level app. Keys may sit in
/// the default section or in a section named after the subcommand; keys
/// already given on the command line are skipped.
inline std::vector<std::string> expand_config(std::vector<std::string> args, const CLI::App& app) {
  if (args.size() < 2) return args;
  const std::string& sub = args[1];
  if (app.get_subcommand_no_throw(sub) == nullptr) return args;
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  if (!std::filesystem::is_regular_file(path)) throw CLI::FileError::Missing(path);
  const auto items = CLI::ConfigINI().from_file(path);
  std::vector<std::string> extra;
  for (const CLI::ConfigItem& item : items) {
    if (!(item.parents.empty() || (item.parents.size() == 1 && item.parents[0] == sub))) continue;
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const bool given = std::any_of(args.begin() + 2, args.end(),
                                   [&](const std::string& t) { return names_option(t, item.name); });
    if (given || item.name == "config") continue;
    extra.push_back("--" + item.name);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace cli_detail

/// Entry point of the qsdc command-line tool. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Secure net bit rates and session simulations for basis-encoded QSDC", "qsdc"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::function<int()> action;
  unsigned threads = default_thread_count();
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, std::string("Worker threads (default from ") + kThreadsEnvVar + ")")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
  };

  // rate
  auto* rate = app.add_subcommand("rate", "Achievable rate at one configuration (one CSV row)");
  std::string rate_scheme, rate_basis = "z", rate_output;
  int rate_n = 0;
  double rate_qz = 0, rate_qx = 0;
  std::optional<double> rate_p;
  EngineFlags rate_engine;
  add_config(rate);
  rate->add_option("--scheme", rate_scheme, "Disclosure scheme")->required()->check(CLI::IsMember(kSchemeNames));
  rate->add_option("--n", rate_n, "Ensemble size")->required()->check(CLI::Range(1, 16));
  rate->add_option("--b", rate_basis, "Bob's basis")->check(CLI::IsMember({"z", "x"}))->capture_default_str();
  rate->add_option("--qz", rate_qz, "Bit-flip QBER")->required()->check(CLI::Range(0.0, 0.5));
  rate->add_option("--qx", rate_qx, "Phase-flip QBER")->required()->check(CLI::Range(0.0, 0.5));
  rate->add_option("--p", rate_p, "Fix P_A(0) instead of maximizing over it")->check(CLI::Range(0.0, 1.0));
  rate->add_option("--output", rate_output, "Output file (default: standard output)");
  rate_engine.attach(rate);
  rate->callback([&] {
    action = [&]() -> int {
      const ModelConfig config{parse_scheme(rate_scheme), rate_n, basis_bit(rate_basis), rate_qz, rate_qx};
      RateResult result;
      try {
        const EngineSettings settings = rate_engine.settings();
        result = rate_p ? rate_at_fixed_p(config, *rate_p, settings) : achievable_rate(config, settings);
      } catch (const std::exception& e) {
        result = RateResult{};
        result.message = e.what();
        err << "error: " << e.what() << '\n';
      }
      Sink sink(rate_output, out);
      *sink << kRateCsvHeader << '\n' << format_rate_row(config, result) << '\n';
      sink.finish();
      switch (result.status) {
        case RateStatus::Ok: return kExitOk;
        case RateStatus::Insecure: return kExitInsecure;
        case RateStatus::Error: return kExitError;
      }
      return kExitError;
    };
  });

  // sweep-n
  auto* sweep_n = app.add_subcommand("sweep-n", "Rates over a range of ensemble sizes");
  std::vector<std::string> sn_schemes = kSchemeNames;
  std::string sn_basis = "z", sn_output;
  int sn_min = 1, sn_max = 5;
  double sn_qz = 0.05, sn_qx = 0.05;
  EngineFlags sn_engine;
  add_config(sweep_n);
  sweep_n->add_option("--schemes", sn_schemes, "Comma-separated schemes")
      ->delimiter(',')
      ->check(CLI::IsMember(kSchemeNames))
      ->capture_default_str();
  sweep_n->add_option("--n-min", sn_min, "Smallest ensemble size")->check(CLI::Range(1, 16))->capture_default_str();
  sweep_n->add_option("--n-max", sn_max, "Largest ensemble size")->check(CLI::Range(1, 16))->capture_default_str();
  sweep_n->add_option("--b", sn_basis, "Bob's basis")->check(CLI::IsMember({"z", "x"}))->capture_default_str();
  sweep_n->add_option("--qz", sn_qz, "Bit-flip QBER")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  sweep_n->add_option("--qx", sn_qx, "Phase-flip QBER")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  sweep_n->add_option("--output", sn_output, "Output file (default: standard output)");
  add_threads(sweep_n);
  sn_engine.attach(sweep_n);
  sweep_n->callback([&] {
    if (sn_min > sn_max) throw CLI::ValidationError("--n-min", "must not exceed --n-max");
    action = [&]() -> int {
      std::vector<ModelConfig> configs;
      for (const auto& name : sn_schemes)
        for (int n = sn_min; n <= sn_max; ++n)
          configs.push_back({parse_scheme(name), n, basis_bit(sn_basis), sn_qz, sn_qx});
      const EngineSettings settings = sn_engine.settings();
      err << "engine: " << settings.describe() << '\n';
      const auto results = sweep(configs, settings, threads);
      Sink sink(sn_output, out);
      *sink << kRateCsvHeader << '\n';
      for (std::size_t i = 0; i < configs.size(); ++i) *sink << format_rate_row(configs[i], results[i]) << '\n';
      sink.finish();
      return kExitOk;
    };
  });

  // sweep-qber
  auto* sweep_q = app.add_subcommand("sweep-qber", "Rates over a (Q_Z, Q_X) lattice");
  std::vector<std::string> sq_schemes = kSchemeNames;
  std::string sq_basis = "z", sq_output;
  int sq_n = 2;
  double qz_min = 0.0, qz_max = 0.1, qx_min = 0.0, qx_max = 0.1;
  int steps = 11;
  EngineFlags sq_engine;
  add_config(sweep_q);
  sweep_q->add_option("--schemes", sq_schemes, "Comma-separated schemes")
      ->delimiter(',')
      ->check(CLI::IsMember(kSchemeNames))
      ->capture_default_str();
  sweep_q->add_option("--n", sq_n, "Ensemble size")->check(CLI::Range(1, 16))->capture_default_str();
  sweep_q->add_option("--b", sq_basis, "Bob's basis")->check(CLI::IsMember({"z", "x"}))->capture_default_str();
  sweep_q->add_option("--qz-min", qz_min, "Lattice start in Q_Z")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  sweep_q->add_option("--qz-max", qz_max, "Lattice end in Q_Z")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  sweep_q->add_option("--qx-min", qx_min, "Lattice start in Q_X")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  sweep_q->add_option("--qx-max", qx_max, "Lattice end in Q_X")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  sweep_q->add_option("--steps", steps, "Lattice points per axis")->check(CLI::Range(2, 1001))->capture_default_str();
  sweep_q->add_option("--output", sq_output, "Output file (default: standard output)");
  add_threads(sweep_q);
  sq_engine.attach(sweep_q);
  sweep_q->callback([&] {
    if (qz_min > qz_max) throw CLI::ValidationError("--qz-min", "must not exceed --qz-max");
    if (qx_min > qx_max) throw CLI::ValidationError("--qx-min", "must not exceed --qx-max");
    action = [&]() -> int {
      auto axis = [&](double lo, double hi, int i) {
        return i == steps - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
      };
      std::vector<ModelConfig> configs;
      for (const auto& name : sq_schemes)
        for (int iz = 0; iz < steps; ++iz)
          for (int ix = 0; ix < steps; ++ix)
            configs.push_back({parse_scheme(name), sq_n, basis_bit(sq_basis), axis(qz_min, qz_max, iz),
                               axis(qx_min, qx_max, ix)});
      const EngineSettings settings = sq_engine.settings();
      err << "engine: " << settings.describe() << '\n';
      const auto results = sweep(configs, settings, threads);
      Sink sink(sq_output, out);
      *sink << kRateCsvHeader << '\n';
      for (std::size_t i = 0; i < configs.size(); ++i) *sink << format_rate_row(configs[i], results[i]) << '\n';
      sink.finish();
      return kExitOk;
    };
  });

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo protocol sessions");
  std::string sim_mode = "model", sim_scheme = "full", sim_basis = "z", sim_format = "kv", sim_output;
  SessionConfig session;
  session.trials = 10000;
  std::optional<double> sim_t;
  std::optional<std::uint64_t> sim_seed;
  add_config(simulate);
  simulate->add_option("--mode", sim_mode, "Session type")->check(CLI::IsMember({"model", "cdm06"}))->capture_default_str();
  simulate->add_option("--scheme", sim_scheme, "Disclosure scheme (model mode)")
      ->check(CLI::IsMember(kSchemeNames))
      ->capture_default_str();
  simulate->add_option("--n", session.n, "Ensemble size (model mode)")->check(CLI::Range(1, 16))->capture_default_str();
  auto* opt_m = simulate->add_option("--m", session.m, "Balanced half-size 2m (cdm06 mode)")
                    ->check(CLI::Range(1, 31))
                    ->capture_default_str();
  auto* opt_np = simulate->add_option("--n-prime", session.n_prime, "Raw ensemble size before balancing (cdm06 mode)")
                     ->check(CLI::Range(1, 62));
  opt_np->excludes(opt_m);
  simulate->add_option("--b", sim_basis, "Bob's basis (model mode)")->check(CLI::IsMember({"z", "x"}))->capture_default_str();
  simulate->add_option("--qz", session.q_z, "Bit-flip QBER")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  simulate->add_option("--qx", session.q_x, "Phase-flip QBER")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  simulate->add_option("--t", sim_t, "Attack parameter t (default: independent bit and phase flips)");
  simulate->add_option("--p", session.p, "P_A(0)")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  simulate->add_option("--trials", session.trials, "Number of sessions")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--sacrifice", session.sacrifice_fraction, "Fraction of pairs spent on channel diagnosis")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9))
      ->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Random seed (chosen and reported on standard error if absent)");
  simulate->add_option("--format", sim_format, "Report format")->check(CLI::IsMember({"kv", "csv"}))->capture_default_str();
  simulate->add_option("--output", sim_output, "Output file (default: standard output)");
  add_threads(simulate);
  simulate->callback([&] {
    action = [&]() -> int {
      session.mode = sim_mode == "cdm06" ? SessionMode::Cdm06 : SessionMode::Model;
      session.scheme = parse_scheme(sim_scheme);
      session.b = basis_bit(sim_basis);
      session.t = sim_t ? *sim_t : independent_flip_t(session.q_z, session.q_x);
      session.seed = resolve_seed(sim_seed, err);
      session.threads = threads;
      const SessionReport report = run_session(session);
      Sink sink(sim_output, out);
      if (sim_format == "csv") {
        *sink << kSessionCsvHeader << '\n' << format_session_row(report) << '\n';
      } else {
        *sink << format_session_report(report);
      }
      sink.finish();
      return kExitOk;
    };
  });

  // cdm06-pe
  auto* pe = app.add_subcommand("cdm06-pe", "Analytic and empirical CDM06 decoding error");
  int m_min = 1, m_max = 4;
  std::uint64_t pe_trials = 100000;
  double pe_qz = 0.0, pe_qx = 0.0;
  std::optional<double> pe_t;
  std::optional<std::uint64_t> pe_seed;
  std::string pe_output;
  add_config(pe);
  pe->add_option("--m-min", m_min, "Smallest m")->check(CLI::Range(1, 31))->capture_default_str();
  pe->add_option("--m-max", m_max, "Largest m")->check(CLI::Range(1, 31))->capture_default_str();
  pe->add_option("--trials", pe_trials, "Trials per m")->check(CLI::PositiveNumber)->capture_default_str();
  pe->add_option("--qz", pe_qz, "Bit-flip QBER")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  pe->add_option("--qx", pe_qx, "Phase-flip QBER")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  pe->add_option("--t", pe_t, "Attack parameter t (default: independent bit and phase flips)");
  pe->add_option("--seed", pe_seed, "Random seed (chosen and reported on standard error if absent)");
  pe->add_option("--output", pe_output, "Output file (default: standard output)");
  add_threads(pe);
  pe->callback([&] {
    if (m_min > m_max) throw CLI::ValidationError("--m-min", "must not exceed --m-max");
    action = [&]() -> int {
      const std::uint64_t seed = resolve_seed(pe_seed, err);
      Sink sink(pe_output, out);
      *sink << "m,analytic_p_e,empirical_p_e,std_error\n";
      for (int m = m_min; m <= m_max; ++m) {
        SessionConfig c;
        c.mode = SessionMode::Cdm06;
        c.m = m;
        c.q_z = pe_qz;
        c.q_x = pe_qx;
        c.t = pe_t ? *pe_t : independent_flip_t(pe_qz, pe_qx);
        c.trials = pe_trials;
        c.seed = derive_seed(seed, static_cast<std::uint64_t>(m));
        c.threads = threads;
        const SessionReport r = run_cdm06(c);
        *sink << m << ',' << format_real(cdm06_error_probability(m)) << ',' << format_real(r.p_e_hat) << ','
              << format_real(r.p_e_stderr) << '\n';
      }
      sink.finish();
      return kExitOk;
    };
  });

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args), app);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace qsdc
