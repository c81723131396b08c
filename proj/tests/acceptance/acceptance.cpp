// Acceptance suite: prints one PASS or FAIL line per
// criterion. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "qsdc/cli.hpp"
#include "qsdc/qsdc.hpp"

using namespace qsdc;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

oracle::Kind oracle_kind(Scheme s) {
  switch (s) {
    case Scheme::FullOutcome: return oracle::Kind::Full;
    case Scheme::ExcessBits: return oracle::Kind::Excess;
    case Scheme::Weight: return oracle::Kind::Weight;
    case Scheme::Parity: return oracle::Kind::Parity;
  }
  return oracle::Kind::Full;
}

std::string name(Scheme s) { return std::string(scheme_name(s)); }

Outcome a1() {
  const auto start = Clock::now();
  const auto r = achievable_rate({Scheme::Parity, 2, 0, 0.05, 0.05});
  const double secs = seconds_since(start);
  const bool pass = std::abs(r.r - 0.052) <= 0.004 && secs < 60.0;
  return {pass, "R=" + fmt("%.6f", r.r) + " target 0.052+-0.004, " + fmt("%.2f", secs) + " s (limit 60)"};
}

Outcome a2() {
  const auto start = Clock::now();
  const auto r = achievable_rate({Scheme::FullOutcome, 2, 0, 0.0, 0.0});
  const double secs = seconds_since(start);
  const bool pass = std::abs(r.r - 0.279) <= 0.004 && std::abs(r.chi_e) <= 1e-9 && secs < 10.0;
  return {pass, "R=" + fmt("%.6f", r.r) + " chi_E=" + fmt("%.2e", r.chi_e) + " target 0.279+-0.004, " +
                    fmt("%.2f", secs) + " s (limit 10)"};
}

Outcome a3() {
  const auto start = Clock::now();
  std::vector<ModelConfig> configs;
  for (Scheme s : kAllSchemes)
    for (int n = 1; n <= 5; ++n) configs.push_back({s, n, 0, 0.05, 0.05});
  const auto results = sweep(configs, {}, 1);
  const double secs = seconds_since(start);
  bool pass = secs < 1800.0;
  std::ostringstream detail;
  for (std::size_t si = 0; si < kAllSchemes.size(); ++si) {
    int argmax = 1;
    double best = -1.0;
    bool monotone = true;
    detail << name(kAllSchemes[si]) << " R=[";
    for (int n = 1; n <= 5; ++n) {
      const auto& r = results[si * 5 + static_cast<std::size_t>(n - 1)];
      if (r.status == RateStatus::Error) pass = false;
      if (r.r > best) {
        best = r.r;
        argmax = n;
      }
      if (n > 1 && r.c < results[si * 5 + static_cast<std::size_t>(n - 2)].c - 5e-3) monotone = false;
      detail << (n > 1 ? " " : "") << fmt("%.4f", r.r);
    }
    detail << "] argmax n=" << argmax << (monotone ? " C monotone; " : " C not monotone; ");
    if (argmax != 2 || !monotone) pass = false;
  }
  detail << fmt("%.1f", secs) << " s (limit 1800)";
  return {pass, detail.str()};
}

Outcome a4() {
  bool pass = true;
  std::ostringstream detail;
  for (Scheme s : kAllSchemes) {
    const double phase = achievable_rate({s, 2, 0, 0.02, 0.08}).r;
    const double bit = achievable_rate({s, 2, 0, 0.08, 0.02}).r;
    pass = pass && phase > bit;
    detail << name(s) << " " << fmt("%.5f", phase) << (phase > bit ? ">" : "<=") << fmt("%.5f", bit) << "; ";
  }
  return {pass, detail.str()};
}

Outcome a5() {
  const std::vector<std::pair<double, double>> points{{0.01, 0.03}, {0.05, 0.02}, {0.0, 0.07}, {0.04, 0.04}, {0.09, 0.06}};
  double worst = 0.0;
  for (Scheme s : kAllSchemes)
    for (const auto& [x, y] : points) {
      const double z = achievable_rate({s, 2, 0, x, y}).r;
      const double xb = achievable_rate({s, 2, 1, y, x}).r;
      worst = std::max(worst, std::abs(z - xb));
    }
  return {worst <= 1e-6, "max |R_Z - R_X| = " + fmt("%.3e", worst) + " over 5 points x 4 schemes (limit 1e-6)"};
}

// P_e by enumerating Bob's 2^(2m) outcome strings for a = 1 on a noiseless
// channel; a = 0 always decodes correctly.
double enumerated_pe(int m) {
  const int len = 2 * m;
  std::uint64_t balanced = 0;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v)
    balanced += static_cast<std::uint64_t>(2 * std::popcount(v) == len);
  return 0.5 * static_cast<double>(balanced) / std::ldexp(1.0, len);
}

Outcome a6() {
  bool pass = true;
  std::ostringstream detail;
  for (int m = 1; m <= 4; ++m) {
    const double exact = enumerated_pe(m);
    pass = pass && std::abs(exact - cdm06_error_probability(m)) < 1e-15;
    SessionConfig c;
    c.mode = SessionMode::Cdm06;
    c.m = m;
    c.trials = 100000;
    c.seed = derive_seed(0xacce97, static_cast<std::uint64_t>(m));
    const auto r = run_cdm06(c);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(r.decoded));
    const double z = (r.p_e_hat - exact) / se;
    pass = pass && std::abs(z) <= 3.0;
    detail << "m=" << m << " " << fmt("%.5f", r.p_e_hat) << " vs " << fmt("%.5f", exact) << " (" << fmt("%+.2f", z)
           << " se); ";
  }
  SessionConfig c;
  c.mode = SessionMode::Cdm06;
  c.n_prime = 4;
  c.trials = 100000;
  c.seed = 0xacce98;
  const auto r = run_cdm06(c);
  const double expected = 2.0 / 16.0;
  const double z = (r.discard.all_discard_frequency - expected) /
                   std::sqrt(expected * (1.0 - expected) / static_cast<double>(c.trials));
  pass = pass && std::abs(z) <= 4.0;
  detail << "n'=4 all-discard " << fmt("%.5f", r.discard.all_discard_frequency) << " (" << fmt("%+.2f", z) << " se)";
  return {pass, detail.str()};
}

Outcome a7() {
  bool pass = true;
  std::ostringstream detail;
  for (const ModelConfig& config : {ModelConfig{Scheme::Parity, 2, 0, 0.05, 0.05}, ModelConfig{Scheme::FullOutcome, 2, 0, 0.0, 0.0}}) {
    const auto opt = achievable_rate(config);
    SessionConfig c;
    c.scheme = config.scheme;
    c.n = config.n;
    c.b = config.b;
    c.q_z = config.q_z;
    c.q_x = config.q_x;
    c.t = opt.t_star;
    c.p = opt.p_star;
    c.trials = 1000000;
    c.seed = 0xacce99;
    const auto r = run_model(c);
    const double diff = std::abs(r.mi_hat - opt.chi_b);
    pass = pass && diff <= 0.01;
    detail << name(config.scheme) << " mi_hat=" << fmt("%.5f", r.mi_hat) << " chi_B=" << fmt("%.5f", opt.chi_b) << "; ";
  }
  return {pass, detail.str()};
}

Outcome a8() {
  Rng rng(0xacce9a);
  double worst = 0.0;
  int checked = 0;
  for (int n = 1; n <= 3; ++n)
    for (Scheme s : kAllSchemes)
      for (int i = 0; i < 5; ++i) {
        const double qz = 0.25 * random_unit(rng);
        const double qx = 0.25 * random_unit(rng);
        const auto ti = t_interval(qz, qx);
        const double t = ti.lo + ti.width() * random_unit(rng);
        const double p = random_unit(rng);
        const RateModel model({s, n, 0, qz, qx});
        const double mine = model.chi_e(AttackSpec(qz, qx, t), p);
        worst = std::max(worst, std::abs(mine - oracle::chi_e(oracle_kind(s), n, qz, qx, t, p)));
        ++checked;
      }
  return {worst <= 1e-9, std::to_string(checked) + " specs, max deviation " + fmt("%.3e", worst) + " (limit 1e-9)"};
}

Outcome a9() {
  double worst = 0.0;
  bool counts_ok = true;
  for (Scheme scheme : kAllSchemes)
    for (int n = 1; n <= 8; ++n) {
      const DisclosureScheme d(scheme, n);
      const auto table = oracle::joint_table(oracle_kind(scheme), n);
      const auto announcements = d.announcements();
      counts_ok = counts_ok && announcements.size() == table.size();
      std::map<std::uint64_t, std::uint64_t> per_k;
      for (const auto& s : announcements) {
        const auto it = table.find(s.str());
        if (it == table.end()) {
          counts_ok = false;
          continue;
        }
        const auto& row = it->second;
        std::uint64_t k_count = 0;
        for (double v : row) k_count += v > 0.0;
        counts_ok = counts_ok && d.outcome_count(s) == k_count;
        const auto post = d.posterior(s);
        for (std::size_t i = 0; i < post.outcomes.size(); ++i) {
          const auto& k = post.outcomes[i];
          worst = std::max(worst, std::abs(post.announcement_probability * post.distribution[i] - row[k.value()]));
          ++per_k[k.value()];
        }
      }
      for (const auto& k : all_bitstrings(n)) counts_ok = counts_ok && d.announcement_count(k) == per_k[k.value()];
    }
  return {counts_ok && worst <= 1e-12,
          std::string(counts_ok ? "cardinalities match" : "cardinality mismatch") + ", max Bayes deviation " +
              fmt("%.3e", worst) + " (limit 1e-12)"};
}

std::string cli_output(std::vector<std::string> args) {
  args.insert(args.begin(), "qsdc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return std::to_string(code) + "\n" + out.str();
}

Outcome a10() {
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--scheme", "weight", "--n", "3", "--qz", "0.04", "--qx", "0.03", "--trials", "20000", "--seed", "7", "--format", "csv"},
      {"simulate", "--mode", "cdm06", "--n-prime", "5", "--qz", "0.02", "--qx", "0.02", "--trials", "20000", "--seed", "8", "--format", "csv"},
      {"cdm06-pe", "--m-max", "3", "--trials", "20000", "--seed", "9"},
      {"sweep-n", "--schemes", "excess,parity", "--n-max", "3"},
      {"rate", "--scheme", "full", "--n", "2", "--qz", "0.03", "--qx", "0.01"},
  };
  bool pass = true;
  int identical = 0;
  for (const auto& cmd : commands) {
    const std::string first = cli_output(cmd);
    auto threaded = cmd;
    if (cmd[0] != "rate") threaded.insert(threaded.end(), {"--threads", "2"});
    const bool same = first == cli_output(cmd) && first == cli_output(threaded) && first.rfind("0\n", 0) == 0;
    identical += same;
    pass = pass && same;
  }
  return {pass, std::to_string(identical) + "/" + std::to_string(commands.size()) + " commands byte-identical on re-run"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}};
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%-4s %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
