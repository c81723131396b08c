#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qsdc/attack.hpp"
#include "qsdc/bitstring.hpp"
#include "qsdc/combinatorics.hpp"
#include "qsdc/disclosure.hpp"
#include "qsdc/parallel.hpp"
#include "qsdc/rate_engine.hpp"
#include "qsdc/rng.hpp"

// Classical Monte Carlo of protocol sessions. Only the parties' outcomes are
// sampled; Eve's quantum side information has no classical surrogate here,
// so no estimator of chi_E is offered.

namespace qsdc {

struct RoundOutcome {
  int alice;
  int bob;
};

/// Bob's outcome on one pair given Alice's outcome.
template <class URBG>
int bob_outcome(const AttackSpec& attack, int a, int b, int alice_bit, URBG& rng) {
  if (a != b) return random_bit(rng);
  const PauliError e = sample_pauli(attack, rng);
  return alice_bit ^ (a == 0 ? e.x : e.z);
}

/// One EPR pair measured by Alice in basis a and Bob in basis b.
template <class URBG>
RoundOutcome simulate_epr_round(const AttackSpec& attack, int a, int b, URBG& rng) {
  const int alice = random_bit(rng);
  return {alice, bob_outcome(attack, a, b, alice, rng)};
}

inline constexpr double kQberConfidence = 0.99;
inline constexpr std::uint64_t kMinDiagnosisPairs = 100;
inline constexpr std::uint64_t kMinSiftedRounds = 10;

struct QberEstimate {
  double value = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  std::uint64_t sifted = 0;
  bool reliable = false;
};

/// Two-sided Hoeffding interval at confidence kQberConfidence.
inline QberEstimate hoeffding_estimate(std::uint64_t errors, std::uint64_t rounds) {
  QberEstimate e;
  e.sifted = rounds;
  e.reliable = rounds >= kMinSiftedRounds;
  if (rounds == 0) return e;
  e.value = static_cast<double>(errors) / static_cast<double>(rounds);
  const double half = std::sqrt(std::log(2.0 / (1.0 - kQberConfidence)) / (2.0 * static_cast<double>(rounds)));
  e.lower = std::max(0.0, e.value - half);
  e.upper = std::min(1.0, e.value + half);
  return e;
}

struct QberPair {
  QberEstimate z;
  QberEstimate x;
};

/// Channel diagnosis: random bases on both sides, sifted per basis.
template <class URBG>
QberPair estimate_qber(const AttackSpec& attack, std::uint64_t pairs, URBG& rng) {
  if (pairs < kMinDiagnosisPairs) {
    throw std::invalid_argument("QBER estimation needs at least " + std::to_string(kMinDiagnosisPairs) +
                                " pairs");
  }
  std::uint64_t rounds[2] = {0, 0};
  std::uint64_t errors[2] = {0, 0};
  for (std::uint64_t i = 0; i < pairs; ++i) {
    const int basis_a = random_bit(rng);
    const int basis_b = random_bit(rng);
    const RoundOutcome o = simulate_epr_round(attack, basis_a, basis_b, rng);
    if (basis_a != basis_b) continue;
    ++rounds[basis_a];
    errors[basis_a] += static_cast<std::uint64_t>(o.alice != o.bob);
  }
  return {hoeffding_estimate(errors[0], rounds[0]), hoeffding_estimate(errors[1], rounds[1])};
}

/// Closed-form average decoding error C(2m, m) / 2^(2m+1) for uniform a.
inline double cdm06_error_probability(int m) {
  if (m < 1 || m > 31) throw std::invalid_argument("m must lie in [1, 31]");
  return static_cast<double>(binomial(2 * m, m)) / std::ldexp(1.0, 2 * m + 1);
}

enum class SessionMode { Cdm06, Model };

struct SessionConfig {
  SessionMode mode = SessionMode::Model;
  Scheme scheme = Scheme::FullOutcome;  // Model mode
  int n = 1;                            // Model mode ensemble size
  int m = 1;                            // CDM06 with fixed balanced size 2m
  int n_prime = 0;                      // CDM06 raw ensemble size; overrides m when > 0
  int b = 0;
  double q_z = 0.0;
  double q_x = 0.0;
  double t = 0.0;
  double p = 0.5;  // P_A(0)
  std::uint64_t trials = 1;
  double sacrifice_fraction = 0.1;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  AttackSpec attack() const { return AttackSpec(q_z, q_x, t); }
  int pairs_per_trial() const {
    if (mode == SessionMode::Model) return n;
    return n_prime > 0 ? n_prime : 2 * m;
  }
};

struct DiscardStats {
  std::vector<std::uint64_t> histogram;  // index: qubits discarded in balancing
  std::uint64_t all_discarded = 0;
  double all_discard_frequency = 0.0;
};

struct SessionReport {
  SessionConfig config;
  std::uint64_t diagnosis_pairs = 0;
  QberPair qber;
  // CDM06 decoding
  std::uint64_t decoded = 0;
  std::uint64_t decoding_errors = 0;
  double p_e_hat = 0.0;
  double p_e_stderr = 0.0;
  DiscardStats discard;
  // Model mode: plug-in I(A; S, K') and its Miller-Madow bias term
  double mi_hat = 0.0;
  double mi_bias = 0.0;
};

inline void validate_session(const SessionConfig& c) {
  if (c.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (!(c.sacrifice_fraction > 0.0 && c.sacrifice_fraction < 1.0)) {
    throw std::invalid_argument("sacrifice fraction must lie in (0, 1)");
  }
  if (!(c.p >= 0.0 && c.p <= 1.0)) throw std::invalid_argument("P_A(0) must lie in [0, 1]");
  if (c.b != 0 && c.b != 1) throw std::invalid_argument("Bob's basis must be 0 (Z) or 1 (X)");
  if (c.mode == SessionMode::Model) {
    if (c.n < 1 || c.n > DisclosureScheme::kMaxLength) throw std::invalid_argument("n must lie in [1, 16]");
  } else if (c.n_prime > 0) {
    if (c.n_prime > 62) throw std::invalid_argument("n' must lie in [1, 62]");
  } else if (c.m < 1 || c.m > 31) {
    throw std::invalid_argument("m must lie in [1, 31]");
  }
  (void)c.attack();
}

namespace detail {

inline constexpr std::uint64_t kTrialsPerChunk = 4096;
inline constexpr std::uint64_t kDiagnosisStream = 0xd1a6'0000'0000'0001ULL;

inline std::uint64_t diagnosis_pairs(const SessionConfig& c) {
  const double raw = std::ceil(static_cast<double>(c.trials) * c.pairs_per_trial() * c.sacrifice_fraction /
                               (1.0 - c.sacrifice_fraction));
  return std::max<std::uint64_t>(kMinDiagnosisPairs, static_cast<std::uint64_t>(raw));
}

inline void run_diagnosis(const SessionConfig& c, SessionReport& report) {
  report.diagnosis_pairs = diagnosis_pairs(c);
  Rng rng = substream(c.seed, kDiagnosisStream);
  report.qber = estimate_qber(c.attack(), report.diagnosis_pairs, rng);
}

template <class Counts, class TrialFn>
Counts run_chunks(const SessionConfig& c, Counts zero, TrialFn&& trial) {
  const std::uint64_t chunks = (c.trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
  std::vector<Counts> partial(chunks, zero);
  parallel_for(static_cast<std::size_t>(chunks), c.threads, [&](std::size_t chunk) {
    const std::uint64_t begin = chunk * kTrialsPerChunk;
    const std::uint64_t end = std::min(c.trials, begin + kTrialsPerChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng = substream(c.seed, i);
      trial(rng, partial[chunk]);
    }
  });
  Counts total = zero;
  for (const Counts& p : partial) total += p;
  return total;
}

struct Cdm06Counts {
  std::vector<std::uint64_t> discards;
  std::uint64_t failures = 0;
  std::uint64_t decoded = 0;
  std::uint64_t errors = 0;

  Cdm06Counts& operator+=(const Cdm06Counts& o) {
    for (std::size_t i = 0; i < discards.size(); ++i) discards[i] += o.discards[i];
    failures += o.failures;
    decoded += o.decoded;
    errors += o.errors;
    return *this;
  }
};

struct JointCounts {
  std::vector<std::uint64_t> cells;  // index: a * |Y| + y

  JointCounts& operator+=(const JointCounts& o) {
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] += o.cells[i];
    return *this;
  }
};

template <class URBG>
int draw_a(double p, URBG& rng) {
  return random_unit(rng) < p ? 0 : 1;
}

}  // namespace detail

/// CDM06 sessions: Alice encodes a in her measurement basis, balances her
/// outcomes by discarding excess majority qubits, and announces the
/// discarded positions; Bob measures Z and decodes 0 iff his kept outcomes
/// are balanced.
inline SessionReport run_cdm06(const SessionConfig& c) {
  if (c.mode != SessionMode::Cdm06) throw std::invalid_argument("session is not in CDM06 mode");
  validate_session(c);
  SessionReport report;
  report.config = c;
  detail::run_diagnosis(c, report);
  const AttackSpec attack = c.attack();
  const int raw = c.pairs_per_trial();
  const bool fixed_m = c.n_prime <= 0;

  detail::Cdm06Counts zero;
  zero.discards.assign(static_cast<std::size_t>(raw) + 1, 0);
  const auto counts = detail::run_chunks(c, zero, [&](Rng& rng, detail::Cdm06Counts& acc) {
    const int a = detail::draw_a(c.p, rng);
    std::vector<int> alice(static_cast<std::size_t>(raw));
    if (fixed_m) {
      // Balanced outcome string: m ones at uniformly random positions.
      std::fill(alice.begin(), alice.end(), 0);
      std::fill(alice.begin(), alice.begin() + c.m, 1);
      for (int i = raw - 1; i > 0; --i)
        std::swap(alice[static_cast<std::size_t>(i)],
                  alice[random_below(rng, static_cast<std::uint64_t>(i) + 1)]);
    } else {
      for (int& bit : alice) bit = random_bit(rng);
    }
    int ones = 0;
    for (int bit : alice) ones += bit;
    const int excess = std::abs(2 * ones - raw);
    const int majority = 2 * ones > raw ? 1 : 0;
    std::vector<int> majority_positions;
    for (int i = 0; i < raw; ++i)
      if (alice[static_cast<std::size_t>(i)] == majority) majority_positions.push_back(i);
    std::vector<char> kept(static_cast<std::size_t>(raw), 1);
    for (int i = 0; i < excess; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     random_below(rng, majority_positions.size() - static_cast<std::size_t>(i));
      std::swap(majority_positions[static_cast<std::size_t>(i)], majority_positions[j]);
      kept[static_cast<std::size_t>(majority_positions[static_cast<std::size_t>(i)])] = 0;
    }
    ++acc.discards[static_cast<std::size_t>(excess)];
    const int remaining = raw - excess;
    if (remaining == 0) {
      ++acc.failures;
      return;
    }
    // For odd n' the excess is odd, so at least one qubit is always
    // discarded; the kept qubits are balanced either way.
    int bob_ones = 0;
    for (int i = 0; i < raw; ++i) {
      if (!kept[static_cast<std::size_t>(i)]) continue;
      bob_ones += bob_outcome(attack, a, 0, alice[static_cast<std::size_t>(i)], rng);
    }
    const int decoded = 2 * bob_ones == remaining ? 0 : 1;
    ++acc.decoded;
    acc.errors += static_cast<std::uint64_t>(decoded != a);
  });

  report.decoded = counts.decoded;
  report.decoding_errors = counts.errors;
  if (counts.decoded > 0) {
    report.p_e_hat = static_cast<double>(counts.errors) / static_cast<double>(counts.decoded);
    report.p_e_stderr = std::sqrt(report.p_e_hat * (1.0 - report.p_e_hat) / static_cast<double>(counts.decoded));
  }
  report.discard.histogram = counts.discards;
  report.discard.all_discarded = counts.failures;
  report.discard.all_discard_frequency = static_cast<double>(counts.failures) / static_cast<double>(c.trials);
  return report;
}

/// Plug-in mutual information (bits) of a joint count table with `rows`
/// rows, and the Miller-Madow bias estimate from occupied cells.
inline std::pair<double, double> plugin_mutual_information(const std::vector<std::uint64_t>& cells,
                                                           std::size_t rows) {
  const std::size_t cols = cells.size() / rows;
  std::vector<double> row_sum(rows, 0.0);
  std::vector<double> col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = static_cast<double>(cells[r * cols + c]);
      row_sum[r] += v;
      col_sum[c] += v;
      total += v;
    }
  if (total == 0.0) return {0.0, 0.0};
  auto occupied = [](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; }));
  };
  double mi = 0.0;
  double joint_occupied = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = static_cast<double>(cells[r * cols + c]);
      if (v == 0.0) continue;
      joint_occupied += 1.0;
      mi += v / total * std::log2(v * total / (row_sum[r] * col_sum[c]));
    }
  const double bias =
      (joint_occupied - occupied(row_sum) - occupied(col_sum) + 1.0) / (2.0 * total * std::log(2.0));
  return {std::max(0.0, mi), bias};
}

/// Sessions of the general model: a ~ P_A, k uniform, s announced, k'
/// through the Pauli channel. Reports the plug-in I(A; S, K').
inline SessionReport run_model(const SessionConfig& c) {
  if (c.mode != SessionMode::Model) throw std::invalid_argument("session is not in model mode");
  validate_session(c);
  SessionReport report;
  report.config = c;
  detail::run_diagnosis(c, report);
  const AttackSpec attack = c.attack();
  const DisclosureScheme scheme(c.scheme, c.n);
  const auto announcements = scheme.announcements();
  const std::size_t outcomes = std::size_t{1} << c.n;
  const std::size_t ycount = announcements.size() * outcomes;

  detail::JointCounts zero{std::vector<std::uint64_t>(2 * ycount, 0)};
  const auto counts = detail::run_chunks(c, zero, [&](Rng& rng, detail::JointCounts& acc) {
    const int a = detail::draw_a(c.p, rng);
    std::uint64_t kv = 0;
    for (int i = 0; i < c.n; ++i) kv = (kv << 1) | static_cast<std::uint64_t>(random_bit(rng));
    const BitString k(c.n, kv);
    const Announcement s = scheme.announce(k, rng);
    std::uint64_t kp = 0;
    for (int i = 0; i < c.n; ++i) kp = (kp << 1) | static_cast<std::uint64_t>(bob_outcome(attack, a, c.b, k.bit(i), rng));
    const auto sidx = static_cast<std::size_t>(
        std::lower_bound(announcements.begin(), announcements.end(), s) - announcements.begin());
    ++acc.cells[static_cast<std::size_t>(a) * ycount + sidx * outcomes + kp];
  });
  std::tie(report.mi_hat, report.mi_bias) = plugin_mutual_information(counts.cells, 2);
  return report;
}

inline SessionReport run_session(const SessionConfig& c) {
  return c.mode == SessionMode::Cdm06 ? run_cdm06(c) : run_model(c);
}

struct ImbalanceStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> bloch_z;  // 2 deltaN / N per trial
  std::vector<double> delta;    // deltaN per trial
};

/// deltaN = (number of up outcomes) - N/2 over N fair coin flips.
template <class URBG>
ImbalanceStats ensemble_imbalance_stats(std::uint64_t big_n, std::uint64_t trials, URBG& rng) {
  if (big_n < 2) throw std::invalid_argument("ensemble size must be at least 2");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  ImbalanceStats out;
  out.delta.reserve(trials);
  out.bloch_z.reserve(trials);
  double sum = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint64_t up = 0;
    for (std::uint64_t i = 0; i < big_n; ++i) up += static_cast<std::uint64_t>(random_bit(rng));
    const double d = static_cast<double>(up) - static_cast<double>(big_n) / 2.0;
    out.delta.push_back(d);
    out.bloch_z.push_back(2.0 * d / static_cast<double>(big_n));
    sum += d;
  }
  out.mean = sum / static_cast<double>(trials);
  double ss = 0.0;
  for (double d : out.delta) ss += (d - out.mean) * (d - out.mean);
  out.stddev = trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1)) : 0.0;
  return out;
}

inline std::string_view mode_name(SessionMode m) { return m == SessionMode::Cdm06 ? "cdm06" : "model"; }

inline constexpr const char* kSessionCsvHeader =
    "mode,scheme,n,m,n_prime,b,q_z,q_x,t,p,trials,seed,diagnosis_pairs,qber_z,qber_z_lo,qber_z_hi,"
    "qber_x,qber_x_lo,qber_x_hi,qber_reliable,decoded,p_e_hat,p_e_stderr,all_discard_frequency,"
    "mi_hat,mi_bias";

inline std::string format_session_row(const SessionReport& r) {
  const SessionConfig& c = r.config;
  const bool model = c.mode == SessionMode::Model;
  std::ostringstream out;
  out << mode_name(c.mode) << ',' << (model ? std::string(scheme_name(c.scheme)) : std::string()) << ','
      << (model ? std::to_string(c.n) : std::string()) << ','
      << (!model && c.n_prime <= 0 ? std::to_string(c.m) : std::string()) << ','
      << (!model && c.n_prime > 0 ? std::to_string(c.n_prime) : std::string()) << ',' << c.b << ','
      << format_real(c.q_z) << ',' << format_real(c.q_x) << ',' << format_real(c.t) << ','
      << format_real(c.p) << ',' << c.trials << ',' << c.seed << ',' << r.diagnosis_pairs << ','
      << format_real(r.qber.z.value) << ',' << format_real(r.qber.z.lower) << ','
      << format_real(r.qber.z.upper) << ',' << format_real(r.qber.x.value) << ','
      << format_real(r.qber.x.lower) << ',' << format_real(r.qber.x.upper) << ','
      << ((r.qber.z.reliable && r.qber.x.reliable) ? 1 : 0) << ',' << r.decoded << ','
      << format_real(r.p_e_hat) << ',' << format_real(r.p_e_stderr) << ','
      << format_real(r.discard.all_discard_frequency) << ',' << format_real(r.mi_hat) << ','
      << format_real(r.mi_bias);
  return out.str();
}

/// Flat `key=value` document, one entry per line.
inline std::string format_session_report(const SessionReport& r) {
  const SessionConfig& c = r.config;
  std::ostringstream out;
  auto kv = [&](std::string_view key, const std::string& value) { out << key << '=' << value << '\n'; };
  kv("mode", std::string(mode_name(c.mode)));
  if (c.mode == SessionMode::Model) {
    kv("scheme", std::string(scheme_name(c.scheme)));
    kv("n", std::to_string(c.n));
  } else if (c.n_prime > 0) {
    kv("n_prime", std::to_string(c.n_prime));
  } else {
    kv("m", std::to_string(c.m));
  }
  kv("b", std::to_string(c.b));
  kv("q_z", format_real(c.q_z));
  kv("q_x", format_real(c.q_x));
  kv("t", format_real(c.t));
  kv("p", format_real(c.p));
  kv("trials", std::to_string(c.trials));
  kv("seed", std::to_string(c.seed));
  kv("diagnosis_pairs", std::to_string(r.diagnosis_pairs));
  for (const auto& [name, e] : {std::pair<const char*, const QberEstimate*>{"qber_z", &r.qber.z},
                                {"qber_x", &r.qber.x}}) {
    kv(name, format_real(e->value));
    kv(std::string(name) + "_lo", format_real(e->lower));
    kv(std::string(name) + "_hi", format_real(e->upper));
    kv(std::string(name) + "_sifted", std::to_string(e->sifted));
    kv(std::string(name) + "_reliable", e->reliable ? "1" : "0");
  }
  if (c.mode == SessionMode::Cdm06) {
    kv("decoded", std::to_string(r.decoded));
    kv("decoding_errors", std::to_string(r.decoding_errors));
    kv("p_e_hat", format_real(r.p_e_hat));
    kv("p_e_stderr", format_real(r.p_e_stderr));
    kv("all_discarded", std::to_string(r.discard.all_discarded));
    kv("all_discard_frequency", format_real(r.discard.all_discard_frequency));
    std::string hist;
    for (std::size_t i = 0; i < r.discard.histogram.size(); ++i)
      hist += (i ? ";" : "") + std::to_string(r.discard.histogram[i]);
    kv("discard_histogram", hist);
  } else {
    kv("mi_hat", format_real(r.mi_hat));
    kv("mi_bias", format_real(r.mi_bias));
  }
  return out.str();
}

}  // namespace qsdc
