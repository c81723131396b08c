#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsdc/attack.hpp"
#include "qsdc/disclosure.hpp"
#include "qsdc/entropy.hpp"
#include "qsdc/operators.hpp"
#include "qsdc/optimize.hpp"
#include "qsdc/parallel.hpp"
#include "qsdc/probe_states.hpp"

namespace qsdc {

/// One point of the model: disclosure scheme, ensemble size, Bob's basis
/// (0 = Z, 1 = X) and the two QBERs.
struct ModelConfig {
  Scheme scheme = Scheme::FullOutcome;
  int n = 1;
  int b = 0;
  double q_z = 0.0;
  double q_x = 0.0;
};

enum class MixturePath { Reduced, Dense };

struct EngineSettings {
  SearchSettings p_search{};
  SearchSettings t_search{};
  int max_n = 5;
  MixturePath path = MixturePath::Reduced;

  std::string describe() const {
    std::ostringstream out;
    out << "coarse_points=" << p_search.coarse_points << " tolerance=" << p_search.tolerance
        << " t_coarse_points=" << t_search.coarse_points << " t_tolerance=" << t_search.tolerance
        << " max_n=" << max_n << " mixture=" << (path == MixturePath::Dense ? "dense" : "reduced");
    return out.str();
  }
};

enum class RateStatus { Ok, Insecure, Error };

struct RateResult {
  double chi_b = 0.0;
  double chi_e = 0.0;
  double c = 0.0;  // bits per ensemble
  double r = 0.0;  // bits per EPR pair
  double p_star = 0.0;
  double t_star = 0.0;
  RateStatus status = RateStatus::Error;
  std::string message;
};

/// Bound values at or below this count as insecure.
inline constexpr double kSecureThreshold = 1e-12;
inline constexpr int kClassCheckMaxN = 3;
inline constexpr double kClassCheckTolerance = 1e-10;

inline void validate_config(const ModelConfig& c, const EngineSettings& s = {}) {
  if (c.n < 1 || c.n > s.max_n) {
    throw std::invalid_argument("ensemble size n=" + std::to_string(c.n) + " outside [1, " +
                                std::to_string(s.max_n) + "]");
  }
  if (c.n > DisclosureScheme::kMaxLength) throw std::invalid_argument("ensemble size too large");
  if (c.b != 0 && c.b != 1) throw std::invalid_argument("Bob's basis must be 0 (Z) or 1 (X)");
  if (!(c.q_z >= 0.0 && c.q_z <= 0.5) || !(c.q_x >= 0.0 && c.q_x <= 0.5)) {
    throw std::invalid_argument("QBERs must lie in [0, 0.5]");
  }
}

/// P_a(k'|k): correlated outcomes with QBER Q_a when a = b, uniform otherwise.
inline double p_bob_given_alice(int a, int b, const BitString& k, const BitString& k_prime, double q_z,
                                double q_x) {
  if (k.size() != k_prime.size()) throw std::invalid_argument("outcome lengths differ");
  const int n = k.size();
  if (a != b) return std::ldexp(1.0, -n);
  const double q = a == 0 ? q_z : q_x;
  const int d = (k ^ k_prime).weight();
  return std::pow(q, d) * std::pow(1.0 - q, n - d);
}

/// Announcements whose conditional states are related by a site
/// permutation and a global Pauli relabeling share a key.
inline int announcement_class_key(Scheme scheme, const Announcement& s, int n) {
  switch (scheme) {
    case Scheme::FullOutcome:
    case Scheme::Parity: return 0;
    case Scheme::Weight: {
      const int w = static_cast<int>(s.as_count());
      return std::min(w, n - w);
    }
    case Scheme::ExcessBits: return s.as_bits().weight();
  }
  return 0;
}

/// chi_B, chi_E and the per-announcement machinery for one configuration.
class RateModel {
 public:
  struct AnnouncementClass {
    Announcement representative;
    std::vector<std::uint32_t> support;
    double probability;  // total P(s) over members
    std::size_t members;
    std::unique_ptr<MixturePlan> plan;
  };

  explicit RateModel(const ModelConfig& config, const EngineSettings& settings = {})
      : config_(config), settings_(settings), scheme_(config.scheme, config.n) {
    validate_config(config, settings);
    build_bob_table();
    build_classes();
    if (config.n <= kClassCheckMaxN) check_classes();
  }

  const ModelConfig& config() const noexcept { return config_; }
  const std::vector<AnnouncementClass>& classes() const noexcept { return classes_; }

  /// Holevo quantity between a and Bob's view (s, k').
  double chi_b(double p) const {
    require_p(p);
    double total = 0.0;
    const std::size_t size = std::size_t{1} << config_.n;
    const double uniform = 1.0 / static_cast<double>(size);
    const double h_uniform = static_cast<double>(config_.n);
    std::vector<double> mix(size);
    for (const auto& row : bob_rows_) {
      for (std::size_t kp = 0; kp < size; ++kp) {
        const double p0 = config_.b == 0 ? row.matched[kp] : uniform;
        const double p1 = config_.b == 1 ? row.matched[kp] : uniform;
        mix[kp] = p * p0 + (1.0 - p) * p1;
      }
      const double h0 = config_.b == 0 ? row.matched_entropy : h_uniform;
      const double h1 = config_.b == 1 ? row.matched_entropy : h_uniform;
      total += row.probability * (entropy_bits(mix) - p * h0 - (1.0 - p) * h1);
    }
    return std::clamp(total, 0.0, 1.0);
  }

  /// Holevo quantity between a and Eve's probes (with s public).
  double chi_e(const AttackSpec& spec, double p) const {
    require_p(p);
    require_spec(spec);
    const auto& conditional = conditional_entropies(spec);
    double total = 0.0;
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      const auto& cls = classes_[c];
      const double mixed = cls.plan->entropy(spec.lambdas(), p);
      total += cls.probability * (mixed - p * conditional[c][0] - (1.0 - p) * conditional[c][1]);
    }
    return std::clamp(total, 0.0, 1.0);
  }

  /// [S(rho_{E|0,s}), S(rho_{E|1,s})] per class, cached by attack.
  const std::vector<std::array<double, 2>>& conditional_entropies(const AttackSpec& spec) const {
    std::lock_guard lock(cache_mutex_);
    const auto key = std::make_pair(spec.lambdas().values, spec.t());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<std::array<double, 2>> values;
    values.reserve(classes_.size());
    for (const auto& cls : classes_) {
      std::array<double, 2> s{};
      for (int a = 0; a < 2; ++a) {
        s[static_cast<std::size_t>(a)] = conditional_entropy(a, cls.support, config_.n, spec.lambdas());
      }
      values.push_back(s);
    }
    if (cache_.size() > kCacheLimit) cache_.clear();
    return cache_.emplace(key, std::move(values)).first->second;
  }

 private:
  static constexpr std::size_t kCacheLimit = 4096;

  struct BobRow {
    double probability;
    std::vector<double> matched;  // P_b(k'|s)
    double matched_entropy;
  };

  static void require_p(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("P_A(0) must lie in [0, 1]");
  }

  void require_spec(const AttackSpec& spec) const {
    if (spec.q_z() != config_.q_z || spec.q_x() != config_.q_x) {
      throw std::invalid_argument("attack QBERs do not match the configuration");
    }
  }

  void build_bob_table() {
    const auto outcomes = all_bitstrings(config_.n);
    for (const Announcement& s : scheme_.announcements()) {
      const Posterior post = scheme_.posterior(s);
      BobRow row{post.announcement_probability, std::vector<double>(outcomes.size(), 0.0), 0.0};
      const double w = 1.0 / static_cast<double>(post.outcomes.size());
      for (const BitString& k : post.outcomes)
        for (const BitString& kp : outcomes)
          row.matched[kp.value()] +=
              w * p_bob_given_alice(config_.b, config_.b, k, kp, config_.q_z, config_.q_x);
      row.matched_entropy = entropy_bits(row.matched);
      bob_rows_.push_back(std::move(row));
    }
  }

  void build_classes() {
    std::map<int, std::size_t> index;
    for (const Announcement& s : scheme_.announcements()) {
      const int key = announcement_class_key(config_.scheme, s, config_.n);
      const Posterior post = scheme_.posterior(s);
      auto [it, fresh] = index.emplace(key, classes_.size());
      if (fresh) {
        auto support = outcome_masks(post.outcomes);
        std::unique_ptr<MixturePlan> plan =
            settings_.path == MixturePath::Dense
                ? std::make_unique<MixturePlan>(support, config_.n, MixtureStrategy::Dense)
                : std::make_unique<MixturePlan>(support, config_.n);
        classes_.push_back(AnnouncementClass{s, std::move(support), 0.0, 0, std::move(plan)});
      }
      auto& cls = classes_[it->second];
      cls.probability += post.announcement_probability;
      ++cls.members;
      members_.push_back({it->second, s});
    }
  }

  // Confirms at a generic interior point that every announcement reproduces
  // its class representative's entropies.
  void check_classes() const {
    const TInterval ti = t_interval(0.07, 0.11);
    const AttackSpec probe(0.07, 0.11, ti.lo + 0.37 * ti.width());
    const double p = 0.41;
    for (const auto& [c, s] : members_) {
      const auto support = outcome_masks(scheme_.posterior(s).outcomes);
      const auto& rep = classes_[c];
      const double mix = MixturePlan(support, config_.n, MixtureStrategy::FlipBlocks).entropy(probe.lambdas(), p);
      const double mix_rep = rep.plan->entropy(probe.lambdas(), p);
      double diff = std::abs(mix - mix_rep);
      for (int a = 0; a < 2; ++a) {
        const double own = von_neumann_entropy(conditional_probe_state<double>(a, support, config_.n, probe.lambdas()));
        const double ref = von_neumann_entropy(conditional_probe_state<double>(a, rep.support, config_.n, probe.lambdas()));
        diff = std::max(diff, std::abs(own - ref));
      }
      if (diff > kClassCheckTolerance) {
        throw std::logic_error("announcement " + s.str() + " does not match its class representative " +
                               rep.representative.str());
      }
    }
  }

  ModelConfig config_;
  EngineSettings settings_;
  DisclosureScheme scheme_;
  std::vector<BobRow> bob_rows_;
  std::vector<AnnouncementClass> classes_;
  std::vector<std::pair<std::size_t, Announcement>> members_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<std::array<double, 4>, double>, std::vector<std::array<double, 2>>> cache_;
};

namespace detail {

inline RateResult optimize_rate(const ModelConfig& config, const EngineSettings& settings,
                                std::optional<double> fixed_p) {
  const RateModel model(config, settings);
  const TInterval interval = t_interval(config.q_z, config.q_x);

  auto inner = [&](double p) {
    const double chi_b = model.chi_b(p);
    return minimize_scalar(
        [&](double t) { return chi_b - model.chi_e(AttackSpec(config.q_z, config.q_x, t), p); },
        interval.lo, interval.hi, settings.t_search);
  };

  RateResult out;
  if (fixed_p) {
    if (!(*fixed_p >= 0.0 && *fixed_p <= 1.0)) throw std::invalid_argument("P_A(0) must lie in [0, 1]");
    out.p_star = *fixed_p;
  } else {
    out.p_star = maximize_scalar([&](double p) { return inner(p).value; }, 0.0, 1.0, settings.p_search).x;
  }
  out.t_star = inner(out.p_star).x;
  const AttackSpec spec(config.q_z, config.q_x, out.t_star);
  out.chi_b = model.chi_b(out.p_star);
  out.chi_e = model.chi_e(spec, out.p_star);
  const double bound = out.chi_b - out.chi_e;
  out.c = std::max(0.0, bound);
  out.r = out.c / config.n;
  out.status = bound > kSecureThreshold ? RateStatus::Ok : RateStatus::Insecure;
  return out;
}

}  // namespace detail

/// max over p of min over t of (chi_B - chi_E), clamped at zero.
inline RateResult achievable_rate(const ModelConfig& config, const EngineSettings& settings = {}) {
  return detail::optimize_rate(config, settings, std::nullopt);
}

/// min over t of (chi_B - chi_E) at a fixed P_A(0) = p.
inline RateResult rate_at_fixed_p(const ModelConfig& config, double p, const EngineSettings& settings = {}) {
  return detail::optimize_rate(config, settings, p);
}

/// Evaluates every configuration; failures become error rows. Output order
/// follows input order for any thread count.
inline std::vector<RateResult> sweep(const std::vector<ModelConfig>& configs,
                                     const EngineSettings& settings = {}, unsigned threads = 1) {
  std::vector<RateResult> out(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) {
    try {
      out[i] = achievable_rate(configs[i], settings);
    } catch (const std::exception& e) {
      out[i] = RateResult{};
      out[i].status = RateStatus::Error;
      out[i].message = e.what();
    }
  });
  return out;
}

inline constexpr const char* kRateCsvHeader =
    "scheme,n,b,q_z,q_x,p_star,t_star,chi_b,chi_e,c_per_ensemble,r_per_pair,status";

/// %.9g, with negative zero printed as 0.
inline std::string format_real(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string csv_safe(std::string text) {
  for (char& ch : text)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ch == ',' ? ';' : ' ';
  return text;
}

inline std::string status_text(const RateResult& r) {
  switch (r.status) {
    case RateStatus::Ok: return "ok";
    case RateStatus::Insecure: return "insecure";
    case RateStatus::Error: return "error:" + csv_safe(r.message);
  }
  return "error:unknown";
}

inline std::string format_rate_row(const ModelConfig& c, const RateResult& r) {
  std::string row = std::string(scheme_name(c.scheme)) + "," + std::to_string(c.n) + "," +
                    std::to_string(c.b) + "," + format_real(c.q_z) + "," + format_real(c.q_x);
  if (r.status == RateStatus::Error) {
    row += ",,,,,,";
  } else {
    for (double v : {r.p_star, r.t_star, r.chi_b, r.chi_e, r.c, r.r}) row += "," + format_real(v);
  }
  return row + "," + status_text(r);
}

}  // namespace qsdc
