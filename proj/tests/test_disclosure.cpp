#include <catch2/catch.hpp>

#include <cmath>
#include <map>
#include <set>

#include "dense_oracle.hpp"
#include "qsdc/disclosure.hpp"

using namespace qsdc;

namespace {

oracle::Kind oracle_kind(Scheme s) {
  switch (s) {
    case Scheme::FullOutcome: return oracle::Kind::Full;
    case Scheme::ExcessBits: return oracle::Kind::Excess;
    case Scheme::Weight: return oracle::Kind::Weight;
    case Scheme::Parity: return oracle::Kind::Parity;
  }
  return oracle::Kind::Full;
}

std::vector<std::string> strings(const std::vector<BitString>& v) {
  std::vector<std::string> out;
  for (const auto& b : v) out.push_back(b.str());
  return out;
}

}  // namespace

TEST_CASE("scheme names round trip", "[disclosure]") {
  for (Scheme s : kAllSchemes) CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK_THROWS_AS(parse_scheme("hash"), std::invalid_argument);
}

TEST_CASE("full outcome announces k itself", "[disclosure]") {
  const DisclosureScheme full(Scheme::FullOutcome, 2);
  Rng rng(1);
  const auto k = BitString::parse("01");
  for (int i = 0; i < 10; ++i) CHECK(full.announce(k, rng).str() == "01");
  CHECK(full.probability(Announcement::bits(k), k) == 1.0);
}

TEST_CASE("parity announcement", "[disclosure]") {
  const DisclosureScheme parity(Scheme::Parity, 3);
  Rng rng(2);
  CHECK(parity.announce(BitString::parse("011"), rng) == Announcement::count(0));
  CHECK(parity.announce(BitString::parse("111"), rng) == Announcement::count(1));
}

TEST_CASE("excess-bit announcement for k=011", "[disclosure]") {
  const DisclosureScheme excess(Scheme::ExcessBits, 3);
  const auto k = BitString::parse("011");
  const auto s = excess.compatible_announcements(k);
  REQUIRE(s.size() == 2);
  CHECK(s[0].str() == "001");
  CHECK(s[1].str() == "010");
  CHECK(excess.probability(s[0], k) == 0.5);
  CHECK(excess.probability(Announcement::bits(BitString::parse("100")), k) == 0.0);
}

TEST_CASE("balanced outcomes announce the all-zero string", "[disclosure]") {
  const DisclosureScheme excess(Scheme::ExcessBits, 4);
  Rng rng(3);
  CHECK(excess.announce(BitString::parse("0110"), rng).str() == "0000");
}

TEST_CASE("compatible outcome sets", "[disclosure]") {
  const DisclosureScheme weight(Scheme::Weight, 3);
  CHECK(strings(weight.compatible_outcomes(Announcement::count(2))) ==
        std::vector<std::string>{"011", "101", "110"});
  const DisclosureScheme parity(Scheme::Parity, 3);
  CHECK(strings(parity.compatible_outcomes(Announcement::count(0))) ==
        std::vector<std::string>{"000", "011", "101", "110"});
  const DisclosureScheme excess(Scheme::ExcessBits, 3);
  const auto s = Announcement::bits(BitString::parse("001"));
  CHECK(strings(excess.compatible_outcomes(s)) == std::vector<std::string>{"010", "011", "100", "101"});
  CHECK(excess.outcome_count(s) == 4);
}

TEST_CASE("posterior examples", "[disclosure]") {
  const DisclosureScheme full(Scheme::FullOutcome, 2);
  for (const auto& s : full.announcements()) {
    const auto post = full.posterior(s);
    CHECK(post.announcement_probability == 0.25);
    CHECK(post.outcomes.size() == 1);
  }
  const DisclosureScheme parity(Scheme::Parity, 3);
  const auto pp = parity.posterior(Announcement::count(0));
  CHECK(pp.announcement_probability == Approx(0.5).margin(1e-15));
  CHECK(pp.distribution.size() == 4);
  CHECK(pp.distribution[0] == 0.25);
  const DisclosureScheme excess(Scheme::ExcessBits, 3);
  const auto pe = excess.posterior(Announcement::bits(BitString::parse("001")));
  CHECK(pe.announcement_probability == Approx(0.25).margin(1e-15));
  CHECK(pe.distribution[2] == 0.25);
}

TEST_CASE("malformed announcements are rejected", "[disclosure]") {
  const DisclosureScheme excess(Scheme::ExcessBits, 3);
  CHECK_THROWS_AS(excess.compatible_outcomes(Announcement::bits(BitString::parse("011"))), std::invalid_argument);
  CHECK_THROWS_AS(excess.compatible_outcomes(Announcement::count(1)), std::invalid_argument);
  CHECK_THROWS_AS(excess.compatible_outcomes(Announcement::bits(BitString::parse("01"))), std::invalid_argument);
  const DisclosureScheme weight(Scheme::Weight, 3);
  CHECK_THROWS_AS(weight.compatible_outcomes(Announcement::count(4)), std::invalid_argument);
  const DisclosureScheme parity(Scheme::Parity, 3);
  CHECK_THROWS_AS(parity.posterior(Announcement::count(2)), std::invalid_argument);
  CHECK_THROWS_AS(DisclosureScheme(Scheme::Parity, 0), std::invalid_argument);
  CHECK_THROWS_AS(DisclosureScheme(Scheme::Parity, 17), std::invalid_argument);
  CHECK_THROWS_AS(parity.announcement_count(BitString::parse("01")), std::invalid_argument);
}

TEST_CASE("announcement probabilities sum to one per outcome", "[disclosure][property]") {
  for (Scheme scheme : kAllSchemes)
    for (int n = 1; n <= 6; ++n) {
      const DisclosureScheme d(scheme, n);
      for (const auto& k : all_bitstrings(n)) {
        double total = 0.0;
        const auto compatible = d.compatible_announcements(k);
        for (const auto& s : compatible) {
          const double p = d.probability(s, k);
          CHECK(p == Approx(1.0 / static_cast<double>(compatible.size())).margin(1e-15));
          total += p;
        }
        CHECK(total == Approx(1.0).margin(1e-12));
      }
    }
}

TEST_CASE("cardinalities and Bayes consistency match brute force for n <= 8", "[disclosure][property]") {
  for (Scheme scheme : kAllSchemes)
    for (int n = 1; n <= 8; ++n) {
      const DisclosureScheme d(scheme, n);
      const auto table = oracle::joint_table(oracle_kind(scheme), n);
      const auto announcements = d.announcements();
      REQUIRE(announcements.size() == table.size());
      double total = 0.0;
      std::map<std::uint32_t, std::uint64_t> s_count;
      for (const auto& s : announcements) {
        const auto& row = table.at(s.str());
        std::uint64_t k_count = 0;
        for (double v : row) k_count += v > 0.0;
        REQUIRE(d.outcome_count(s) == k_count);
        REQUIRE(d.compatible_outcomes(s).size() == k_count);
        const auto post = d.posterior(s);
        total += post.announcement_probability;
        for (std::size_t i = 0; i < post.outcomes.size(); ++i) {
          const auto& k = post.outcomes[i];
          REQUIRE(post.announcement_probability * post.distribution[i] ==
                  Approx(std::ldexp(1.0, -n) * d.probability(s, k)).margin(1e-12));
          REQUIRE(post.announcement_probability * post.distribution[i] ==
                  Approx(row[k.value()]).margin(1e-12));
          ++s_count[k.value()];
        }
      }
      CHECK(total == Approx(1.0).margin(1e-12));
      for (const auto& k : all_bitstrings(n)) REQUIRE(d.announcement_count(k) == s_count[k.value()]);
    }
}

TEST_CASE("announcement counts are constant over K(s)", "[disclosure][property]") {
  for (Scheme scheme : kAllSchemes)
    for (int n = 1; n <= 7; ++n) {
      const DisclosureScheme d(scheme, n);
      for (const auto& s : d.announcements()) {
        std::set<std::uint64_t> sizes;
        for (const auto& k : d.compatible_outcomes(s)) sizes.insert(d.announcement_count(k));
        CHECK(sizes.size() == 1);
      }
    }
}

TEST_CASE("sampled announcements follow P(s|k)", "[disclosure][statistical]") {
  const int draws = 100000;
  Rng rng(20240601);
  const DisclosureScheme excess(Scheme::ExcessBits, 5);
  const auto k = BitString::parse("11101");
  std::map<std::string, int> freq;
  for (int i = 0; i < draws; ++i) ++freq[excess.announce(k, rng).str()];
  const auto compatible = excess.compatible_announcements(k);
  REQUIRE(freq.size() == compatible.size());
  for (const auto& s : compatible) {
    const double p = excess.probability(s, k);
    const double se = std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::abs(freq[s.str()] / static_cast<double>(draws) - p) < 4.0 * se);
  }
}
