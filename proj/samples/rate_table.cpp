// Prints the achievable rate of every disclosure scheme for n = 1..3 at a
// symmetric QBER given on the command line (default 0.05).
#include <cstdio>
#include <cstdlib>

#include "qsdc/qsdc.hpp"

int main(int argc, char** argv) {
  const double q = argc > 1 ? std::atof(argv[1]) : 0.05;
  std::printf("%-8s %3s %10s %10s %10s\n", "scheme", "n", "p*", "t*", "R");
  for (qsdc::Scheme s : qsdc::kAllSchemes) {
    for (int n = 1; n <= 3; ++n) {
      const auto r = qsdc::achievable_rate({s, n, 0, q, q});
      std::printf("%-8s %3d %10.6f %10.6f %10.6f%s\n", std::string(qsdc::scheme_name(s)).c_str(), n, r.p_star,
                  r.t_star, r.r, r.status == qsdc::RateStatus::Insecure ? "  (insecure)" : "");
    }
  }
}
