// Runs a CDM06 session batch and a weight-disclosure session batch with the
// same noisy channel and prints both reports.
#include <iostream>

#include "qsdc/qsdc.hpp"

int main() {
  qsdc::SessionConfig cdm;
  cdm.mode = qsdc::SessionMode::Cdm06;
  cdm.m = 2;
  cdm.q_z = cdm.q_x = 0.02;
  cdm.t = 0.0392;
  cdm.trials = 50000;
  cdm.seed = 2024;
  std::cout << qsdc::format_session_report(qsdc::run_session(cdm)) << '\n';

  qsdc::SessionConfig model = cdm;
  model.mode = qsdc::SessionMode::Model;
  model.scheme = qsdc::Scheme::Weight;
  model.n = 2;
  const auto report = qsdc::run_session(model);
  std::cout << qsdc::format_session_report(report);
  std::cout << "chi_b (exact) = " << qsdc::RateModel({model.scheme, 2, 0, 0.02, 0.02}).chi_b(model.p) << '\n';
}
