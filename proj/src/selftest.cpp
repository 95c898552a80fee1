#include "aircomp/selftest.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "aircomp/designs.hpp"

namespace aircomp {

namespace {

SelftestCheck check(std::string name, bool passed, const std::string& detail = {}) {
  return {std::move(name), passed, passed ? std::string{} : detail};
}

std::string describe(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

SystemConfig small_config() {
  SystemConfig c;
  c.L = 4;
  c.N = 2;
  c.K = 6;
  c.tau_p = 3;
  c.area_m = 200.0;
  return c;
}

SelftestCheck kkt_residuals() {
  Rng rng = make_rng(11, 0, Stream::kEvaluation);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const cd g = complex_normal(rng, std::pow(10.0, 4.0 * unit(rng) - 2.0));
    const double e = std::pow(10.0, 4.0 * unit(rng) - 3.0);
    const double P = std::pow(10.0, 4.0 * unit(rng) - 2.0);
    const KktPoint kkt = optimal_b(g, e, P);
    const double scale = std::abs(g) + (std::norm(g) + e) * std::abs(kkt.b);
    const double stationarity =
        std::abs((std::norm(g) + e + kkt.mu) * kkt.b - std::conj(g)) / scale;
    const double feasibility = std::max(0.0, std::norm(kkt.b) - P) / P;
    const double dual = std::max(0.0, -kkt.mu);
    const double slackness = std::abs(kkt.mu * (std::norm(kkt.b) - P)) / (std::norm(g) + e);
    worst = std::max({worst, stationarity, feasibility, dual, slackness});
  }
  return check("kkt residuals", worst <= 1e-10, "worst residual " + describe(worst));
}

SelftestCheck estimate_covariances_psd() {
  const SystemConfig config = small_config();
  Rng rng = make_rng(12, 0, Stream::kTopology);
  const Snapshot snap = build_snapshot(config, rng);
  const PilotAssignment pilots = assign_pilots(config.K, config.tau_p, rng);
  const MmseEstimator estimator(snap, pilots, LinkBudget::from(config));
  const auto& cov = *estimator.covariances();
  double worst = 0.0;
  for (int k = 0; k < config.K; ++k) {
    for (int l = 0; l < config.L; ++l) {
      for (const HermitianMatrix* m : {&cov.B(k, l), &cov.C(k, l)}) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m->matrix());
        const double relative = -eig.eigenvalues().minCoeff() / snap.beta(k, l);
        worst = std::max(worst, relative);
      }
    }
  }
  return check("estimate covariances psd", worst <= kPsdTolerance,
               "most negative relative eigenvalue " + describe(-worst));
}

SelftestCheck fronthaul_examples() {
  SystemConfig c;
  c.tau_c = 200;
  c.tau_p = 20;
  c.N = 1;
  c.L = 144;
  c.K = 20;
  const FronthaulCount l3 = fronthaul_count(3, c);
  c.L = 36;
  const FronthaulCount l1 = fronthaul_count(1, c);
  const FronthaulCount l2 = fronthaul_count(2, c);
  const bool ok = l3.per_block_to_cpu.value() == 28800 && l3.per_block_to_aps.value() == 20 &&
                  l3.statistical.value() == 1440 && l1.per_block_to_cpu.value() == 6480 &&
                  l1.per_block_to_aps.value() == 0 && l1.statistical.value() == 0 &&
                  l2.statistical.value() == 13698;
  return check("fronthaul counts", ok, "reference configurations disagree");
}

SelftestCheck scalar_estimator() {
  const double beta = 2.5e-9;
  const double p = 100.0;
  const double noise = 1e-9;
  Topology topo{{{0.0, 0.0}}, {{10.0, 0.0}}};
  Eigen::MatrixXd b(1, 1);
  b(0, 0) = beta;
  PairArray<HermitianMatrix> R(1, 1, HermitianMatrix(ComplexMatrix::Constant(1, 1, beta)));
  const Snapshot snap = make_snapshot(topo, b, Eigen::MatrixXd::Zero(1, 1), std::move(R));
  const PilotAssignment pilots = make_assignment(1, {0});
  const LinkBudget budget{{p}, noise, 1};
  PairArray<ComplexVector> y(1, 1, ComplexVector::Constant(1, cd(3e-4, -1e-4)));
  const EstimationResult est = mmse_estimate(y, snap, pilots, budget);
  const double gain = std::sqrt(p) * beta / (p * beta + noise);
  const cd expected = gain * y(0, 0)(0);
  const double expected_c = beta - p * beta * beta / (p * beta + noise);
  const double err = std::abs(est.h_hat(0, 0)(0) - expected) / std::abs(expected) +
                     std::abs(est.C(0, 0)(0, 0).real() - expected_c) / expected_c;
  return check("scalar mmse estimate", err <= 1e-12, "relative error " + describe(err));
}

EstimationResult fixed_estimate(std::vector<ComplexVector> h_hat, std::vector<ComplexMatrix> C) {
  const int K = static_cast<int>(h_hat.size());
  auto cov = std::make_shared<EstimationCovariances>();
  cov->B = PairArray<HermitianMatrix>(K, 1);
  cov->C = PairArray<HermitianMatrix>(K, 1);
  EstimationResult est;
  est.h_hat = PairArray<ComplexVector>(K, 1);
  for (int k = 0; k < K; ++k) {
    est.h_hat(k, 0) = h_hat[k];
    cov->B(k, 0) = HermitianMatrix::symmetrized(h_hat[k] * h_hat[k].adjoint());
    cov->C(k, 0) = HermitianMatrix(C[k]);
  }
  est.cov = std::move(cov);
  return est;
}

SelftestCheck combiner_oracle() {
  const EstimationResult est =
      fixed_estimate({ComplexVector::Unit(2, 0)}, {ComplexMatrix::Zero(2, 2)});
  const std::vector<cd> b{cd(1.0, 0.0)};
  const ComplexVector v = optimal_v(b, est, 1.0);
  ComplexVector expected = ComplexVector::Zero(2);
  expected(0) = 0.5;
  const double err = (v - expected).norm();
  return check("rank-one combiner", err <= 1e-14, "distance " + describe(err));
}

SelftestCheck monotone_descent_and_floor() {
  SystemConfig config = small_config();
  Rng rng = make_rng(13, 0, Stream::kTopology);
  const Snapshot snap = build_snapshot(config, rng);
  const PilotAssignment pilots = assign_pilots(config.K, config.tau_p, rng);
  const LinkBudget budget = LinkBudget::from(config);
  const EstimationResult est = mmse_estimate(
      pilot_observation(sample_channels(snap, rng), pilots, budget, rng), snap, pilots, budget);

  const std::vector<double> moderate(config.K, dbm_to_mw(10.0));
  const Level3Design design = alternating_optimize(est, moderate, budget.noise_mw);
  double worst_rise = 0.0;
  for (std::size_t i = 1; i < design.mse_trace.size(); ++i) {
    worst_rise = std::max(worst_rise, design.mse_trace[i] - design.mse_trace[i - 1]);
  }
  const SelftestCheck monotone =
      check("monotone descent", worst_rise <= 1e-12, "largest increase " + describe(worst_rise));
  if (!monotone.passed) return monotone;

  const std::vector<double> huge(config.K, 1e12);
  const Level3Design high = alternating_optimize(est, huge, budget.noise_mw);
  const double floor = asymptotic_floor(est, high.v, budget.noise_mw);
  return check("monotone descent and floor", high.mse() >= floor * (1.0 - 1e-9),
               "mse " + describe(high.mse()) + " below floor " + describe(floor));
}

}  // namespace

std::vector<SelftestCheck> run_selftest() {
  std::vector<SelftestCheck> checks;
  auto guarded = [&](const char* name, SelftestCheck (*fn)()) {
    try {
      checks.push_back(fn());
    } catch (const std::exception& e) {
      checks.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("kkt residuals", kkt_residuals);
  guarded("estimate covariances psd", estimate_covariances_psd);
  guarded("fronthaul counts", fronthaul_examples);
  guarded("scalar mmse estimate", scalar_estimator);
  guarded("rank-one combiner", combiner_oracle);
  guarded("monotone descent and floor", monotone_descent_and_floor);
  return checks;
}

bool report_selftest(const std::vector<SelftestCheck>& checks, std::ostream& out) {
  bool all = true;
  for (const auto& c : checks) {
    if (c.passed) {
      out << "PASS " << c.name << '\n';
    } else {
      out << "FAIL " << c.name << ": " << c.detail << '\n';
      all = false;
    }
  }
  return all;
}

}  // namespace aircomp
