#include <chrono>
#include <random>

#include <gtest/gtest.h>

#include <optf/solver.hpp>

#include "finite_difference.hpp"
#include "fixtures.hpp"
#include "random_returns.hpp"

using namespace optf;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v(k++) = x;
  return v;
}

Errc error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected optf::Error";
  return Errc::InvalidArgument;
}

// Optima from an independent SLSQP run on the same matrices.
const Vector kExample1Opt = vec({0.23616606, 0.05701978, 0.16854452, 0.10122833});
const Vector kExample2Opt = vec({0.41090311, 0.34248739});

}  // namespace

TEST(Derivatives, GradientAtZeroIsMeanRow) {
  const auto r = normalize(test::example1());
  const auto d = derivatives(r, Vector::Zero(4));
  const Vector mean = r.rows().colwise().mean().transpose();
  EXPECT_TRUE(d.gradient.isApprox(mean, 1e-15));
  EXPECT_GT(d.gradient.minCoeff(), 0.0);
}

TEST(Derivatives, MatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = normalize(test::random_admissible(rng));
    const Vector f = test::random_interior(rng, r);
    const auto d = derivatives(r, f);
    const Vector fd = test::central_difference(
        [&](const Vector& x) { return log_twr_mean(r, x); }, f, 1e-6);
    EXPECT_LT(test::relative_error(d.gradient, fd), 1e-6);

    // Hessian of the log objective against differences of the gradient.
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      const Vector col = test::central_difference(
          [&](const Vector& x) { return derivatives(r, x).gradient(k); }, f, 1e-6);
      EXPECT_LT(test::relative_error(d.hessian_log.row(k).transpose(), col), 1e-6);
    }
  }
}

TEST(Derivatives, HessianBSymmetricPsd) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = normalize(test::random_admissible(rng));
    const auto d = derivatives(r, test::random_interior(rng, r));
    EXPECT_TRUE(d.hessian_B.isApprox(d.hessian_B.transpose(), 1e-14));
    const Eigen::SelfAdjointEigenSolver<Matrix> es(d.hessian_B);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff());
  }
}

TEST(Derivatives, TwrRootGradientRelation) {
  // grad TWR^(1/N) = TWR^(1/N) * gradient, checked by finite differences.
  const auto r = normalize(test::example2());
  const Vector f = vec({0.3, 0.2});
  const auto d = derivatives(r, f);
  const Vector fd = test::central_difference(
      [&](const Vector& x) { return std::pow(twr(r, x), 1.0 / 5.0); }, f, 1e-6);
  EXPECT_LT(test::relative_error(std::pow(twr(r, f), 0.2) * d.gradient, fd), 1e-7);
}

TEST(Derivatives, Example3ThirdComponent) {
  const auto r = normalize(test::example3());
  const Vector f = vec({0.4109, 0.3425, 0.0});
  const Vector g = twr_gradient(r, f);
  // TWR * sum_i a_i3 / HPR_i from an independent evaluation.
  EXPECT_NEAR(g(2), -0.5232429764041368, 1e-12);
  // Without the TWR factor: sum_i a_i3 / HPR_i.
  EXPECT_NEAR(5.0 * derivatives(r, f).gradient(2), -0.3589938176870664, 1e-12);
  EXPECT_LT(g(2), 0.0);
}

TEST(Derivatives, RuinDomain) {
  const auto r = normalize(test::example1());
  EXPECT_EQ(error_code([&] { derivatives(r, Vector::Constant(4, 0.25)); }), Errc::RuinDomain);
}

TEST(Optimize, Example1Interior) {
  const auto start = std::chrono::steady_clock::now();
  const auto res = optimize(test::example1());
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 1.0);
  EXPECT_TRUE(res.kkt.certified);
  EXPECT_EQ(res.location, Location::Interior);
  EXPECT_TRUE(res.active_set.empty());
  EXPECT_LT((res.f_opt - vec({0.2362, 0.0570, 0.1685, 0.1012})).cwiseAbs().maxCoeff(), 5e-4);
  EXPECT_LT((res.f_opt - kExample1Opt).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(res.twr_value, 2.139165542407595, 1e-9);
  EXPECT_GT(res.twr_value, 1.0);
  EXPECT_GE(res.risk_value, 0.0);
  EXPECT_LT(res.risk_value, 1.0);
}

TEST(Optimize, Example2Interior) {
  const auto res = optimize(test::example2());
  EXPECT_TRUE(res.kkt.certified);
  EXPECT_EQ(res.location, Location::Interior);
  EXPECT_LT((res.f_opt - kExample2Opt).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(res.twr_value, 1.4575264273417685, 1e-9);
}

TEST(Optimize, Example3OnBoundary) {
  const auto res = optimize(test::example3());
  EXPECT_TRUE(res.kkt.certified);
  EXPECT_TRUE(res.kkt.active_signs_ok);
  EXPECT_EQ(res.location, Location::OrthantBoundary);
  EXPECT_EQ(res.active_set, std::vector<std::size_t>{2});
  EXPECT_EQ(res.f_opt(2), 0.0);
  EXPECT_LT((res.f_opt.head(2) - kExample2Opt).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Optimize, RefusesInadmissibleInput) {
  Matrix t(3, 2);
  t << 1, 1,
       -1, -1,
       2, 2;
  EXPECT_EQ(error_code([&] { optimize(ReturnMatrix(t)); }), Errc::AssumptionViolation);
  EXPECT_EQ(error_code([&] { optimize(normalize(ReturnMatrix(t))); }), Errc::AssumptionViolation);
}

TEST(Optimize, IterationCapReturnsUncertifiedIterate) {
  SolverOptions opts;
  opts.max_iter = 2;
  const auto res = optimize(test::example1(), opts);
  EXPECT_FALSE(res.kkt.certified);
  EXPECT_EQ(res.termination, Termination::MaxIterations);
  EXPECT_EQ(res.iterations, 2u);
  EXPECT_GT(res.twr_value, 1.0);
}

TEST(Optimize, RejectsBadOptionsAndStarts) {
  SolverOptions opts;
  opts.armijo_c = 1.0;
  EXPECT_EQ(error_code([&] { optimize(test::example1(), opts); }), Errc::InvalidArgument);
  SolverOptions warm;
  warm.initial_point = Vector::Constant(4, 0.25);  // ruin point
  EXPECT_EQ(error_code([&] { optimize(test::example1(), warm); }), Errc::InvalidArgument);
}

TEST(Optimize, MonotoneAscentTrace) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = normalize(test::random_admissible(rng));
    const auto res = optimize(r);
    ASSERT_EQ(res.objective_trace.size(), res.iterations + 1);
    for (std::size_t t = 1; t < res.objective_trace.size(); ++t) {
      EXPECT_GE(res.objective_trace[t], res.objective_trace[t - 1]);
    }
    EXPECT_NEAR(res.objective_trace.back(), res.log_twr_mean_value, 1e-12);
  }
}

TEST(Optimize, WarmStartsAgree) {
  std::mt19937_64 rng(43);
  for (auto t : {test::example1(), test::example2(), test::example3()}) {
    const auto r = normalize(t);
    const auto base = optimize(r);
    for (int s = 0; s < 20; ++s) {
      SolverOptions opts;
      opts.initial_point = test::random_interior(rng, r, 0.95);
      const auto res = optimize(r, opts);
      EXPECT_TRUE(res.kkt.certified);
      EXPECT_LT((res.f_opt - base.f_opt).cwiseAbs().maxCoeff(), 100 * opts.tol_grad);
    }
  }
}

TEST(Optimize, StrictConcavityAtInteriorOptimum) {
  for (auto t : {test::example1(), test::example2()}) {
    const auto r = normalize(t);
    const auto res = optimize(r);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(derivatives(r, res.f_opt).hessian_B);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(EliminateSystem, Example3ToExample2) {
  const auto reduced = eliminate_system(test::example3(), 2);
  EXPECT_EQ(reduced.entries(), test::example2().entries());
  EXPECT_TRUE(assumption_report(reduced).overall);
  EXPECT_EQ(reduced.names(), (std::vector<std::string>{"S1", "S2"}));

  const auto rn = eliminate_system(normalize(test::example3()), 0);
  EXPECT_EQ(rn.systems(), 2);
  EXPECT_EQ(rn.biggest_losses()(0), 1.5);
}

TEST(EliminateSystem, LastSystem) {
  Matrix t(2, 1);
  t << -1, 2;
  EXPECT_EQ(error_code([&] { eliminate_system(ReturnMatrix(t), 0); }), Errc::LastSystem);
}

TEST(RefineBoundary, Example3ReducesToExample2) {
  const auto r = normalize(test::example3());
  const auto res = optimize(r);
  const auto refined = refine_boundary(r, res);
  EXPECT_EQ(refined.eliminated_chain, std::vector<std::size_t>{2});
  EXPECT_EQ(refined.f_opt, res.f_opt);
  const auto reduced = optimize(eliminate_system(r, 2));
  EXPECT_LT((reduced.f_opt - kExample2Opt).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RefineBoundary, InteriorUnchanged) {
  const auto r = normalize(test::example1());
  const auto res = optimize(r);
  const auto refined = refine_boundary(r, res);
  EXPECT_TRUE(refined.eliminated_chain.empty());
  EXPECT_EQ(refined.f_opt, res.f_opt);
}

TEST(RefineBoundary, WrongActiveComponentIsInconsistent) {
  const auto r = normalize(test::example1());
  auto res = optimize(r);
  res.location = Location::OrthantBoundary;
  res.active_set = {1};
  EXPECT_EQ(error_code([&] { refine_boundary(r, res); }), Errc::InconsistentReduction);
}

TEST(RefineBoundary, RandomBoundaryOptimaAreConsistent) {
  std::mt19937_64 rng(47);
  int boundary = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto r = normalize(test::random_admissible(rng));
    const auto res = optimize(r);
    if (res.location != Location::OrthantBoundary || r.systems() < 2) continue;
    ++boundary;
    const auto refined = refine_boundary(r, res);
    EXPECT_FALSE(refined.eliminated_chain.empty());
    for (auto k : refined.eliminated_chain) EXPECT_EQ(res.f_opt(static_cast<Eigen::Index>(k)), 0.0);
  }
  EXPECT_GT(boundary, 0);
}

TEST(GridOracle, Example2) {
  const auto r = normalize(test::example2());
  const auto grid = grid_oracle(r, 200);
  const double h = 1.0 / 200.0;
  EXPECT_LE((grid.f_best - kExample2Opt).cwiseAbs().maxCoeff(), h);
  EXPECT_LE(grid.twr_best, optimize(r).twr_value + 1e-12);
}

TEST(GridOracle, TinyLattice) {
  const auto r = normalize(test::example2());
  const auto grid = grid_oracle(r, 2);
  // Lattice {0, 0.5, 1}^2 intersected with G; brute force over the 9 points.
  double best = -1.0;
  for (int a = 0; a <= 2; ++a) {
    for (int b = 0; b <= 2; ++b) {
      const Vector f = vec({0.5 * a, 0.5 * b});
      if (classify(r, f).kind == Admissibility::Outside) continue;
      best = std::max(best, twr(r, f));
    }
  }
  EXPECT_EQ(grid.twr_best, best);
  EXPECT_LE(grid.points_in_domain, 9u);
}

TEST(GridOracle, ThreadCountDoesNotChangeResult) {
  const auto r = normalize(test::example1());
  const auto one = grid_oracle(r, 20, 1);
  const auto four = grid_oracle(r, 20, 4);
  EXPECT_EQ(one.f_best, four.f_best);
  EXPECT_EQ(one.twr_best, four.twr_best);
  EXPECT_EQ(one.points_in_domain, four.points_in_domain);
}

TEST(GridOracle, Errors) {
  Matrix t = Matrix::Identity(6, 5) - Matrix::Constant(6, 5, 0.5);
  EXPECT_EQ(error_code([&] { grid_oracle(normalize(ReturnMatrix(t)), 10); }),
            Errc::TooManySystems);
  EXPECT_EQ(error_code([&] { grid_oracle(normalize(test::example2()), 1); }),
            Errc::InvalidArgument);
}
