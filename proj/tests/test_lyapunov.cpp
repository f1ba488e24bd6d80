#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lpvsyn/lyapunov.hpp"

using namespace lpvsyn;

namespace {

Matrix random_pd(Rng& rng, int n) {
  Matrix g = gaussian_matrix(rng, n, n);
  return symmetrized(g * g.transpose() + 0.3 * Matrix::Identity(n, n));
}

LpvPlant random_plant(Rng& rng, int n_x, int n_u, int n_p, double scale) {
  std::vector<Matrix> a;
  for (int i = 0; i <= n_p; ++i) a.push_back(scale * gaussian_matrix(rng, n_x, n_x));
  return LpvPlant(std::move(a), gaussian_matrix(rng, n_x, n_u));
}

LpvPlant scalar_plant(double a) {
  return LpvPlant({a * Matrix::Identity(1, 1)}, Matrix::Identity(1, 1));
}

SchedulingMap empty_scheduling() {
  return SchedulingMap::endogenous([](const Vector&) { return Vector(0); }, 0);
}

}  // namespace

TEST_CASE("eval_V basic identities") {
  Rng rng = make_rng(2, "evalv");
  BiquadraticLyapunov identity(Matrix::Identity(6, 6));
  for (int t = 0; t < 10; ++t) {
    const Vector x = gaussian_vector(rng, 2);
    const Vector p = gaussian_vector(rng, 2);
    CHECK(eval_V(identity, x, p) ==
          doctest::Approx((1.0 + p.squaredNorm()) * x.squaredNorm()));
  }
  CHECK(eval_V(identity, Vector::Zero(2), Vector::Ones(2)) == 0.0);
}

TEST_CASE("eval_V equals the blockwise expansion oracle") {
  Rng rng = make_rng(3, "evalv2");
  const int n_x = 2, n_p = 2;
  BiquadraticLyapunov lyap(random_pd(rng, n_x * (1 + n_p)));
  for (int t = 0; t < 20; ++t) {
    const Vector x = gaussian_vector(rng, n_x);
    const Vector p = gaussian_vector(rng, n_p);
    Vector scale(1 + n_p);
    scale(0) = 1.0;
    scale.tail(n_p) = p;
    double expansion = 0.0;
    for (int i = 0; i <= n_p; ++i) {
      for (int j = 0; j <= n_p; ++j) {
        expansion += scale(i) * scale(j) *
                     x.dot(lyap.P().block(i * n_x, j * n_x, n_x, n_x) * x);
      }
    }
    CHECK(eval_V(lyap, x, p) == doctest::Approx(expansion).epsilon(1e-10));
  }
}

TEST_CASE("construction rejects indefinite P and mismatched dims") {
  CHECK_THROWS_AS(BiquadraticLyapunov(-Matrix::Identity(2, 2)), std::invalid_argument);
  BiquadraticLyapunov lyap(Matrix::Identity(4, 4));
  CHECK_THROWS_AS(eval_V(lyap, Vector::Ones(3), Vector::Ones(1)), std::invalid_argument);
}

TEST_CASE("scalar decrease verdicts") {
  BiquadraticLyapunov unit(Matrix::Identity(1, 1));
  auto zero_gain = AffineGain::zero(1, 1, 0);
  auto stable = decrease_lmi(scalar_plant(0.5), zero_gain, unit, Vector(0));
  CHECK(stable.holds);
  auto unstable = decrease_lmi(scalar_plant(1.5), zero_gain, unit, Vector(0));
  CHECK_FALSE(unstable.holds);
}

TEST_CASE("the three decrease forms give identical verdicts") {
  Rng rng = make_rng(12, "forms");
  int holds_count = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n_x = 2, n_u = 1, n_p = 1;
    const int s = n_x * (1 + n_p);
    // Alternate between strongly contracting and expanding plants so both
    // verdicts occur.
    const double scale = trial % 2 == 0 ? 0.05 : 0.6;
    const auto plant = random_plant(rng, n_x, n_u, n_p, scale);
    std::vector<Matrix> k;
    for (int i = 0; i <= n_p; ++i) k.push_back(scale * gaussian_matrix(rng, n_u, n_x));
    AffineGain gain(k);
    Matrix g = gaussian_matrix(rng, s, s);
    BiquadraticLyapunov lyap(
        symmetrized(Matrix::Identity(s, s) + 0.1 * symmetrized(g)));
    const Vector p_next = gaussian_vector(rng, n_p);

    const Matrix coupled = lift_scheduling(p_next, n_x) * closed_loop_matrix(plant, gain);
    const Matrix p_inv = lyap.P_inverse();
    // Dual form.
    const bool dual = is_positive_definite(
        symmetrized(p_inv - coupled * p_inv * coupled.transpose()));
    // Primal form.
    const bool primal = is_positive_definite(
        symmetrized(lyap.P() - coupled.transpose() * lyap.P() * coupled));
    // Coupled block form.
    const auto block = decrease_lmi(plant, gain, lyap, p_next);
    CHECK(dual == block.holds);
    CHECK(primal == block.holds);
    holds_count += block.holds;
  }
  // The scale is chosen so both verdicts actually occur.
  CHECK(holds_count > 5);
  CHECK(holds_count < 55);
}

TEST_CASE("polytope check: certified case and unstable open loop") {
  auto ex = example_plant(5.0);
  BiquadraticLyapunov identity(Matrix::Identity(6, 6));
  auto report = check_decrease_on_polytope(ex.plant, AffineGain::zero(2, 2, 2), identity,
                                           ex.polytope);
  CHECK_FALSE(report.holds);
  CHECK(report.worst_vertex >= 0);
  CHECK(report.worst_margin < 0.0);
}

TEST_CASE("polytope check reduces to a single LTI inequality for n_p = 0") {
  SchedulingPolytope point({Vector(0)});
  BiquadraticLyapunov unit(Matrix::Identity(1, 1));
  auto stable = check_decrease_on_polytope(scalar_plant(0.5), AffineGain::zero(1, 1, 0), unit,
                                           point);
  CHECK(stable.holds);
  auto unstable = check_decrease_on_polytope(scalar_plant(1.5), AffineGain::zero(1, 1, 0), unit,
                                             point);
  CHECK_FALSE(unstable.holds);
}

TEST_CASE("trajectory audit counts strict-decrease failures") {
  BiquadraticLyapunov unit(Matrix::Identity(1, 1));
  auto stable_traj = simulate(scalar_plant(0.5), InputSource::zero(1), empty_scheduling(),
                              DisturbanceSource::zero(1), Vector::Ones(1), 15);
  CHECK(trajectory_decrease_audit(stable_traj, unit).clean());

  auto unstable_traj = simulate(scalar_plant(1.5), InputSource::zero(1), empty_scheduling(),
                                DisturbanceSource::zero(1), Vector::Ones(1), 10);
  CHECK_FALSE(trajectory_decrease_audit(unstable_traj, unit).clean());

  auto noisy = simulate(scalar_plant(0.5), InputSource::zero(1), empty_scheduling(),
                        DisturbanceSource::uniform(1, 0.1, 3), Vector::Ones(1), 5);
  CHECK_THROWS_AS(trajectory_decrease_audit(noisy, unit), std::invalid_argument);
}

TEST_CASE("lifted-state identity along simulated steps") {
  Rng rng = make_rng(19, "lifted");
  auto ex = example_plant(1.0);
  std::vector<Matrix> k;
  for (int i = 0; i <= 2; ++i) k.push_back(0.05 * gaussian_matrix(rng, 2, 2));
  AffineGain gain(k);
  BiquadraticLyapunov lyap(random_pd(rng, 6));
  auto traj = simulate(ex.plant, gain, ex.scheduling, DisturbanceSource::zero(2),
                       gaussian_vector(rng, 2), 6);
  for (int step = 0; step + 1 < traj.steps(); ++step) {
    const Vector xi = lift_scheduling(traj.p.col(step), 2) * traj.x.col(step);
    const Matrix m = lift_scheduling(traj.p.col(step + 1), 2) * closed_loop_matrix(ex.plant, gain);
    const Vector xi_next = m * xi;
    const double via_map = xi_next.dot(lyap.P() * xi_next);
    const double direct = eval_V(lyap, traj.x.col(step + 1), traj.p.col(step + 1));
    CHECK(via_map == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("polytope certificate implies clean audits on noise-free trajectories") {
  // A strongly contracting plant with small gains certifies easily; every
  // noise-free closed loop inside the box must then decrease monotonically.
  Rng rng = make_rng(23, "cert-audit");
  std::vector<Matrix> a{0.3 * Matrix::Identity(2, 2), 0.03 * gaussian_matrix(rng, 2, 2)};
  LpvPlant plant(a, gaussian_matrix(rng, 2, 1));
  AffineGain gain = AffineGain::zero(1, 2, 1);
  BiquadraticLyapunov lyap(Matrix::Identity(4, 4));
  auto box = SchedulingPolytope::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  auto report = check_decrease_on_polytope(plant, gain, lyap, box);
  REQUIRE(report.holds);

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SchedulingPoint> ps;
    Rng prng = make_rng(100 + static_cast<std::uint64_t>(trial), "ps");
    for (int k = 0; k < 12; ++k) ps.push_back(uniform_vector(prng, 1, -1.0, 1.0));
    auto traj = simulate(plant, gain, SchedulingMap::exogenous(ps), DisturbanceSource::zero(2),
                         gaussian_vector(prng, 2), 12);
    CHECK(trajectory_decrease_audit(traj, lyap).clean());
  }
}
