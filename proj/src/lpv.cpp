#include "lpvsyn/lpv.hpp"

#include <cmath>

namespace lpvsyn {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Lawson-Hanson nonnegative least squares: min ||A l - b|| s.t. l >= 0.
Vector nnls(const Matrix& a, const Vector& b, int max_iter) {
  const int n = static_cast<int>(a.cols());
  Vector lambda = Vector::Zero(n);
  std::vector<bool> passive(n, false);
  Vector w = a.transpose() * (b - a * lambda);
  const double tol = 1e-12 * (1.0 + b.norm()) * (1.0 + a.norm());

  for (int iter = 0; iter < max_iter; ++iter) {
    int j = -1;
    double best = tol;
    for (int i = 0; i < n; ++i) {
      if (!passive[i] && w(i) > best) {
        best = w(i);
        j = i;
      }
    }
    if (j < 0) break;
    passive[j] = true;

    while (true) {
      std::vector<int> idx;
      for (int i = 0; i < n; ++i) {
        if (passive[i]) idx.push_back(i);
      }
      Matrix ap(a.rows(), idx.size());
      for (std::size_t c = 0; c < idx.size(); ++c) ap.col(c) = a.col(idx[c]);
      Vector s_p = ap.colPivHouseholderQr().solve(b);

      if (s_p.minCoeff() > 0.0) {
        lambda.setZero();
        for (std::size_t c = 0; c < idx.size(); ++c) lambda(idx[c]) = s_p(c);
        break;
      }
      double alpha = 1.0;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        if (s_p(c) <= 0.0) {
          const double li = lambda(idx[c]);
          alpha = std::min(alpha, li / (li - s_p(c)));
        }
      }
      for (std::size_t c = 0; c < idx.size(); ++c) {
        lambda(idx[c]) += alpha * (s_p(c) - lambda(idx[c]));
        if (lambda(idx[c]) <= 1e-14) {
          lambda(idx[c]) = 0.0;
          passive[idx[c]] = false;
        }
      }
    }
    w = a.transpose() * (b - a * lambda);
  }
  return lambda;
}

}  // namespace

SchedulingPolytope::SchedulingPolytope(std::vector<SchedulingPoint> vertices)
    : vertices_(std::move(vertices)) {
  require(!vertices_.empty(), "SchedulingPolytope: vertex list must be nonempty");
  const Eigen::Index np = vertices_.front().size();
  for (const auto& v : vertices_) {
    require(v.size() == np, "SchedulingPolytope: vertices must share a common dimension");
    require(v.allFinite(), "SchedulingPolytope: vertices must be finite");
  }
}

SchedulingPolytope SchedulingPolytope::box(const Vector& lo, const Vector& hi) {
  require(lo.size() == hi.size(), "SchedulingPolytope::box: bound dimensions differ");
  const int np = static_cast<int>(lo.size());
  require((lo.array() <= hi.array()).all(), "SchedulingPolytope::box: lo must not exceed hi");
  std::vector<SchedulingPoint> vertices;
  vertices.reserve(std::size_t{1} << np);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << np); ++mask) {
    Vector v(np);
    for (int i = 0; i < np; ++i) v(i) = (mask >> i) & 1 ? hi(i) : lo(i);
    vertices.push_back(std::move(v));
  }
  return SchedulingPolytope(std::move(vertices));
}

bool SchedulingPolytope::contains(const SchedulingPoint& p, double tol) const {
  require(p.size() == dim(), "SchedulingPolytope::contains: dimension mismatch");
  const int np = dim();
  const int nv = vertex_count();
  // Convex-combination feasibility as NNLS on [V; 1^T] lambda = [p; 1].
  Matrix a(np + 1, nv);
  for (int j = 0; j < nv; ++j) {
    a.col(j).head(np) = vertices_[static_cast<std::size_t>(j)];
    a(np, j) = 1.0;
  }
  Vector b(np + 1);
  b.head(np) = p;
  b(np) = 1.0;
  Vector lambda = nnls(a, b, 4 * nv + 16);
  return (a * lambda - b).norm() <= tol * (1.0 + b.norm());
}

SchedulingPoint SchedulingPolytope::sample_interior(Rng& rng) const {
  std::exponential_distribution<double> exp1(1.0);
  Vector weights(vertex_count());
  for (int i = 0; i < vertex_count(); ++i) weights(i) = exp1(rng);
  weights /= weights.sum();
  SchedulingPoint p = Vector::Zero(dim());
  for (int i = 0; i < vertex_count(); ++i) p += weights(i) * vertices_[static_cast<std::size_t>(i)];
  return p;
}

LpvPlant::LpvPlant(std::vector<Matrix> a_coeffs, Matrix b) : a_(std::move(a_coeffs)), b_(std::move(b)) {
  require(!a_.empty(), "LpvPlant: coefficient list must contain at least A_0");
  const Eigen::Index nx = a_.front().rows();
  for (const auto& ai : a_) {
    require(ai.rows() == nx && ai.cols() == nx, "LpvPlant: all A_i must be square of common size");
  }
  require(b_.rows() == nx, "LpvPlant: B must have n_x rows");
}

Matrix LpvPlant::stacked_A() const {
  Matrix s(n_x(), n_x() * (1 + n_p()));
  for (int i = 0; i <= n_p(); ++i) s.middleCols(i * n_x(), n_x()) = a_[static_cast<std::size_t>(i)];
  return s;
}

LpvPlant LpvPlant::from_system_matrix(const Matrix& ab, int n_x, int n_u, int n_p) {
  require(ab.rows() == n_x && ab.cols() == n_x * (1 + n_p) + n_u,
          "LpvPlant::from_system_matrix: shape mismatch");
  std::vector<Matrix> a;
  a.reserve(static_cast<std::size_t>(n_p) + 1);
  for (int i = 0; i <= n_p; ++i) a.push_back(ab.middleCols(i * n_x, n_x));
  return LpvPlant(std::move(a), ab.rightCols(n_u));
}

AffineGain::AffineGain(std::vector<Matrix> k_coeffs) : k_(std::move(k_coeffs)) {
  require(!k_.empty(), "AffineGain: coefficient list must contain at least K_0");
  const Eigen::Index nu = k_.front().rows();
  const Eigen::Index nx = k_.front().cols();
  for (const auto& ki : k_) {
    require(ki.rows() == nu && ki.cols() == nx, "AffineGain: all K_i must share shape");
  }
}

AffineGain AffineGain::zero(int n_u, int n_x, int n_p) {
  std::vector<Matrix> k(static_cast<std::size_t>(n_p) + 1, Matrix::Zero(n_u, n_x));
  return AffineGain(std::move(k));
}

AffineGain AffineGain::from_stacked(const Matrix& stacked, int n_x) {
  require(n_x > 0 && stacked.cols() % n_x == 0, "AffineGain::from_stacked: width not a multiple of n_x");
  const int blocks = static_cast<int>(stacked.cols()) / n_x;
  std::vector<Matrix> k;
  k.reserve(static_cast<std::size_t>(blocks));
  for (int i = 0; i < blocks; ++i) k.push_back(stacked.middleCols(i * n_x, n_x));
  return AffineGain(std::move(k));
}

Matrix AffineGain::stacked() const {
  Matrix s(n_u(), n_x() * (1 + n_p()));
  for (int i = 0; i <= n_p(); ++i) s.middleCols(i * n_x(), n_x()) = k_[static_cast<std::size_t>(i)];
  return s;
}

Matrix AffineGain::eval(const SchedulingPoint& p) const {
  require(p.size() == n_p(), "AffineGain::eval: scheduling dimension mismatch");
  Matrix k = k_[0];
  for (int i = 1; i <= n_p(); ++i) k += p(i - 1) * k_[static_cast<std::size_t>(i)];
  return k;
}

Matrix lift_scheduling(const SchedulingPoint& p, int n_x) {
  const int np = static_cast<int>(p.size());
  Matrix l = Matrix::Zero(n_x * (1 + np), n_x);
  l.topRows(n_x) = Matrix::Identity(n_x, n_x);
  for (int i = 0; i < np; ++i) {
    l.middleRows((i + 1) * n_x, n_x) = p(i) * Matrix::Identity(n_x, n_x);
  }
  return l;
}

Matrix eval_A(const LpvPlant& plant, const SchedulingPoint& p) {
  require(p.size() == plant.n_p(), "eval_A: scheduling dimension mismatch");
  Matrix a = plant.A(0);
  for (int i = 1; i <= plant.n_p(); ++i) a += p(i - 1) * plant.A(i);
  return a;
}

Matrix closed_loop_matrix(const LpvPlant& plant, const AffineGain& gain) {
  require(gain.n_x() == plant.n_x() && gain.n_u() == plant.n_u() && gain.n_p() == plant.n_p(),
          "closed_loop_matrix: gain dimensions do not match plant");
  return plant.stacked_A() + plant.B() * gain.stacked();
}

SchedulingMap SchedulingMap::endogenous(std::function<SchedulingPoint(const Vector&)> psi, int n_p) {
  SchedulingMap m;
  m.psi_ = std::move(psi);
  m.n_p_ = n_p;
  return m;
}

SchedulingMap SchedulingMap::exogenous(std::vector<SchedulingPoint> sequence) {
  require(!sequence.empty(), "SchedulingMap::exogenous: sequence must be nonempty");
  SchedulingMap m;
  m.n_p_ = static_cast<int>(sequence.front().size());
  m.sequence_ = std::move(sequence);
  return m;
}

SchedulingPoint SchedulingMap::at(int k, const Vector& x) const {
  if (psi_) {
    SchedulingPoint p = psi_(x);
    if (p.size() != n_p_) {
      throw std::invalid_argument("SchedulingMap: map output dimension mismatch");
    }
    return p;
  }
  if (k < 0 || k >= static_cast<int>(sequence_.size())) {
    throw std::invalid_argument("SchedulingMap: exogenous sequence shorter than requested step");
  }
  return sequence_[static_cast<std::size_t>(k)];
}

DisturbanceSource DisturbanceSource::zero(int n_x) {
  DisturbanceSource d;
  d.n_x_ = n_x;
  return d;
}

DisturbanceSource DisturbanceSource::uniform(int n_x, double w_max, std::uint64_t seed) {
  require(w_max >= 0.0, "DisturbanceSource::uniform: w_max must be nonnegative");
  DisturbanceSource d;
  d.n_x_ = n_x;
  d.w_max_ = w_max;
  d.seed_ = seed;
  d.is_uniform_ = true;
  return d;
}

DisturbanceSource DisturbanceSource::replay(Matrix w_columns) {
  DisturbanceSource d;
  d.n_x_ = static_cast<int>(w_columns.rows());
  d.replay_ = std::move(w_columns);
  return d;
}

Vector DisturbanceSource::at(int k) const {
  if (replay_) {
    require(k >= 0 && k < replay_->cols(), "DisturbanceSource: replay record shorter than step");
    return replay_->col(k);
  }
  if (!is_uniform_ || w_max_ == 0.0) return Vector::Zero(n_x_);
  Rng rng = make_rng(seed_, "disturbance", static_cast<std::uint64_t>(k));
  return uniform_vector(rng, n_x_, -w_max_, w_max_);
}

InputSource InputSource::zero(int n_u) {
  InputSource s;
  s.n_u_ = n_u;
  return s;
}

InputSource InputSource::gaussian(int n_u, double stddev, std::uint64_t seed) {
  InputSource s;
  s.n_u_ = n_u;
  s.stddev_ = stddev;
  s.seed_ = seed;
  s.is_gaussian_ = true;
  return s;
}

InputSource InputSource::replay(Matrix u_columns) {
  InputSource s;
  s.n_u_ = static_cast<int>(u_columns.rows());
  s.replay_ = std::move(u_columns);
  return s;
}

Vector InputSource::at(int k) const {
  if (replay_) {
    require(k >= 0 && k < replay_->cols(), "InputSource: replay record shorter than step");
    return replay_->col(k);
  }
  if (!is_gaussian_ || stddev_ == 0.0) return Vector::Zero(n_u_);
  Rng rng = make_rng(seed_, "input", static_cast<std::uint64_t>(k));
  return gaussian_vector(rng, n_u_, stddev_);
}

void Trajectory::validate() const {
  const int n = steps();
  require(x.cols() == n + 1, "Trajectory: x must have one more sample than u");
  require(p.cols() == n && w.cols() == n, "Trajectory: u, p, w must share length");
  require(w.rows() == x.rows(), "Trajectory: disturbance dimension must equal state dimension");
}

namespace {

Trajectory simulate_impl(const LpvPlant& plant, const AffineGain* gain, const InputSource* inputs,
                         const SchedulingMap& scheduling, const DisturbanceSource& noise,
                         const Vector& x0, int steps) {
  require(steps >= 1, "simulate: step count must be at least 1");
  require(x0.size() == plant.n_x(), "simulate: initial state dimension mismatch");
  require(scheduling.n_p() == plant.n_p(), "simulate: scheduling dimension mismatch");
  require(noise.n_x() == plant.n_x(), "simulate: disturbance dimension mismatch");

  Trajectory traj;
  traj.x.resize(plant.n_x(), steps + 1);
  traj.u.resize(plant.n_u(), steps);
  traj.p.resize(plant.n_p(), steps);
  traj.w.resize(plant.n_x(), steps);
  traj.x.col(0) = x0;

  for (int k = 0; k < steps; ++k) {
    const Vector xk = traj.x.col(k);
    const SchedulingPoint pk = scheduling.at(k, xk);
    const Vector uk = gain ? Vector(gain->eval(pk) * xk) : inputs->at(k);
    require(uk.size() == plant.n_u(), "simulate: input dimension mismatch");
    const Vector wk = noise.at(k);
    const Vector xnext = eval_A(plant, pk) * xk + plant.B() * uk + wk;
    if (!xnext.allFinite()) {
      throw SimulationOverflow(k + 1, "simulate: non-finite state at step " + std::to_string(k + 1));
    }
    traj.u.col(k) = uk;
    traj.p.col(k) = pk;
    traj.w.col(k) = wk;
    traj.x.col(k + 1) = xnext;
  }
  return traj;
}

}  // namespace

Trajectory simulate(const LpvPlant& plant, const AffineGain& gain, const SchedulingMap& scheduling,
                    const DisturbanceSource& noise, const Vector& x0, int steps) {
  return simulate_impl(plant, &gain, nullptr, scheduling, noise, x0, steps);
}

Trajectory simulate(const LpvPlant& plant, const InputSource& inputs,
                    const SchedulingMap& scheduling, const DisturbanceSource& noise,
                    const Vector& x0, int steps) {
  return simulate_impl(plant, nullptr, &inputs, scheduling, noise, x0, steps);
}

ExamplePlant example_plant(double delta) {
  require(delta > 0.0, "example_plant: delta must be positive");
  Matrix a0(2, 2), a1(2, 2), a2(2, 2), b(2, 2);
  a0 << 0.027, -0.138, 0.380, 0.014;
  a1 << 0.449, -0.164, 0.129, -0.257;
  a2 << -0.265, -0.332, -0.090, -0.059;
  b << 0.309, 0.539, -0.570, 0.467;
  LpvPlant plant({a0, a1, a2}, b);

  auto psi = [delta](const Vector& x) {
    Vector p(2);
    p << delta * std::sin(x(0)), delta * std::cos(x(1));
    return p;
  };
  SchedulingMap map = SchedulingMap::endogenous(psi, 2);
  SchedulingPolytope box =
      SchedulingPolytope::box(Vector::Constant(2, -delta), Vector::Constant(2, delta));
  return ExamplePlant{std::move(plant), std::move(map), std::move(box)};
}

}  // namespace lpvsyn
