#include <doctest.h>

#include <cmath>
#include <random>

#include "sensflow/discretize.hpp"
#include "sensflow/fpcs.hpp"
#include "sensflow/linear.hpp"

using namespace sensflow;

namespace {

Vec vec1(double x) {
  Vec v(1);
  v << x;
  return v;
}

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

std::vector<Vec> zero_V(int dim, int K) {
  return std::vector<Vec>(K, Vec::Zero(dim));
}

PwlConvexFunction random_pwl(std::mt19937_64& rng, int dim, int pieces) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  PwlConvexFunction phi;
  phi.dimension = dim;
  for (int i = 0; i < pieces; ++i) {
    PwlPiece p;
    p.mu = Vec(dim);
    for (int d = 0; d < dim; ++d) p.mu(d) = gauss(rng);
    p.b = 0.3 * gauss(rng);
    phi.pieces.push_back(std::move(p));
  }
  return phi;
}

}  // namespace

TEST_CASE("zero field and zero perturbation keep z constant") {
  const DiscreteTrajectory traj =
      discrete_trajectory(zero_field(2), vec2(1, 2), zero_V(2, 5), 5);
  for (const Vec& z : traj.states) {
    CHECK(z(0) == doctest::Approx(1.0));
    CHECK(z(1) == doctest::Approx(2.0));
  }
}

TEST_CASE("linear recursion gives z(k) = (I + A)^k z0") {
  Mat A(2, 2);
  A << -0.3, 0.1, 0.0, -0.5;
  const int K = 8;
  const DiscreteTrajectory traj =
      discrete_trajectory(linear_field(A), vec2(1, -1), zero_V(2, K), K);
  Mat P = Mat::Identity(2, 2) + A;
  Vec expected = vec2(1, -1);
  for (int k = 1; k <= K; ++k) {
    expected = P * expected;
    CHECK((traj.states[k] - expected).norm() < 1e-12);
  }
}

TEST_CASE("|x| descends in unit steps then oscillates at the kink") {
  const DiscreteTrajectory traj =
      discrete_trajectory(fpcs_field(abs_value_pwl()), vec1(2.5), zero_V(1, 8), 8);
  CHECK(traj.states[0](0) == doctest::Approx(2.5));
  CHECK(traj.states[1](0) == doctest::Approx(1.5));
  CHECK(traj.states[2](0) == doctest::Approx(0.5));
  for (int k = 3; k <= 8; ++k) {
    CHECK(std::abs(traj.states[k](0)) <= 0.5 + 1e-12);
  }
}

TEST_CASE("embedding matches the discrete states exactly at integer times") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 3);
    const PwlConvexFunction phi = random_pwl(rng, dim, 3 + static_cast<int>(rng() % 4));
    const int K = 5 + static_cast<int>(rng() % 15);
    std::vector<Vec> V;
    for (int k = 0; k < K; ++k) {
      Vec v(dim);
      for (int d = 0; d < dim; ++d) v(d) = gauss(rng);
      V.push_back(v * unit(rng));
    }
    Vec z0(dim);
    for (int d = 0; d < dim; ++d) z0(d) = 2.0 * gauss(rng);

    const DiscreteTrajectory traj = discrete_trajectory(fpcs_field(phi), z0, V, K);
    const Embedding emb = embed_continuous(traj);

    // Reconstruct xtilde(k) through the integral identity and compare.
    double max_z = 0.0, max_mu = 0.0, max_v = 0.0;
    Vec drift_sum = Vec::Zero(dim);
    for (int k = 0; k <= K; ++k) {
      const Vec xk = z0 + drift_sum + emb.U.evaluate(static_cast<double>(k));
      worst_gap = std::max(worst_gap, (xk - traj.states[k]).norm() /
                                          (1.0 + traj.states[k].norm()));
      max_z = std::max(max_z, traj.states[k].norm());
      if (k < K) {
        drift_sum += traj.drifts[k];
        max_mu = std::max(max_mu, traj.drifts[k].norm());
        max_v = std::max(max_v, traj.perturbations[k].norm());
      }
    }
    // Embedded perturbation magnitude bound, checked on every embedding.
    CHECK(emb.sup_U <= max_mu + max_v + 1e-12);
    // The reported sup is attained: sample the sawtooth densely.
    double observed = 0.0;
    for (double t = 0.0; t <= K; t += 0.01) {
      observed = std::max(observed, emb.U.evaluate(t).norm());
    }
    CHECK(observed <= emb.sup_U + 1e-9);
  }
  CHECK(worst_gap <= 1e-12);
}

TEST_CASE("embedded sawtooth for a constant field with zero V") {
  const Vec c = vec2(0.4, -0.2);
  const int K = 4;
  const DiscreteTrajectory traj =
      discrete_trajectory(constant_field(c), vec2(0, 0), zero_V(2, K), K);
  const Embedding emb = embed_continuous(traj);
  // U(t) = -(t - floor(t)) c, so sup ||U|| approaches ||c||.
  CHECK((emb.U.evaluate(2.25) + 0.25 * c).norm() < 1e-12);
  CHECK((emb.U.evaluate(3.0)).norm() < 1e-12);
  CHECK(emb.sup_U == doctest::Approx(c.norm()));
}

TEST_CASE("K = 0 edge: empty embedding with zero perturbation") {
  DiscreteTrajectory traj;
  traj.states.push_back(vec2(1, 2));
  const Embedding emb = embed_continuous(traj);
  CHECK(emb.path.size() == 1);
  CHECK(emb.U.evaluate(0.0).norm() == doctest::Approx(0.0));
  CHECK(emb.sup_U == doctest::Approx(0.0));
}

TEST_CASE("discrete bound check") {
  SUBCASE("constant field with zero V matches the continuous flow exactly") {
    const Vec c = vec1(0.5);
    const int K = 6;
    const DiscreteTrajectory traj =
        discrete_trajectory(constant_field(c), vec1(0.0), zero_V(1, K), K);
    const Trajectory cont = integrate_perturbed(constant_field(c), vec1(0.0),
                                                zero_signal(1), K, 0.5);
    const DiscreteBoundCheck check = check_discrete_bound(1.0, cont, traj);
    CHECK(check.pass);
    for (double lhs : check.lhs) CHECK(lhs < 1e-12);
  }

  SUBCASE("symmetric SOF systems pass with C = n + 1") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + (trial % 2);
      Mat G(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
      Mat A = -(G * G.transpose());
      A /= 4.0 * std::max(1.0, operator_norm(A));  // keep discrete steps stable
      Vec z0(n);
      for (int i = 0; i < n; ++i) z0(i) = gauss(rng);

      const int K = 12;
      std::vector<Vec> V;
      double max_norm = 0.0;
      for (int k = 0; k < K; ++k) {
        Vec v(n);
        for (int d = 0; d < n; ++d) v(d) = gauss(rng);
        max_norm = std::max(max_norm, v.norm());
        V.push_back(v);
      }
      for (Vec& v : V) v *= 0.5 / max_norm;

      const DiscreteTrajectory traj = discrete_trajectory(linear_field(A), z0, V, K);
      const Trajectory cont = integrate_perturbed(linear_field(A), z0,
                                                  zero_signal(n), K, 1e-3);
      CHECK(check_discrete_bound(n + 1.0, cont, traj).pass);
    }
  }

  SUBCASE("discrete rotary runs break small constants") {
    // (I + A) expands by sqrt(2) per step for the rotation field, so the
    // deviation outruns C (max mu + max V) for C at or below ~1.4.
    Mat A(2, 2);
    A << 0, -1, 1, 0;
    const int K = 40;
    const DiscreteTrajectory traj =
        discrete_trajectory(linear_field(A), vec2(1, 0), zero_V(2, K), K);
    const Trajectory cont =
        integrate_perturbed(linear_field(A), vec2(1, 0), zero_signal(2), K, 1e-3);
    const DiscreteBoundCheck check = check_discrete_bound(1.0, cont, traj);
    CHECK_FALSE(check.pass);
  }
}

TEST_CASE("pairwise discrete deviation obeys the strong bound on symmetric systems") {
  // Two discrete trajectories from the same start differ by at most
  // C (max ||mu - mu'|| + max ||V - V'||) when the base system has strong
  // bounded sensitivity with constant C; symmetric SOF gives C = n + 1.
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + (trial % 2);
    Mat G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
    Mat A = -(G * G.transpose());
    A /= 4.0 * std::max(1.0, operator_norm(A));
    Vec z0(n);
    for (int i = 0; i < n; ++i) z0(i) = gauss(rng);

    const int K = 10;
    auto random_V = [&](double scale) {
      std::vector<Vec> V;
      for (int k = 0; k < K; ++k) {
        Vec v(n);
        for (int d = 0; d < n; ++d) v(d) = scale * gauss(rng);
        V.push_back(v);
      }
      return V;
    };
    const std::vector<Vec> V1 = random_V(0.2);
    const std::vector<Vec> V2 = random_V(0.2);
    const DiscreteTrajectory t1 = discrete_trajectory(linear_field(A), z0, V1, K);
    const DiscreteTrajectory t2 = discrete_trajectory(linear_field(A), z0, V2, K);

    const double C = n + 1.0;
    double max_dmu = 0.0, max_dv = 0.0;  // running maxima over j < k
    for (int k = 0; k <= K; ++k) {
      CHECK((t1.states[k] - t2.states[k]).norm() <= C * (max_dmu + max_dv) + 1e-12);
      if (k < K) {
        max_dmu = std::max(max_dmu, (t1.drifts[k] - t2.drifts[k]).norm());
        max_dv = std::max(max_dv, (V1[k] - V2[k]).norm());
      }
    }
  }
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(discrete_trajectory(zero_field(1), vec1(0), zero_V(1, 2), 0),
                  ArgumentError);
  CHECK_THROWS_AS(discrete_trajectory(zero_field(1), vec1(0), zero_V(1, 1), 5),
                  ArgumentError);
}
