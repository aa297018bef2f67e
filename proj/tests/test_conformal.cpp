#include <catch_amalgamated.hpp>

#include <cmath>

#include "rigidity/catalog.hpp"
#include "rigidity/conformal.hpp"
#include "rigidity/rng.hpp"

using namespace rigidity;
using Catch::Approx;

namespace {

Matrix random_orthogonal(int d, Rng& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  return Eigen::HouseholderQR<Matrix>(g).householderQ();
}

/// U diag(e^{s_i}) V with s_i uniform in [-1, 1]: condition number at most e^2.
Matrix random_matrix(int d, Rng& rng) {
  Vector s(d);
  for (int i = 0; i < d; ++i) s(i) = std::exp(rng.uniform(-1.0, 1.0));
  return random_orthogonal(d, rng) * s.asDiagonal() * random_orthogonal(d, rng);
}

ConformalStructure random_structure(int d, Rng& rng) {
  const Matrix b = random_matrix(d, rng);
  return ConformalStructure::normalize(b.transpose() * b);
}

double gap(const ConformalStructure& a, const ConformalStructure& b) { return (a.form() - b.form()).norm(); }

}  // namespace

TEST_CASE("structure validation") {
  CHECK_THROWS_AS(ConformalStructure(catalog::diag2(2.0, 2.0)), Error);  // det 4
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(ConformalStructure(asym), Error);
  CHECK_THROWS_AS(ConformalStructure(catalog::diag2(-1.0, -1.0)), Error);
  CHECK_NOTHROW(ConformalStructure(catalog::diag2(4.0, 0.25)));
}

TEST_CASE("push examples") {
  const ConformalStructure id = ConformalStructure::identity(2);
  CHECK(gap(push(catalog::rotation(0.8), id), id) < 1e-14);
  CHECK(gap(push(catalog::diag2(2.0, 0.5), id), ConformalStructure(catalog::diag2(4.0, 0.25))) < 1e-14);
  Rng rng(1);
  const Matrix b = random_matrix(2, rng);
  const ConformalStructure eta = random_structure(2, rng);
  CHECK(gap(push(3.0 * b, eta), push(b, eta)) < 1e-12);
}

TEST_CASE("pull examples") {
  const ConformalStructure id = ConformalStructure::identity(2);
  CHECK(gap(pull(catalog::diag2(2.0, 0.5), id), ConformalStructure(catalog::diag2(0.25, 4.0))) < 1e-14);
  Rng rng(2);
  for (int d = 2; d <= 4; ++d) {
    const Matrix b = random_matrix(d, rng);
    const ConformalStructure eta = random_structure(d, rng);
    CHECK(gap(pull(b, push(b, eta)), eta) < 1e-12 * std::max(1.0, eta.form().norm()));
    CHECK(gap(pull(Matrix::Identity(d, d), eta), eta) < 1e-14 * eta.form().norm());
  }
}

TEST_CASE("push and pull are functorial") {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const int d = rng.range(2, 4);
    const Matrix a = random_matrix(d, rng), b = random_matrix(d, rng);
    const ConformalStructure eta = random_structure(d, rng);
    const double scale = std::max(1.0, pull(a * b, eta).form().norm());
    REQUIRE(gap(pull(a * b, eta), pull(a, pull(b, eta))) <= 1e-10 * scale);
    REQUIRE(gap(push(a, push(b, eta)), push(b * a, eta)) <= 1e-10 * std::max(1.0, push(b * a, eta).form().norm()));
    REQUIRE(gap(pull(a, eta), push(a.inverse(), eta)) <= 1e-10 * scale);
  }
}

TEST_CASE("distance examples") {
  const ConformalStructure id = ConformalStructure::identity(2);
  CHECK(distance(id, id) == 0.0);
  const double e = std::exp(1.0);
  CHECK(distance(id, ConformalStructure(catalog::diag2(e, 1 / e))) == Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("distance is a metric on random triples") {
  Rng rng(4);
  for (int t = 0; t < 10000; ++t) {
    const int d = rng.range(2, 4);
    const ConformalStructure a = random_structure(d, rng), b = random_structure(d, rng), c = random_structure(d, rng);
    const double ab = distance(a, b), bc = distance(b, c), ac = distance(a, c);
    REQUIRE(ac <= ab + bc + 1e-10);
    REQUIRE(ab == Approx(distance(b, a)).margin(1e-9));
    REQUIRE(ab >= 0.0);
  }
}

TEST_CASE("the action is isometric") {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const int d = rng.range(2, 4);
    const Matrix b = random_matrix(d, rng);
    const ConformalStructure x = random_structure(d, rng), y = random_structure(d, rng);
    REQUIRE(std::abs(distance(push(b, x), push(b, y)) - distance(x, y)) <= 1e-10 * std::max(1.0, distance(x, y)));
  }
}

TEST_CASE("geodesic midpoint is halfway") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const ConformalStructure a = random_structure(3, rng), b = random_structure(3, rng);
    const ConformalStructure m = geodesic_midpoint(a, b);
    const double ab = distance(a, b);
    REQUIRE(distance(a, m) == Approx(ab / 2).margin(1e-9));
    REQUIRE(distance(m, b) == Approx(ab / 2).margin(1e-9));
  }
}

TEST_CASE("karcher mean examples") {
  Rng rng(7);
  const ConformalStructure eta = random_structure(3, rng);
  CHECK(gap(karcher_mean({eta}), eta) < 1e-12);
  CHECK(gap(karcher_mean({eta, eta}), eta) < 1e-12);
  const double e = std::exp(1.0);
  const ConformalStructure m =
      karcher_mean({ConformalStructure(catalog::diag2(e, 1 / e)), ConformalStructure(catalog::diag2(1 / e, e))});
  CHECK(gap(m, ConformalStructure::identity(2)) < 1e-12);
  CHECK_THROWS_AS(karcher_mean({}), Error);
  CHECK_THROWS_AS(karcher_mean({eta}, {0.0}), Error);
}

TEST_CASE("karcher mean is equivariant and minimizes") {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const int d = rng.range(2, 4);
    std::vector<ConformalStructure> pts;
    std::vector<double> w;
    for (int i = rng.range(2, 5); i > 0; --i) {
      pts.push_back(random_structure(d, rng));
      w.push_back(0.5 + rng.uniform());
    }
    const ConformalStructure m = karcher_mean(pts, w);
    const Matrix b = random_matrix(d, rng);
    std::vector<ConformalStructure> moved;
    for (const auto& p : pts) moved.push_back(push(b, p));
    const ConformalStructure pm = push(b, m);
    REQUIRE(gap(karcher_mean(moved, w), pm) <= 1e-8 * std::max(1.0, pm.form().norm()));
    // nudging the mean along any geodesic never lowers the weighted energy
    auto energy = [&](const ConformalStructure& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) s += w[i] * std::pow(distance(x, pts[i]), 2);
      return s;
    };
    const double e0 = energy(m);
    for (const auto& p : pts) REQUIRE(energy(geodesic(m, p, 0.01)) >= e0 - 1e-9);
  }
}

TEST_CASE("elliptic solver examples") {
  const ConformalStructure id = ConformalStructure::identity(2);
  CHECK(gap(invariant_structure_elliptic(catalog::rotation(1.0)), id) < 1e-14);
  const Matrix s = catalog::shear();
  const Matrix m = s * catalog::rotation(1.0) * s.inverse();
  const ConformalStructure eta = invariant_structure_elliptic(m);
  const ConformalStructure oracle = ConformalStructure::normalize(s.inverse().transpose() * s.inverse());
  CHECK(gap(eta, oracle) < 1e-9);
  CHECK(distance(pull(m, eta), eta) <= 1e-12);
  // substitution: M^T eta M = eta
  CHECK((m.transpose() * oracle.form() * m - oracle.form()).norm() < 1e-12);
  CHECK_THROWS_MATCHES(invariant_structure_elliptic(catalog::diag2(2.0, 0.5)), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::NotElliptic;
                       }));
}

TEST_CASE("invariant structures bound the power distortion") {
  Rng rng(9);
  for (int t = 0; t < 40; ++t) {
    const int d = rng.range(2, 4);
    // conjugate of a block rotation, with a +1 block in odd dimension; the
    // midpoint iteration contracts like cos of the angles and their
    // differences, so those stay away from 0 and pi
    Matrix r = Matrix::Identity(d, d);
    const double a1 = rng.uniform(0.3, 1.4), a2 = a1 + rng.uniform(0.6, 1.3);
    r.block(0, 0, 2, 2) = catalog::rotation(a1);
    if (d == 4) r.block(2, 2, 2, 2) = catalog::rotation(a2);
    const Matrix p = random_matrix(d, rng);
    const Matrix m = p * r * p.inverse();
    if (power_distortion(m) >= kEllipticBound) continue;
    const ConformalStructure eta = invariant_structure_elliptic(m, 1e-10);
    REQUIRE(distance(pull(m, eta), eta) <= 1e-10);
    const double c = eta.comparison_constant();
    REQUIRE(power_distortion(m) <= std::pow(c, 4) * (1 + 1e-8));
  }
}
