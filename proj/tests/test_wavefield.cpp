#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lhv/rng.hpp"
#include "lhv/wavefield.hpp"

using namespace lhv;

namespace {

constexpr double pi = std::numbers::pi;

// Independent time-average evaluation of the two beamsplitter outputs from
// the real carrier fields, written from scratch so it shares nothing with
// oracle_difference_real. Mean of the squared field over one period, doubled
// to match the amplitude^2 intensity convention.
std::pair<double, double> time_average_ports(double e, double el, double theta,
                                             int n) {
  double sr = 0.0, st = 0.0;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * pi * (double(k) + 0.5) / double(n);
    const double er = (-e * std::sin(phi) + el * std::cos(phi + theta)) / std::numbers::sqrt2;
    const double et = (e * std::cos(phi) - el * std::sin(phi + theta)) / std::numbers::sqrt2;
    sr += er * er;
    st += et * et;
  }
  return {2.0 * sr / double(n), 2.0 * st / double(n)};
}

}  // namespace

TEST_CASE("reduce_phase maps onto (-pi, pi]") {
  CHECK(reduce_phase(0.0) == 0.0);
  CHECK(reduce_phase(pi) == doctest::Approx(pi));
  CHECK(reduce_phase(-pi) == doctest::Approx(pi));
  CHECK(reduce_phase(3.0 * pi) == doctest::Approx(pi));
  CHECK(reduce_phase(2.0 * pi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(reduce_phase(-0.5 * pi) == doctest::Approx(-0.5 * pi));
  for (int k = -7; k <= 7; ++k) {
    const double base = 0.3;
    const double r = reduce_phase(base + 2.0 * pi * k);
    CHECK(r == doctest::Approx(base).epsilon(1e-12));
    CHECK(r > -pi);
    CHECK(r <= pi);
  }
}

TEST_CASE("FieldPair validates and reduces") {
  CHECK_THROWS_AS(FieldPair(-1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(FieldPair(1.0, -1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(FieldPair(1.0, 1.0, std::nan("")), std::invalid_argument);
  const FieldPair f(1.0, 2.0, 5.0 * pi / 2.0);
  CHECK(f.theta == doctest::Approx(pi / 2.0));
}

TEST_CASE("beamsplitter worked example") {
  // E = 2, E_L = 3, theta = pi/6: i_r = (4 + 9 + 12*0.5)/2, i_t = (13 - 6)/2.
  const FieldPair f(2.0, 3.0, pi / 6.0);
  const auto [ir, it] = beamsplitter_intensities(f);
  CHECK(ir == doctest::Approx(9.5).epsilon(1e-12));
  CHECK(it == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("beamsplitter conserves energy and stays non-negative") {
  RandomStream rng(101);
  for (int i = 0; i < 1000; ++i) {
    const double e = rng.uniform(0.0, 4.0);
    const double el = rng.uniform(0.0, 4.0);
    const double th = rng.uniform_angle();
    const FieldPair f(e, el, th);
    const auto [ir, it] = beamsplitter_intensities(f);
    CHECK(ir >= 0.0);
    CHECK(it >= 0.0);
    CHECK(ir + it == doctest::Approx(e * e + el * el).epsilon(1e-12));
    CHECK(ir - it == doctest::Approx(2.0 * e * el * std::sin(th)).epsilon(1e-12));
  }
}

TEST_CASE("beamsplitter matches the real-field time average") {
  RandomStream rng(55);
  for (int i = 0; i < 200; ++i) {
    const double e = rng.uniform(0.0, 3.0);
    const double el = rng.uniform(0.5, 3.0);
    const double th = rng.uniform_angle();
    const auto [ir, it] = beamsplitter_intensities(FieldPair(e, el, th));
    const auto [or_, ot] = time_average_ports(e, el, th, 64);
    CHECK(ir == doctest::Approx(or_).epsilon(1e-10));
    CHECK(it == doctest::Approx(ot).epsilon(1e-10));
  }
}

TEST_CASE("noise-free homodyne difference is the closed form exactly") {
  RandomStream rng(7);
  for (int i = 0; i < 500; ++i) {
    const double e = rng.uniform(0.0, 3.0);
    const double el = rng.uniform(0.0, 3.0);
    const double th = rng.uniform_angle();
    const double g = rng.uniform(0.1, 5.0);
    RandomStream noise(1);
    const HomodyneReading r = homodyne_difference(FieldPair(e, el, th), g, 0.0, noise);
    CHECK(r.x == g * (2.0 * e * el * std::sin(th)));
    CHECK(r.i_r + r.i_t == doctest::Approx(e * e + el * el).epsilon(1e-12));
  }
}

TEST_CASE("homodyne noise enters as two independent detector draws") {
  const FieldPair f(1.0, 1.5, 0.4);
  RandomStream a(42), b(42);
  const HomodyneReading r = homodyne_difference(f, 2.0, 0.3, a);
  const double n_r = b.gaussian(0.3);
  const double n_t = b.gaussian(0.3);
  CHECK(r.x == doctest::Approx(2.0 * 2.0 * 1.0 * 1.5 * std::sin(0.4) + n_r - n_t)
                   .epsilon(1e-12));
  CHECK(r.sign == (r.x > 0.0 ? +1 : -1));
}

TEST_CASE("homodyne rejects bad gain and sigma") {
  RandomStream rng(1);
  CHECK_THROWS_AS(homodyne_difference(FieldPair(1, 1, 0.1), 0.0, 0.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(homodyne_difference(FieldPair(1, 1, 0.1), 1.0, -0.1, rng),
                  std::invalid_argument);
}

TEST_CASE("oracle_difference_real agrees with the closed form") {
  RandomStream rng(13);
  for (int i = 0; i < 300; ++i) {
    const double e = rng.uniform(0.0, 3.0);
    const double el = rng.uniform(0.0, 3.0);
    const double th = rng.uniform_angle();
    const double want = 2.0 * e * el * std::sin(th);
    CHECK(oracle_difference_real(e, el, th, 16) == doctest::Approx(want).epsilon(1e-9));
    CHECK(oracle_difference_real(e, el, th, 4096) ==
          doctest::Approx(want).epsilon(1e-10));
  }
  CHECK_THROWS_AS(oracle_difference_real(1, 1, 0.1, 15), std::invalid_argument);
}

TEST_CASE("digitize signs and tie-break") {
  RandomStream rng(3);
  CHECK(digitize(1e-300, rng) == +1);
  CHECK(digitize(-1e-300, rng) == -1);
  CHECK(digitize(7.0, rng) == +1);
  CHECK_THROWS_AS(digitize(std::nan(""), rng), std::invalid_argument);
  CHECK_THROWS_AS(digitize(INFINITY, rng), std::invalid_argument);

  // Ties resolve by fair coin.
  int plus = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) plus += digitize(0.0, rng) == +1;
  const double p = double(plus) / n;
  CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / n));
}
