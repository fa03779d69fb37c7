#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "lhv/belltest.hpp"
#include "lhv/errors.hpp"
#include "lhv/rng.hpp"

using namespace lhv;

namespace {

constexpr double pi = std::numbers::pi;

double sign_of_sin(double theta) { return std::sin(theta) > 0.0 ? 1.0 : -1.0; }

CoincidenceCounts make_counts(std::uint64_t pp, std::uint64_t pm, std::uint64_t mp,
                              std::uint64_t mm, std::uint64_t n_ab) {
  CoincidenceCounts c;
  c.n_pp = pp;
  c.n_pm = pm;
  c.n_mp = mp;
  c.n_mm = mm;
  c.n_ab = n_ab;
  return c;
}

}  // namespace

TEST_CASE("coincidence bookkeeping") {
  CoincidenceCounts c;
  c.note_event_ready();
  c.note_event_ready();
  c.note_coincidence(+1, +1);
  c.note_coincidence(+1, -1);
  c.note_coincidence(-1, +1);
  c.note_coincidence(-1, -1);
  c.note_coincidence(-1, -1);
  CHECK(c.n_pp == 1);
  CHECK(c.n_pm == 1);
  CHECK(c.n_mp == 1);
  CHECK(c.n_mm == 2);
  CHECK(c.observed() == 5);
  CHECK(c.n_ab == 2);

  CoincidenceCounts d = make_counts(1, 2, 3, 4, 12);
  d += c;
  CHECK(d.n_pp == 2);
  CHECK(d.n_mm == 6);
  CHECK(d.n_ab == 14);
}

TEST_CASE("correlation estimators on worked counts") {
  const CoincidenceCounts c = make_counts(30, 10, 10, 30, 100);
  CHECK(correlation_fair(c) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(correlation_conventional(c) == doctest::Approx(0.5).epsilon(1e-15));

  // Undetected events split the two estimators: 100 observed out of 200
  // event-ready pairs, perfectly correlated where both fired.
  const CoincidenceCounts u = make_counts(50, 0, 0, 50, 200);
  CHECK(correlation_conventional(u) == doctest::Approx(1.0));
  CHECK(correlation_fair(u) == doctest::Approx(0.5));
}

TEST_CASE("standard errors follow the trinomial formula") {
  const CoincidenceCounts c = make_counts(30, 10, 10, 30, 100);
  // p_same = 0.6, p_diff = 0.2, E = 0.4 over n = n_ab.
  const double want_fair = std::sqrt((0.6 + 0.2 - 0.4 * 0.4) / 100.0);
  CHECK(correlation_fair_stderr(c) == doctest::Approx(want_fair).epsilon(1e-12));

  const CoincidenceCounts u = make_counts(50, 0, 0, 50, 200);
  // Conventional: E = 1 over the 100 observed, so the trinomial width is 0.
  CHECK(correlation_conventional_stderr(u) == doctest::Approx(0.0));
  // Fair: p_same = 0.5, p_diff = 0, E = 0.5 over 200.
  CHECK(correlation_fair_stderr(u) ==
        doctest::Approx(std::sqrt((0.5 - 0.25) / 200.0)).epsilon(1e-12));
}

TEST_CASE("empty denominators throw") {
  const CoincidenceCounts empty;
  CHECK_THROWS_AS(correlation_fair(empty), EstimatorUndefined);
  CHECK_THROWS_AS(correlation_conventional(empty), EstimatorUndefined);
  CHECK_THROWS_AS(correlation_fair_stderr(empty), EstimatorUndefined);

  // Event-ready pairs but nothing observed: fair is 0, conventional throws.
  const CoincidenceCounts silent = make_counts(0, 0, 0, 0, 50);
  CHECK(correlation_fair(silent) == 0.0);
  CHECK_THROWS_AS(correlation_conventional(silent), EstimatorUndefined);
}

TEST_CASE("chsh combination") {
  CHECK(chsh(1.0, -1.0, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(chsh(0.5, -0.5, 0.5, 0.5) == doctest::Approx(2.0));
  CHECK(chsh(0.0, 0.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("full run aggregates the four blocks") {
  ChshRun run;
  run.counts[0] = make_counts(100, 0, 0, 100, 200);   // e =  1
  run.counts[1] = make_counts(0, 100, 100, 0, 200);   // e = -1
  run.counts[2] = make_counts(100, 0, 0, 100, 200);   // e =  1
  run.counts[3] = make_counts(100, 0, 0, 100, 200);   // e =  1
  CHECK(run.s_fair() == doctest::Approx(4.0));
  CHECK(run.s_conventional() == doctest::Approx(4.0));
  CHECK(run.sigma_s_fair() == doctest::Approx(0.0));

  ChshRun half;
  for (auto& c : half.counts) c = make_counts(75, 25, 25, 75, 200);
  half.counts[1] = make_counts(25, 75, 75, 25, 200);  // the subtracted pair
  CHECK(half.s_fair() == doctest::Approx(2.0));
  const double per = std::sqrt((1.0 - 0.25) / 200.0);
  CHECK(half.sigma_s_fair() == doctest::Approx(2.0 * per).epsilon(1e-12));
  CHECK(half.sigma_s_conventional() == doctest::Approx(2.0 * per).epsilon(1e-12));
}

TEST_CASE("analytic coincidence worked values") {
  const CoincidenceProbabilities a = analytic_coincidence(0.5 * pi, 0.25 * pi, 0.5);
  CHECK(a.p_pp == doctest::Approx(0.5));
  CHECK(a.p_mm == doctest::Approx(0.5));
  CHECK(a.p_pm == doctest::Approx(0.0));
  CHECK(a.p_mp == doctest::Approx(0.0));

  const CoincidenceProbabilities b = analytic_coincidence(-0.5 * pi, 0.25 * pi, 0.5);
  CHECK(b.p_pm == doctest::Approx(0.5));
  CHECK(b.p_mp == doctest::Approx(0.5));
  CHECK(b.p_pp == doctest::Approx(0.0));

  // Same setting difference, different absolute settings, different physics:
  // the two-class model is not phase-translation invariant.
  const CoincidenceProbabilities c = analytic_coincidence(0.5 * pi, 0.25 * pi, 0.5);
  const CoincidenceProbabilities d =
      analytic_coincidence(-7.0 * pi / 8.0, 7.0 * pi / 8.0, 0.5);
  CHECK(c.p_pp == doctest::Approx(0.5));
  CHECK(d.p_pp == doctest::Approx(0.0));

  // Asymmetric mixture weight shifts the coincidence weights with it.
  const CoincidenceProbabilities e = analytic_coincidence(0.5 * pi, 0.25 * pi, 0.75);
  CHECK(e.p_pp == doctest::Approx(0.75));
  CHECK(e.p_mm == doctest::Approx(0.25));
}

TEST_CASE("analytic coincidence is a probability distribution") {
  RandomStream rng(19);
  for (int i = 0; i < 500; ++i) {
    double ta = rng.uniform_angle();
    double tb = rng.uniform_angle();
    if (std::sin(ta) == 0.0 || std::sin(tb) == 0.0) continue;
    const double p0 = rng.uniform01();
    const CoincidenceProbabilities p = analytic_coincidence(ta, tb, p0);
    for (double v : {p.p_pp, p.p_pm, p.p_mp, p.p_mm}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(p.p_pp + p.p_pm + p.p_mp + p.p_mm == doctest::Approx(1.0).epsilon(1e-12));

    // The implied correlation factorizes into per-arm signs. Flipping alpha
    // by pi flips both arms at once, so the mixture weight drops out.
    const double e = p.p_pp + p.p_mm - p.p_pm - p.p_mp;
    CHECK(e == doctest::Approx(sign_of_sin(ta) * sign_of_sin(tb)).epsilon(1e-12));
  }
}

TEST_CASE("analytic coincidence boundary throws") {
  CHECK_THROWS_AS(analytic_coincidence(0.0, 0.25 * pi, 0.5), std::domain_error);
  CHECK_THROWS_AS(analytic_coincidence(pi, 0.25 * pi, 0.5), std::domain_error);
  CHECK_THROWS_AS(analytic_coincidence(0.25 * pi, -pi, 0.5), std::domain_error);
  CHECK_THROWS_AS(analytic_coincidence(0.25 * pi, 2.0 * pi, 0.5), std::domain_error);
  CHECK_THROWS_AS(analytic_coincidence(0.25 * pi, 0.25 * pi, 1.5),
                  std::invalid_argument);
}

TEST_CASE("two-class CHSH is exactly 2 at the standard settings") {
  // E(a, b) = sign(sin a) sign(sin b) for any mixture weight, so S is the
  // product combination and can never leave [-2, 2].
  const auto e = [](double ta, double tb) {
    const CoincidenceProbabilities p = analytic_coincidence(ta, tb, 0.5);
    return p.p_pp + p.p_mm - p.p_pm - p.p_mp;
  };
  const double a = 0.5 * pi, ap = -0.5 * pi, b = 0.25 * pi, bp = -0.25 * pi;
  CHECK(chsh(e(a, b), e(a, bp), e(ap, b), e(ap, bp)) == doctest::Approx(2.0));

  RandomStream rng(23);
  for (int i = 0; i < 200; ++i) {
    const double s1 = rng.uniform_angle(), s2 = rng.uniform_angle();
    const double s3 = rng.uniform_angle(), s4 = rng.uniform_angle();
    if (std::sin(s1) == 0.0 || std::sin(s2) == 0.0 || std::sin(s3) == 0.0 ||
        std::sin(s4) == 0.0)
      continue;
    const double s = chsh(e(s1, s3), e(s1, s4), e(s2, s3), e(s2, s4));
    CHECK(std::abs(s) <= 2.0 + 1e-12);
  }
}

TEST_CASE("visibility") {
  const std::vector<double> v1{1.0, 3.0};
  CHECK(visibility(v1) == doctest::Approx(0.5));
  const std::vector<double> v2{0.2, 0.2, 0.2};
  CHECK(visibility(v2) == doctest::Approx(0.0));
  const std::vector<double> v3{0.0, 1.0, 0.5};
  CHECK(visibility(v3) == doctest::Approx(1.0));

  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(visibility(one), std::invalid_argument);
  const std::vector<double> neg{0.5, -0.1};
  CHECK_THROWS_AS(visibility(neg), std::invalid_argument);
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(visibility(zero), EstimatorUndefined);
}
