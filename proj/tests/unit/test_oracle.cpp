#include <cmath>
#include <limits>
#include <random>

#include "brute_force.hpp"
#include "doctest.h"
#include "twinbeam/errors.hpp"
#include "twinbeam/oracle.hpp"
#include "twinbeam/stats.hpp"

using namespace twinbeam;
using doctest::Approx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const CovarianceMatrix kReference{100.0, 100.0, 99.822};
}  // namespace

TEST_CASE("normal distribution helpers") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.0) == Approx(0.8413447460685429).epsilon(1e-15));
  CHECK(normal_band_probability(-kInf, kInf) == 1.0);
  CHECK(normal_band_probability(1.0, 1.0) == 0.0);
  // Far tail keeps relative precision: Q(10) - Q(11).
  CHECK(normal_band_probability(10.0, 11.0) ==
        Approx(7.6198530241604696e-24 - 1.9106595744986827e-28).epsilon(1e-12));
}

TEST_CASE("conditional_variance") {
  CHECK(conditional_variance({7.0, 3.0, 0.0}) == 7.0);
  // 100 - 99.822^2 / 100 (exact decimal arithmetic)
  CHECK(conditional_variance(kReference) == Approx(0.35568316).epsilon(1e-12));
  CHECK(to_db(conditional_variance(kReference)) == Approx(-4.48937).epsilon(1e-5));
  CHECK(conditional_variance({100.0, 100.0, 100.0}) == 0.0);
  CHECK(conditional_variance({4.0, 9.0, 6.0}) == 0.0);
  CHECK(conditional_variance({2.0, 3.0, std::sqrt(6.0)}) == Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(conditional_variance({1.0, 0.0, 0.0}), DegenerateConditioningError);
}

TEST_CASE("truncated_gaussian_variance") {
  SUBCASE("no truncation") {
    CHECK(truncated_gaussian_variance(3.0, 0.0, kInf) == 9.0);
    CHECK(truncated_gaussian_variance(3.0, 0.0, 1e6) == Approx(9.0).epsilon(1e-9));
  }
  SUBCASE("uniform-slice limit") {
    CHECK(truncated_gaussian_variance(10.0, 0.0, 0.1) == Approx(0.01 / 3.0).epsilon(0.01));
    CHECK(truncated_gaussian_variance(1.0, 0.0, 1e-5) == Approx(1e-10 / 3.0).epsilon(1e-9));
  }
  SUBCASE("reference values from high-precision quadrature") {
    CHECK(truncated_gaussian_variance(1.0, 0.0, 1.0) ==
          Approx(0.2911250947727932).epsilon(1e-12));
    CHECK(truncated_gaussian_variance(10.0, 0.0, 1.0) ==
          Approx(0.3328891006699802).epsilon(1e-12));
    CHECK(truncated_gaussian_variance(10.0, 0.0, 0.1) ==
          Approx(0.003333288889100531).epsilon(1e-12));
    CHECK(truncated_gaussian_variance(2.0, 1.5, 0.7) ==
          Approx(0.1585560818023086).epsilon(1e-12));
    CHECK(truncated_gaussian_variance(1.0, 3.0, 0.5) ==
          Approx(0.05535009839736814).epsilon(1e-10));
  }
  SUBCASE("matches quadrature of the truncated density") {
    for (double c : {0.0, 0.4, 1.3, 2.5, 4.0, -3.2}) {
      for (double h : {1e-3, 0.004, 0.02, 0.3, 1.0, 2.2, 5.0}) {
        CAPTURE(c);
        CAPTURE(h);
        const double expected = testing::brute_truncated_variance(1.0, c, h);
        CHECK(truncated_gaussian_variance(1.0, c, h) == Approx(expected).epsilon(1e-8));
      }
    }
  }
  SUBCASE("series and closed form agree across the switch") {
    // (h/sigma)(1 + |c|/sigma) = 1e-2 at the switch.
    for (double c : {0.0, 1.0, 3.0}) {
      const double h = 1e-2 / (1.0 + c);
      const double below = truncated_gaussian_variance(1.0, c, h * (1 - 1e-9));
      const double above = truncated_gaussian_variance(1.0, c, h * (1 + 1e-9));
      CHECK(above == Approx(below).epsilon(1e-8));
    }
  }
  SUBCASE("never exceeds sigma^2") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> c(-6.0, 6.0);
    std::uniform_real_distribution<double> lh(-4.0, 1.5);
    for (int k = 0; k < 2000; ++k) {
      CHECK(truncated_gaussian_variance(1.0, c(gen), std::pow(10.0, lh(gen))) <= 1.0);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(truncated_gaussian_variance(0.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(truncated_gaussian_variance(1.0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(truncated_gaussian_variance(1.0, 40.0, 0.1), UnderflowError);
  }
}

TEST_CASE("predicted_selected_variance") {
  SUBCASE("full-range band recovers v_s") {
    CHECK(predicted_selected_variance(kReference, {0.0, kInf}) == Approx(100.0).epsilon(1e-12));
  }
  SUBCASE("reference bands") {
    CHECK(predicted_selected_variance(kReference, {0.0, 0.05}) ==
          Approx(0.3565135265391056).epsilon(1e-10));
    CHECK(predicted_selected_variance(kReference, {0.0, 0.1}) ==
          Approx(0.3590045929418478).epsilon(1e-10));
    CHECK(to_db(predicted_selected_variance(kReference, {0.0, 0.1})) ==
          Approx(-4.449).epsilon(1e-3));
    CHECK(predicted_selected_variance(kReference, {0.0, 0.2}) ==
          Approx(0.3689683603436885).epsilon(1e-10));
    CHECK(predicted_selected_variance(kReference, {0.0, 1.0}) ==
          Approx(0.6873882301974217).epsilon(1e-10));
  }
  SUBCASE("decomposition identity on random matrices") {
    std::mt19937_64 gen(4);
    for (int k = 0; k < 300; ++k) {
      const auto cov = testing::random_covariance(gen);
      CHECK(predicted_selected_variance(cov, {0.0, kInf}) == Approx(cov.v_s).epsilon(1e-6));
      CHECK(predicted_selected_variance(cov, {0.0, 1e3 * std::sqrt(cov.v_i)}) ==
            Approx(cov.v_s).epsilon(1e-6));
    }
  }
  SUBCASE("non-decreasing in half-width") {
    double prev = 0.0;
    for (double h = 0.001; h < 60.0; h *= 1.2) {
      const double v = predicted_selected_variance(kReference, {0.0, h});
      CHECK(v >= prev);
      prev = v;
    }
  }
  SUBCASE("never below the narrow-band limit") {
    const double floor = conditional_variance(kReference);
    for (double c : {-20.0, 0.0, 7.0}) {
      for (double h : {1e-4, 0.1, 3.0}) {
        const auto p = predict(kReference, {c, h});
        CHECK(p.selected_variance >= floor);
        CHECK(p.narrow_limit_variance == floor);
        CHECK(p.success_rate >= 0.0);
        CHECK(p.success_rate <= 1.0);
        CHECK(p.regression_slope == Approx(0.99822));
      }
    }
  }
}

TEST_CASE("predicted_success_rate") {
  CHECK(predicted_success_rate(1.0, {0.0, 8.0}) == Approx(1.0).epsilon(1e-9));
  CHECK(predicted_success_rate(10.0, {0.0, 0.1}) ==
        Approx(0.007978712629263207).epsilon(1e-12));
  const double centered = predicted_success_rate(10.0, {0.0, 0.01});
  const double shifted = predicted_success_rate(10.0, {20.0, 0.01});
  CHECK(shifted / centered == Approx(std::exp(-2.0)).epsilon(1e-6));
  CHECK(predicted_success_rate(10.0, {0.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(predicted_success_rate(0.0, {0.0, 1.0}), DomainError);

  for (double c : {0.0, 5.0, -13.0, 25.0}) {
    for (double h : {0.1, 1.0, 4.0}) {
      CHECK(predicted_success_rate(10.0, {c, h}) ==
            Approx(testing::brute_band_mass(10.0, c, h)).epsilon(1e-9));
    }
  }
}

TEST_CASE("narrow_limit_db") {
  CHECK(narrow_limit_db(-7.5, 100.0) == Approx(-4.4936).epsilon(1e-4));
  CHECK(narrow_limit_db(to_db(0.5), 1e12) == Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(narrow_limit_db(to_db(0.5), 1e12)) < 1e-9);
  CHECK(narrow_limit_db(0.0, 1.0) == Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(narrow_limit_db(3.0, 1.0), DomainError);
  CHECK_THROWS_AS(narrow_limit_db(-3.0, 0.0), DomainError);

  SUBCASE("gemellity plus 3 dB for large excess noise") {
    for (double v : {1e3, 1e4, 1e6}) {
      for (double g_db = -15.0; g_db <= to_db(0.5); g_db += 0.5) {
        CHECK(std::abs(narrow_limit_db(g_db, v) - (g_db + 10.0 * std::log10(2.0))) < 0.05);
      }
    }
  }
  SUBCASE("agrees with the general conditional variance") {
    for (double g_db : {-9.0, -7.5, -3.0, 0.0}) {
      const double g = from_db(g_db);
      const CovarianceMatrix c{100.0, 100.0, 100.0 - g};
      CHECK(narrow_limit_db(g_db, 100.0) == Approx(to_db(conditional_variance(c))).epsilon(1e-10));
    }
  }
}
