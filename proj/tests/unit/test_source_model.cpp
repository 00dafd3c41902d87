#include <cmath>
#include <random>
#include <string>

#include "brute_force.hpp"
#include "doctest.h"
#include "twinbeam/errors.hpp"
#include "twinbeam/rng.hpp"
#include "twinbeam/scenario.hpp"
#include "twinbeam/source_model.hpp"
#include "twinbeam/stats.hpp"

using namespace twinbeam;
using doctest::Approx;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  return covariance(a, b) / std::sqrt(variance(a) * variance(b));
}

}  // namespace

TEST_CASE("build_covariance") {
  SUBCASE("reference operating point") {
    const auto c = build_covariance({});
    CHECK(c.v_s == 100.0);
    CHECK(c.v_i == 100.0);
    CHECK(c.cov == Approx(99.822).epsilon(1e-12));
  }
  SUBCASE("independent coherent beams") {
    TwinBeamModel m;
    m.excess_signal = m.excess_idler = 1.0;
    m.gemellity = 1.0;
    CHECK(build_covariance(m).cov == 0.0);
  }
  SUBCASE("perfect shot-level correlation is on the PSD boundary") {
    TwinBeamModel m;
    m.excess_signal = m.excess_idler = 1.0;
    m.gemellity = 0.0;
    CHECK(build_covariance(m).cov == 1.0);
  }
  SUBCASE("unphysical gemellity names the bound") {
    TwinBeamModel m;
    m.excess_signal = 1.0;
    m.excess_idler = 4.0;
    m.gemellity = 0.1;  // cov = 2.4 > sqrt(4) = 2
    try {
      build_covariance(m);
      FAIL("expected UnphysicalModelError");
    } catch (const UnphysicalModelError& e) {
      CHECK(std::string(e.what()).find("sqrt(V_s*V_i)") != std::string::npos);
    }
  }
  SUBCASE("domain checks") {
    TwinBeamModel m;
    m.gemellity = -0.1;
    CHECK_THROWS_AS(build_covariance(m), DomainError);
    m = {};
    m.loss_signal = 1.5;
    CHECK_THROWS_AS(build_covariance(m), DomainError);
  }
  SUBCASE("implied gemellity recovers the input") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> v(0.5, 300.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
      TwinBeamModel m;
      m.excess_signal = v(gen);
      m.excess_idler = m.excess_signal;
      m.gemellity = u(gen) * 2.0 * m.excess_signal;
      const auto c = build_covariance(m);
      CHECK(c.implied_gemellity() == Approx(m.gemellity).epsilon(1e-12).scale(m.excess_signal));
    }
  }
}

TEST_CASE("apply_loss") {
  const auto reference = build_covariance({});
  SUBCASE("no loss is the identity") {
    CHECK(apply_loss(reference, 0.0, 0.0) == reference);
  }
  SUBCASE("half loss") {
    const auto c = apply_loss(reference, 0.5, 0.5);
    CHECK(c.v_s == Approx(50.5).epsilon(1e-14));
    CHECK(c.cov == Approx(49.911).epsilon(1e-14));
    CHECK(c.implied_gemellity() == Approx(0.589).epsilon(1e-11));
    CHECK(to_db(c.implied_gemellity()) == Approx(-2.2988).epsilon(1e-4));
  }
  SUBCASE("full loss leaves vacuum") {
    const auto c = apply_loss(reference, 1.0, 1.0);
    CHECK(c.v_s == 1.0);
    CHECK(c.v_i == 1.0);
    CHECK(c.cov == 0.0);
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(apply_loss(reference, -0.1, 0.0), DomainError);
    CHECK_THROWS_AS(apply_loss(reference, 0.0, 1.1), DomainError);
  }
  SUBCASE("losses compose") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
      const auto cov = testing::random_covariance(gen);
      const double a = u(gen), b = u(gen), c = u(gen), d = u(gen);
      const auto twice = apply_loss(apply_loss(cov, a, b), c, d);
      const auto once =
          apply_loss(cov, 1.0 - (1.0 - a) * (1.0 - c), 1.0 - (1.0 - b) * (1.0 - d));
      CHECK(twice.v_s == Approx(once.v_s).epsilon(1e-12));
      CHECK(twice.v_i == Approx(once.v_i).epsilon(1e-12));
      CHECK(twice.cov == Approx(once.cov).epsilon(1e-12).scale(std::abs(cov.cov) + 1.0));
    }
  }
  SUBCASE("equal loss maps gemellity linearly") {
    for (double loss = 0.0; loss <= 1.0; loss += 0.05) {
      const auto c = apply_loss(reference, loss, loss);
      CHECK(c.implied_gemellity() ==
            Approx((1.0 - loss) * 0.178 + loss).epsilon(1e-10));
    }
  }
}

TEST_CASE("sample_trace") {
  const auto reference = build_covariance({});
  SUBCASE("empty") { CHECK(sample_trace(reference, 0, 1).empty()); }
  SUBCASE("deterministic per seed") {
    const auto a = sample_trace(reference, 1000, 42);
    const auto b = sample_trace(reference, 1000, 42);
    CHECK(a.signal == b.signal);
    CHECK(a.idler == b.idler);
    CHECK(a.meta.seed == 42);
  }
  SUBCASE("different seeds are independent") {
    const auto a = sample_trace(reference, 200'000, 1);
    const auto b = sample_trace(reference, 200'000, 2);
    CHECK(std::abs(correlation(a.signal, b.signal)) < 0.02);
  }
  SUBCASE("reference covariance is reproduced") {
    const auto t = sample_trace(reference, 200'000, 3);
    CHECK(variance(t.signal) == Approx(100.0).epsilon(0.03));
    CHECK(variance(t.idler) == Approx(100.0).epsilon(0.03));
    CHECK(gemellity(t.signal, t.idler).linear() == Approx(0.178).epsilon(0.03));
  }
  SUBCASE("degenerate signal channel") {
    const auto t = sample_trace({0.0, 4.0, 0.0}, 10'000, 4);
    CHECK(variance(t.signal) == 0.0);
    CHECK(variance(t.idler) == Approx(4.0).epsilon(0.05));
  }
  SUBCASE("rejects non-PSD matrices") {
    CHECK_THROWS_AS(sample_trace({1.0, 1.0, 1.5}, 10, 1), UnphysicalModelError);
  }
}

TEST_CASE("add_dark_noise") {
  const auto shot = sample_trace({1.0, 1.0, 0.0}, 200'000, 21);
  SUBCASE("zero variance is the identity") {
    const auto t = add_dark_noise(shot, 0.0, 5);
    CHECK(t.signal == shot.signal);
    CHECK(t.idler == shot.idler);
  }
  SUBCASE("variances add") {
    const auto t = add_dark_noise(shot, 0.25, 5);
    CHECK(variance(t.signal) == Approx(1.25).epsilon(0.02));
    CHECK(variance(t.idler) == Approx(1.25).epsilon(0.02));
  }
  SUBCASE("gemellity rises by d/2 per contaminated channel") {
    const auto twins = sample_trace(build_covariance({}), 200'000, 22);
    const double d = 0.25;
    const double g0 = gemellity(twins.signal, twins.idler).linear();
    const auto one = add_dark_noise(twins, d, 6, DarkChannels::kSignal);
    const auto both = add_dark_noise(twins, d, 6, DarkChannels::kBoth);
    CHECK(one.idler == twins.idler);
    CHECK(gemellity(one.signal, one.idler).linear() - g0 == Approx(d / 2).epsilon(0.05));
    CHECK(gemellity(both.signal, both.idler).linear() - g0 == Approx(d).epsilon(0.05));
  }
  SUBCASE("negative variance") {
    CHECK_THROWS_AS(add_dark_noise(shot, -0.1, 1), DomainError);
  }
}

TEST_CASE("quantize") {
  const auto t = sample_trace({100.0, 100.0, 99.822}, 200'000, 31);
  SUBCASE("24 bits at 100 sigma0 is transparent") {
    const auto q = quantize(t, 24, 100.0);
    for (std::size_t k = 0; k < t.size(); ++k) {
      REQUIRE(std::abs(q.signal[k] - t.signal[k]) < 1e-4);
    }
  }
  SUBCASE("12 bits at 4 sigma adds q^2/12") {
    const double fs = default_full_scale({100.0, 100.0, 99.822});
    CHECK(fs == 40.0);
    const double step = 2.0 * fs / 4096.0;
    const auto q = quantize(t.signal, 12, fs);
    std::vector<double> err(q.size());
    std::size_t clipped = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      err[k] = q[k] - t.signal[k];
      if (std::abs(t.signal[k]) > fs) ++clipped;
    }
    REQUIRE(clipped < 20);  // P(|x| > 4 sigma) ~ 6e-5
    std::vector<double> inner;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (std::abs(t.signal[k]) < fs) inner.push_back(err[k]);
    }
    CHECK(variance(inner) == Approx(step * step / 12.0).epsilon(0.02));
  }
  SUBCASE("one bit gives two levels") {
    const auto q = quantize(t.signal, 1, 10.0);
    for (double x : q) REQUIRE((x == 5.0 || x == -5.0));
  }
  SUBCASE("saturation") {
    const std::vector<double> x{-1e9, 1e9, 1.0};
    const auto q = quantize(x, 3, 2.0);
    CHECK(q[0] == -1.75);
    CHECK(q[1] == 1.75);
    CHECK(q[2] == 1.25);
  }
  SUBCASE("idempotent") {
    for (int bits : {1, 3, 8, 12, 16}) {
      const auto once = quantize(t, bits, 37.5);
      const auto twice = quantize(once, bits, 37.5);
      CHECK(once.signal == twice.signal);
      CHECK(once.idler == twice.idler);
    }
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(quantize(t.signal, 0, 1.0), DomainError);
    CHECK_THROWS_AS(quantize(t.signal, 12, 0.0), DomainError);
  }
}

TEST_CASE("shot calibration trace") {
  const auto a = shot_calibration_trace(200'000, 51);
  CHECK(variance(a) == Approx(1.0).epsilon(0.01));
  CHECK(std::abs(*fano(a, variance(a)).db()) < 0.05);
  const auto b = shot_calibration_trace(200'000, 52);
  CHECK(std::abs(correlation(a, b)) < 0.02);
  CHECK(shot_calibration_trace(201, 51).size() == 201);
  CHECK_THROWS_AS(shot_calibration_trace(1, 1), InsufficientDataError);
}

TEST_CASE("full pipeline is a pure function of model, n and seeds") {
  TwinBeamModel m;
  m.loss_signal = 0.2;
  m.loss_idler = 0.1;
  m.dark_variance = 0.2;
  const QuantizerConfig q{12, std::nullopt};
  const auto a = generate_trace(m, 5000, 9, 10, q);
  const auto b = generate_trace(m, 5000, 9, 10, q);
  CHECK(a.signal == b.signal);
  CHECK(a.idler == b.idler);
  const auto c = generate_trace(m, 5000, 9, 11, q);
  CHECK(a.signal != c.signal);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}
