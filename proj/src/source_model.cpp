#include "twinbeam/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "twinbeam/errors.hpp"
#include "twinbeam/rng.hpp"

namespace twinbeam {
namespace {

// Relative slack on the Cauchy-Schwarz bound so boundary models survive
// rounding.
constexpr double kPsdSlack = 1e-12;

void require_fraction(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << name << " must lie in [0, 1], got " << x;
    throw DomainError(os.str());
  }
}

void require_non_negative(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << name << " must be non-negative and finite, got " << x;
    throw DomainError(os.str());
  }
}

}  // namespace

void TwinBeamModel::validate() const {
  require_non_negative(excess_signal, "excess_signal");
  require_non_negative(excess_idler, "excess_idler");
  require_non_negative(gemellity, "gemellity");
  require_fraction(loss_signal, "loss_signal");
  require_fraction(loss_idler, "loss_idler");
  require_non_negative(dark_variance, "dark_variance");
  if (!(mean_power > 0.0)) throw DomainError("mean_power must be positive");

  const double cov = 0.5 * (excess_signal + excess_idler) - gemellity;
  const double bound = std::sqrt(excess_signal * excess_idler);
  if (std::abs(cov) > bound * (1.0 + kPsdSlack)) {
    std::ostringstream os;
    os.precision(17);
    os << "unphysical model: implied covariance " << cov
       << " violates |cov| <= sqrt(V_s*V_i) = " << bound
       << " (gemellity " << gemellity << " must lie in ["
       << 0.5 * (excess_signal + excess_idler) - bound << ", "
       << 0.5 * (excess_signal + excess_idler) + bound << "])";
    throw UnphysicalModelError(os.str());
  }
}

void CovarianceMatrix::validate() const {
  require_non_negative(v_s, "v_s");
  require_non_negative(v_i, "v_i");
  if (!std::isfinite(cov) ||
      std::abs(cov) > std::sqrt(v_s * v_i) * (1.0 + kPsdSlack)) {
    std::ostringstream os;
    os.precision(17);
    os << "covariance matrix not positive semidefinite: cov^2 = " << cov * cov
       << " > v_s*v_i = " << v_s * v_i;
    throw UnphysicalModelError(os.str());
  }
}

CovarianceMatrix build_covariance(const TwinBeamModel& model) {
  model.validate();
  return {model.excess_signal, model.excess_idler,
          0.5 * (model.excess_signal + model.excess_idler) - model.gemellity};
}

CovarianceMatrix apply_loss(const CovarianceMatrix& cov, double loss_signal,
                            double loss_idler) {
  require_fraction(loss_signal, "loss_signal");
  require_fraction(loss_idler, "loss_idler");
  cov.validate();
  return {(1.0 - loss_signal) * cov.v_s + loss_signal,
          (1.0 - loss_idler) * cov.v_i + loss_idler,
          std::sqrt((1.0 - loss_signal) * (1.0 - loss_idler)) * cov.cov};
}

Trace sample_trace(const CovarianceMatrix& cov, std::size_t n,
                   std::uint64_t seed) {
  cov.validate();
  // Lower-triangular square root of [[v_s, cov], [cov, v_i]].
  const double l11 = std::sqrt(cov.v_s);
  const double l21 = l11 > 0.0 ? cov.cov / l11 : 0.0;
  const double l22 = std::sqrt(std::max(0.0, cov.v_i - l21 * l21));

  Trace trace;
  trace.meta.seed = seed;
  trace.signal.resize(n);
  trace.idler.resize(n);
  Rng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [z1, z2] = rng.normal_pair();
    trace.signal[k] = l11 * z1;
    trace.idler[k] = l21 * z1 + l22 * z2;
  }
  return trace;
}

Trace add_dark_noise(const Trace& trace, double dark_variance,
                     std::uint64_t seed, DarkChannels channels) {
  require_non_negative(dark_variance, "dark_variance");
  trace.validate();
  Trace out = trace;
  if (dark_variance == 0.0) return out;

  const double sd = std::sqrt(dark_variance);
  const bool on_signal = channels != DarkChannels::kIdler;
  const bool on_idler = channels != DarkChannels::kSignal;
  Rng rng(seed);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto [d1, d2] = rng.normal_pair();
    if (on_signal) out.signal[k] += sd * d1;
    if (on_idler) out.idler[k] += sd * d2;
  }
  return out;
}

std::vector<double> quantize(const std::vector<double>& samples, int bits,
                             double full_scale) {
  if (bits < 1 || bits > 62) {
    throw DomainError("quantizer bits must be in [1, 62], got " +
                      std::to_string(bits));
  }
  if (!(full_scale > 0.0) || !std::isfinite(full_scale)) {
    throw DomainError("quantizer full scale must be positive");
  }
  const double step = std::ldexp(2.0 * full_scale, -bits);
  const double half_levels = std::ldexp(1.0, bits - 1);

  std::vector<double> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double x = std::clamp(samples[k], -full_scale, full_scale);
    const double level =
        std::clamp(std::floor(x / step), -half_levels, half_levels - 1.0);
    out[k] = (level + 0.5) * step;
  }
  return out;
}

Trace quantize(const Trace& trace, int bits, double full_scale) {
  trace.validate();
  Trace out;
  out.meta = trace.meta;
  out.signal = quantize(trace.signal, bits, full_scale);
  out.idler = quantize(trace.idler, bits, full_scale);
  return out;
}

double default_full_scale(const CovarianceMatrix& cov) {
  return 4.0 * std::sqrt(std::max(cov.v_s, cov.v_i));
}

std::vector<double> shot_calibration_trace(std::size_t n, std::uint64_t seed) {
  if (n < 2) {
    throw InsufficientDataError("shot calibration needs at least 2 samples");
  }
  std::vector<double> out(n);
  Rng rng(seed);
  for (std::size_t k = 0; k < n; k += 2) {
    const auto [z1, z2] = rng.normal_pair();
    out[k] = z1;
    if (k + 1 < n) out[k + 1] = z2;
  }
  return out;
}

}  // namespace twinbeam
