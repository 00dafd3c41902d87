#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "twinbeam/trace.hpp"

namespace twinbeam {

/// Physical parameters of the twin-beam source, all in per-beam shot units.
struct TwinBeamModel {
  double excess_signal = 100.0;  ///< signal Fano factor V_s
  double excess_idler = 100.0;   ///< idler Fano factor V_i
  double gemellity = 0.178;      ///< Var(s - i) / 2
  double loss_signal = 0.0;
  double loss_idler = 0.0;
  double dark_variance = 0.0;    ///< per channel
  double mean_power = 1.0;       ///< metadata only

  /// Throws UnphysicalModelError or DomainError naming the violated bound.
  void validate() const;
};

/// Second moments of the signal/idler fluctuations.
struct CovarianceMatrix {
  double v_s = 1.0;
  double v_i = 1.0;
  double cov = 0.0;

  /// (v_s + v_i)/2 - cov.
  double implied_gemellity() const noexcept {
    return 0.5 * (v_s + v_i) - cov;
  }
  void validate() const;

  friend bool operator==(const CovarianceMatrix&,
                         const CovarianceMatrix&) = default;
};

/// Covariance from excess noises and gemellity. Losses and dark noise in the
/// model are not applied here.
CovarianceMatrix build_covariance(const TwinBeamModel& model);

/// Vacuum admixture on each beam: v -> (1-L) v + L, cov scaled by
/// sqrt((1-L_s)(1-L_i)).
CovarianceMatrix apply_loss(const CovarianceMatrix& cov, double loss_signal,
                            double loss_idler);

/// `n` paired draws from the zero-mean bivariate Gaussian with matrix `cov`.
Trace sample_trace(const CovarianceMatrix& cov, std::size_t n,
                   std::uint64_t seed);

enum class DarkChannels { kBoth, kSignal, kIdler };

Trace add_dark_noise(const Trace& trace, double dark_variance,
                     std::uint64_t seed,
                     DarkChannels channels = DarkChannels::kBoth);

/// Mid-rise uniform quantizer with saturation: step 2*full_scale / 2^bits,
/// output levels at (k + 1/2) * step.
std::vector<double> quantize(const std::vector<double>& samples, int bits,
                             double full_scale);
Trace quantize(const Trace& trace, int bits, double full_scale);

/// Four times the larger channel standard deviation.
double default_full_scale(const CovarianceMatrix& cov);

/// Unit-variance reference recorded with the beams split 50/50.
std::vector<double> shot_calibration_trace(std::size_t n, std::uint64_t seed);

}  // namespace twinbeam
