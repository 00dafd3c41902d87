#include "twinbeam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "twinbeam/errors.hpp"

namespace twinbeam {
namespace {

constexpr double kUnderflowMass = 1e-300;

// Below this value of (h/sigma)(1 + |c|/sigma) the closed form loses digits to
// cancellation and the small-width series is used instead.
constexpr double kSeriesThreshold = 1e-2;

double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// x * phi(x), taken as zero at +-inf.
double x_pdf(double x) { return std::isinf(x) ? 0.0 : x * normal_pdf(x); }

}  // namespace

double normal_pdf(double x) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684759;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_band_probability(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) {
    throw DomainError("normal_band_probability of NaN bounds");
  }
  if (hi <= lo) return 0.0;
  if (lo >= 0.0) return upper_tail(lo) - upper_tail(hi);
  if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
  return 1.0 - normal_cdf(lo) - upper_tail(hi);
}

double conditional_variance(const CovarianceMatrix& cov) {
  cov.validate();
  if (!(cov.v_i > 0.0)) {
    throw DegenerateConditioningError(
        "conditional variance undefined for an idler with zero variance");
  }
  return std::max(0.0, cov.v_s - cov.cov * cov.cov / cov.v_i);
}

double truncated_gaussian_variance(double sigma, double center,
                                   double half_width) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("truncated_gaussian_variance requires sigma > 0");
  }
  if (!(half_width > 0.0)) {
    throw DomainError("truncated_gaussian_variance requires half_width > 0");
  }
  if (!std::isfinite(center)) {
    throw DomainError("truncated_gaussian_variance requires a finite center");
  }
  const double kappa = center / sigma;
  const double eta = half_width / sigma;
  const double lo = kappa - eta;
  const double hi = kappa + eta;

  const double mass = normal_band_probability(lo, hi);
  if (!(mass >= kUnderflowMass)) {
    std::ostringstream os;
    os << "truncation band [" << center - half_width << ", "
       << center + half_width << "] holds probability " << mass
       << " < 1e-300 under sigma = " << sigma;
    throw UnderflowError(os.str());
  }

  if (eta * (1.0 + std::abs(kappa)) < kSeriesThreshold) {
    const double e2 = eta * eta;
    const double k2 = kappa * kappa;
    const double s = e2 / 3.0 - e2 * e2 * (k2 / 15.0 + 2.0 / 45.0) +
                     e2 * e2 * e2 *
                         (2.0 * k2 * k2 / 189.0 + 8.0 * k2 / 315.0 + 2.0 / 945.0);
    return sigma * sigma * s;
  }

  const double pdf_lo = std::isinf(lo) ? 0.0 : normal_pdf(lo);
  const double pdf_hi = std::isinf(hi) ? 0.0 : normal_pdf(hi);
  const double m = (pdf_lo - pdf_hi) / mass;
  const double s = 1.0 + (x_pdf(lo) - x_pdf(hi)) / mass - m * m;
  return sigma * sigma * std::clamp(s, 0.0, 1.0);
}

double predicted_selected_variance(const CovarianceMatrix& cov,
                                   const SelectionBand& band) {
  band.validate();
  const double residual = conditional_variance(cov);
  const double beta = cov.cov / cov.v_i;
  return beta * beta *
             truncated_gaussian_variance(std::sqrt(cov.v_i), band.center,
                                         band.half_width) +
         residual;
}

double predicted_success_rate(double sigma_idler, const SelectionBand& band) {
  if (!(sigma_idler > 0.0) || !std::isfinite(sigma_idler)) {
    throw DomainError("predicted_success_rate requires sigma_idler > 0");
  }
  band.validate();
  return normal_band_probability(band.lower() / sigma_idler,
                                 band.upper() / sigma_idler);
}

double narrow_limit_db(double gemellity_db, double excess) {
  const double g = from_db(gemellity_db);
  if (!(excess > 0.0) || !std::isfinite(excess) || excess < g) {
    std::ostringstream os;
    os << "narrow_limit_db needs excess >= gemellity (" << excess << " < " << g
       << ")";
    throw DomainError(os.str());
  }
  return to_db(2.0 * g - g * g / excess);
}

Prediction predict(const CovarianceMatrix& cov, const SelectionBand& band) {
  const double residual = conditional_variance(cov);
  return {predicted_selected_variance(cov, band),
          predicted_success_rate(std::sqrt(cov.v_i), band), residual,
          cov.cov / cov.v_i};
}

}  // namespace twinbeam
