#pragma once

#include "twinbeam/selection.hpp"
#include "twinbeam/source_model.hpp"

namespace twinbeam {

/// Standard normal density and distribution function.
double normal_pdf(double x);
double normal_cdf(double x);

/// P(lo <= Z <= hi) for standard normal Z, evaluated on the tail that keeps
/// relative precision.
double normal_band_probability(double lo, double hi);

/// Residual variance of the signal given the idler: v_s - cov^2 / v_i.
double conditional_variance(const CovarianceMatrix& cov);

/// Variance of N(0, sigma^2) conditioned on [center - half_width,
/// center + half_width]. `half_width` may be +inf.
double truncated_gaussian_variance(double sigma, double center,
                                   double half_width);

/// Expected variance of the selected signal: beta^2 * truncated idler variance
/// + conditional variance, where beta = cov / v_i.
double predicted_selected_variance(const CovarianceMatrix& cov,
                                   const SelectionBand& band);

/// Probability that an N(0, sigma_idler^2) idler sample falls in `band`.
double predicted_success_rate(double sigma_idler, const SelectionBand& band);

/// Narrow-band limit in dB for the symmetric source: 10 log10(2G - G^2/V).
double narrow_limit_db(double gemellity_db, double excess);

struct Prediction {
  double selected_variance;
  double success_rate;
  double narrow_limit_variance;
  double regression_slope;
};

Prediction predict(const CovarianceMatrix& cov, const SelectionBand& band);

}  // namespace twinbeam
