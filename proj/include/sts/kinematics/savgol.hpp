#pragma once

#include <vector>

namespace sts::kin {

// Savitzky-Golay configuration. Defaults are the filter used for the
// bounding-box signal: 11-point window, cubic fit.
struct SavgolConfig {
    int window = 11;
    int polyorder = 3;
    int deriv = 0;

    void validate() const;  // throws ConfigError
};

// Convolution weights for the deriv-th derivative at the window centre, in
// per-sample units. Exact for polynomials of degree <= polyorder.
std::vector<double> savgol_coefficients(const SavgolConfig& config);

// Sliding least-squares filter. Interior points use the centre coefficients;
// each boundary half-window is handled by fitting a single polynomial to the
// first (last) `window` samples and evaluating its deriv-th derivative there.
std::vector<double> savgol_filter(const std::vector<double>& signal, const SavgolConfig& config);

// Least-squares polynomial fit y ~ sum_j beta_j x^j, degree `order`.
// Returns the order+1 coefficients. Used by the filter's boundary handling
// and exposed for the evaluation harness.
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int order);

// d-th derivative of the polynomial with coefficients beta at x.
double polyval_deriv(const std::vector<double>& beta, double x, int deriv);

}  // namespace sts::kin
