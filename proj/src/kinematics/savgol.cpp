#include "sts/kinematics/savgol.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "sts/errors.hpp"

namespace sts::kin {

void SavgolConfig::validate() const {
    if (window < 1 || window % 2 == 0) {
        throw ConfigError("savgol: window must be a positive odd integer, got " + std::to_string(window));
    }
    if (polyorder < 0 || polyorder >= window) {
        throw ConfigError("savgol: polyorder must satisfy 0 <= polyorder < window");
    }
    if (deriv < 0 || deriv > polyorder) {
        throw ConfigError("savgol: deriv must satisfy 0 <= deriv <= polyorder");
    }
}

namespace {

// Gaussian elimination with partial pivoting; matrices here are tiny
// (polyorder+1 square), so no factorization library is warranted.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        }
        if (a[pivot][col] == 0.0) throw ConfigError("savgol: singular normal equations");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int order) {
    const std::size_t n = x.size();
    const int m = order + 1;
    std::vector<std::vector<double>> g(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double pow_j = 1.0;
        std::vector<double> powers(2 * m - 1);
        for (int j = 0; j < 2 * m - 1; ++j) {
            powers[j] = pow_j;
            pow_j *= x[i];
        }
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) g[r][c] += powers[r + c];
            rhs[r] += powers[r] * y[i];
        }
    }
    return solve_linear(std::move(g), std::move(rhs));
}

double polyval_deriv(const std::vector<double>& beta, double x, int deriv) {
    double v = 0.0;
    for (int j = static_cast<int>(beta.size()) - 1; j >= deriv; --j) {
        double coeff = beta[j];
        for (int d = 0; d < deriv; ++d) coeff *= (j - d);
        v = v * x + coeff;
    }
    return v;
}

std::vector<double> savgol_coefficients(const SavgolConfig& config) {
    config.validate();
    const int h = config.window / 2;
    const int m = config.polyorder + 1;

    // Normal equations G = A^T A for the Vandermonde design at x = -h..h.
    std::vector<std::vector<double>> g(m, std::vector<double>(m, 0.0));
    for (int i = -h; i <= h; ++i) {
        std::vector<double> powers(2 * m - 1);
        double p = 1.0;
        for (int j = 0; j < 2 * m - 1; ++j) {
            powers[j] = p;
            p *= i;
        }
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) g[r][c] += powers[r + c];
    }

    // Row `deriv` of (A^T A)^-1 A^T, scaled by deriv! so the weights estimate
    // the derivative rather than the polynomial coefficient.
    std::vector<double> e(m, 0.0);
    e[config.deriv] = 1.0;
    const std::vector<double> z = solve_linear(std::move(g), std::move(e));

    std::vector<double> w(config.window);
    const double scale = factorial(config.deriv);
    for (int i = -h; i <= h; ++i) {
        double p = 1.0;
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            acc += z[j] * p;
            p *= i;
        }
        w[i + h] = scale * acc;
    }
    return w;
}

std::vector<double> savgol_filter(const std::vector<double>& signal, const SavgolConfig& config) {
    config.validate();
    const int n = static_cast<int>(signal.size());
    const int win = config.window;
    if (n < win) {
        throw DegenerateInputError("savgol: signal length " + std::to_string(n) + " shorter than window " +
                                   std::to_string(win));
    }
    const int h = win / 2;
    const std::vector<double> w = savgol_coefficients(config);

    // Work on the signal relative to its first sample: the fit is shift-
    // equivariant, and removing the offset keeps full precision for signals
    // riding on large baselines (absolute timestamps in particular).
    const double shift = signal[0];
    std::vector<double> centered(n);
    for (int i = 0; i < n; ++i) centered[i] = signal[i] - shift;
    const double restore = config.deriv == 0 ? shift : 0.0;

    std::vector<double> out(n);
    for (int i = h; i < n - h; ++i) {
        double acc = 0.0;
        for (int k = 0; k < win; ++k) acc += w[k] * centered[i - h + k];
        out[i] = acc + restore;
    }

    // Boundary half-windows: one polynomial per edge, fitted over the full
    // first/last window and evaluated at the uncovered positions.
    std::vector<double> xs(win), ys(win);
    for (int k = 0; k < win; ++k) {
        xs[k] = k;
        ys[k] = centered[k];
    }
    std::vector<double> beta = polyfit(xs, ys, config.polyorder);
    for (int i = 0; i < h; ++i) out[i] = polyval_deriv(beta, i, config.deriv) + restore;

    for (int k = 0; k < win; ++k) {
        xs[k] = k;
        ys[k] = centered[n - win + k];
    }
    beta = polyfit(xs, ys, config.polyorder);
    for (int i = n - h; i < n; ++i) out[i] = polyval_deriv(beta, i - (n - win), config.deriv) + restore;

    return out;
}

}  // namespace sts::kin
