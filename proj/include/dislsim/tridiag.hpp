#pragma once

// Cyclic (periodic) tridiagonal solver: Thomas algorithm plus a rank-one
// Sherman-Morrison correction for the wrap-around entries.

#include <stdexcept>
#include <vector>

namespace dislsim {

/// Solve A x = rhs where A has diagonal d, subdiagonal a (a[i] multiplies
/// x[i-1]), superdiagonal c (c[i] multiplies x[i+1]), periodic wrap a[0] and
/// c[n-1] in the corners.
inline std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& a,
                                                    const std::vector<double>& d,
                                                    const std::vector<double>& c,
                                                    const std::vector<double>& rhs) {
    const int n = static_cast<int>(d.size());
    if (n < 3 || a.size() != size_t(n) || c.size() != size_t(n) || rhs.size() != size_t(n))
        throw std::invalid_argument("solve_cyclic_tridiagonal: need matching arrays, n >= 3");

    auto thomas = [&](std::vector<double> dd, std::vector<double> r) {
        // strictly tridiagonal solve with the given (modified) diagonal;
        // the corner entries a[0], c[n-1] are never touched here
        for (int i = 1; i < n; ++i) {
            if (dd[i - 1] == 0.0) throw std::runtime_error("cyclic tridiagonal: zero pivot");
            const double m = a[i] / dd[i - 1];
            dd[i] -= m * c[i - 1];
            r[i] -= m * r[i - 1];
        }
        std::vector<double> x(n);
        x[n - 1] = r[n - 1] / dd[n - 1];
        for (int i = n - 2; i >= 0; --i) x[i] = (r[i] - c[i] * x[i + 1]) / dd[i];
        return x;
    };

    // Sherman-Morrison: A = T + u v^T with u = (gamma, 0, ..., alpha)^T,
    // v = (1, 0, ..., beta/gamma)^T, alpha = a[0] (corner row 0, col n-1 is
    // c[n-1]? careful: corners are A(0, n-1) = a[0] and A(n-1, 0) = c[n-1]).
    const double alpha = c[n - 1];  // A(n-1, 0)
    const double beta = a[0];       // A(0, n-1)
    const double gamma = -d[0];
    std::vector<double> dmod = d;
    dmod[0] = d[0] - gamma;
    dmod[n - 1] = d[n - 1] - alpha * beta / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;

    const std::vector<double> y = thomas(dmod, rhs);
    const std::vector<double> q = thomas(dmod, u);
    const double fact = (y[0] + beta * y[n - 1] / gamma) / (1.0 + q[0] + beta * q[n - 1] / gamma);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = y[i] - fact * q[i];
    return x;
}

}  // namespace dislsim
