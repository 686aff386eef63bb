#include "csp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csp::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double sq_diff(double x, double y) {
    const double d = x - y;
    return d * d;
}

// soft-min of the three DP predecessors, stabilized
inline double soft_min3(double a, double b, double c, double gamma) {
    const double na = -a / gamma;
    const double nb = -b / gamma;
    const double nc = -c / gamma;
    const double m = std::max(na, std::max(nb, nc));
    if (m == -kInf) return kInf;  // all predecessors unreachable
    const double sum = std::exp(na - m) + std::exp(nb - m) + std::exp(nc - m);
    return -gamma * (m + std::log(sum));
}

inline void check_nonempty(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptySeriesError("DTW inputs must be non-empty");
}

}  // namespace

double soft_min(std::span<const double> values, double gamma) {
    if (values.empty()) throw EmptyListError("soft_min of empty list");
    if (!(gamma > 0.0)) throw ConfigInvalidError("soft_min gamma must be > 0");
    double m = -kInf;
    for (double q : values) m = std::max(m, -q / gamma);
    double sum = 0.0;
    for (double q : values) sum += std::exp(-q / gamma - m);
    return -gamma * (m + std::log(sum));
}

double dtw(std::span<const double> a, std::span<const double> b, DpWorkspace& ws) {
    check_nonempty(a, b);
    const std::size_t m = a.size(), n = b.size();
    ws.r.assign((m + 1) * (n + 1), kInf);
    auto R = [&](std::size_t i, std::size_t j) -> double& { return ws.r[i * (n + 1) + j]; };
    R(0, 0) = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            const double best = std::min(R(i - 1, j - 1), std::min(R(i - 1, j), R(i, j - 1)));
            R(i, j) = sq_diff(a[i - 1], b[j - 1]) + best;
        }
    }
    return R(m, n);
}

double dtw(std::span<const double> a, std::span<const double> b) {
    DpWorkspace ws;
    return dtw(a, b, ws);
}

double soft_dtw(std::span<const double> a, std::span<const double> b, double gamma, DpWorkspace& ws) {
    check_nonempty(a, b);
    if (!(gamma > 0.0)) throw ConfigInvalidError("soft_dtw gamma must be > 0");
    const std::size_t m = a.size(), n = b.size();
    ws.r.assign((m + 1) * (n + 1), kInf);
    auto R = [&](std::size_t i, std::size_t j) -> double& { return ws.r[i * (n + 1) + j]; };
    R(0, 0) = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            R(i, j) = sq_diff(a[i - 1], b[j - 1]) +
                      soft_min3(R(i - 1, j - 1), R(i - 1, j), R(i, j - 1), gamma);
        }
    }
    return R(m, n);
}

double soft_dtw(std::span<const double> a, std::span<const double> b, double gamma) {
    DpWorkspace ws;
    return soft_dtw(a, b, gamma, ws);
}

double soft_dtw_grad(std::span<const double> a, std::span<const double> b, double gamma,
                     std::span<double> grad_out, DpWorkspace& ws) {
    check_nonempty(a, b);
    if (!(gamma > 0.0)) throw ConfigInvalidError("soft_dtw_grad gamma must be > 0");
    if (grad_out.size() != a.size()) throw LengthMismatchError("grad_out length != series length");

    const std::size_t m = a.size(), n = b.size();

    // Forward pass on a padded (m+2)x(n+2) grid so the backward recursion can
    // index one row/column past the last cell.
    ws.r.assign((m + 2) * (n + 2), kInf);
    ws.d.assign((m + 2) * (n + 2), 0.0);
    ws.e.assign((m + 2) * (n + 2), 0.0);
    auto R = [&](std::size_t i, std::size_t j) -> double& { return ws.r[i * (n + 2) + j]; };
    auto D = [&](std::size_t i, std::size_t j) -> double& { return ws.d[i * (n + 2) + j]; };
    auto E = [&](std::size_t i, std::size_t j) -> double& { return ws.e[i * (n + 2) + j]; };

    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= n; ++j) D(i, j) = sq_diff(a[i - 1], b[j - 1]);

    R(0, 0) = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            R(i, j) = D(i, j) + soft_min3(R(i - 1, j - 1), R(i - 1, j), R(i, j - 1), gamma);
        }
    }
    const double value = R(m, n);

    // Backward pass: E(i,j) is the probability weight of cell (i,j) over the
    // Gibbs distribution on alignment paths.
    for (std::size_t i = 1; i <= m; ++i) R(i, n + 1) = -kInf;
    for (std::size_t j = 1; j <= n; ++j) R(m + 1, j) = -kInf;
    R(m + 1, n + 1) = value;
    E(m + 1, n + 1) = 1.0;

    for (std::size_t j = n; j >= 1; --j) {
        for (std::size_t i = m; i >= 1; --i) {
            const double r0 = R(i, j);
            const double wa = std::exp((R(i + 1, j) - r0 - D(i + 1, j)) / gamma);
            const double wb = std::exp((R(i, j + 1) - r0 - D(i, j + 1)) / gamma);
            const double wc = std::exp((R(i + 1, j + 1) - r0 - D(i + 1, j + 1)) / gamma);
            E(i, j) = E(i + 1, j) * wa + E(i, j + 1) * wb + E(i + 1, j + 1) * wc;
        }
    }

    // Chain rule through the squared-difference cell costs.
    for (std::size_t i = 1; i <= m; ++i) {
        double g = 0.0;
        for (std::size_t j = 1; j <= n; ++j) g += E(i, j) * 2.0 * (a[i - 1] - b[j - 1]);
        grad_out[i - 1] = g;
    }
    return value;
}

double soft_dtw_grad(std::span<const double> a, std::span<const double> b, double gamma,
                     std::span<double> grad_out) {
    DpWorkspace ws;
    return soft_dtw_grad(a, b, gamma, grad_out, ws);
}

}  // namespace csp::metrics
