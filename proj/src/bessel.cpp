#include "phonobus/bessel.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "phonobus/error.hpp"

namespace phonobus {

namespace {

constexpr double kDomain = 1.0e3;
constexpr double kBig = 1.0e250;

void check_domain(double x) {
    if (!std::isfinite(x) || std::abs(x) >= kDomain)
        throw DomainError("bessel_j: |x| must be below 1e3, got " + std::to_string(x));
}

// J_n(x), n >= 0, by the ascending series; used for |x| <= 1 where it
// converges in a handful of terms without cancellation.
double series(int n, double x) {
    const double half = 0.5 * x;
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= half / k;
    double sum = term;
    const double q = -half * half;
    for (int k = 1; k < 60; ++k) {
        term *= q / (static_cast<double>(k) * (k + n));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// Start index for the downward recurrence: comfortably above both n and x.
int start_index(int n, double x) {
    const double base = std::max<double>(n, std::abs(x));
    int start = static_cast<int>(base + 30.0 + 10.0 * std::sqrt(base));
    return start + (start & 1);  // even
}

// Fills j[k] ∝ J_k(x) for k = 0..n_top by downward recurrence from `start`
// and normalises with J_0 + 2 Σ J_2k = 1. Requires x > 0.
void miller(double x, int n_top, std::vector<double>& j) {
    const int start = start_index(n_top, x);
    j.assign(n_top + 1, 0.0);
    double next = 0.0;  // J_{k+1}
    double cur = 1e-300;  // J_k, arbitrary seed
    double norm = 0.0;
    const double two_over_x = 2.0 / x;
    for (int k = start; k >= 1; --k) {
        const double prev = k * two_over_x * cur - next;  // J_{k-1}
        next = cur;
        cur = prev;
        if (std::abs(cur) > kBig) {
            cur *= 1.0 / kBig;
            next *= 1.0 / kBig;
            norm *= 1.0 / kBig;
            for (auto& v : j) v *= 1.0 / kBig;
        }
        const int idx = k - 1;
        if (idx <= n_top) j[idx] = cur;
        if (idx > 0 && idx % 2 == 0) norm += 2.0 * cur;
    }
    norm += cur;  // J_0 term
    const double inv = 1.0 / norm;
    for (auto& v : j) v *= inv;
}

}  // namespace

double bessel_j(int n, double x) {
    check_domain(x);
    double sign = 1.0;
    if (n < 0) {
        n = -n;
        if (n & 1) sign = -sign;
    }
    if (x < 0) {
        x = -x;
        if (n & 1) sign = -sign;
    }
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (x <= 1.0) return sign * series(n, x);
    std::vector<double> j;
    miller(x, n, j);
    return sign * j[n];
}

std::vector<double> bessel_j_table(int n_max, double x) {
    check_domain(x);
    if (n_max < 0) throw DomainError("bessel_j_table: n_max must be >= 0");
    std::vector<double> out(2 * n_max + 1, 0.0);
    if (x == 0.0) {
        out[n_max] = 1.0;
        return out;
    }
    std::vector<double> j(n_max + 1);
    const double ax = std::abs(x);
    if (ax <= 1.0) {
        for (int n = 0; n <= n_max; ++n) j[n] = series(n, ax);
    } else {
        miller(ax, n_max, j);
    }
    for (int n = 0; n <= n_max; ++n) {
        const double v = (x < 0 && (n & 1)) ? -j[n] : j[n];
        out[n_max + n] = v;
        out[n_max - n] = (n & 1) ? -v : v;
    }
    return out;
}

int bessel_cutoff(double x, double tol) {
    check_domain(x);
    const double ax = std::abs(x);
    if (ax == 0.0) return 0;
    // Past |x| the magnitude decays monotonically, so a table reaching well
    // beyond |x| contains the last order at or above tol.
    const int top = static_cast<int>(ax) + 64 + static_cast<int>(2.0 * std::sqrt(ax));
    const auto table = bessel_j_table(top, ax);
    for (int n = top; n > 0; --n)
        if (std::abs(table[top + n]) >= tol) return n;
    return 0;
}

}  // namespace phonobus
