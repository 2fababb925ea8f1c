#pragma once

#include <vector>

namespace phonobus {

// Bessel function of the first kind J_n(x) for integer order.
// Backward (Miller) recurrence normalised by J_0 + 2 Σ J_2k = 1, with a
// power series for small |x|. Throws DomainError for |x| >= 1e3.
double bessel_j(int n, double x);

// J_n(x) for n = -n_max..n_max from a single recurrence sweep;
// element [n + n_max] holds J_n(x).
std::vector<double> bessel_j_table(int n_max, double x);

// Smallest N >= 0 such that |J_n(x)| < tol for every |n| > N.
int bessel_cutoff(double x, double tol = 1e-6);

}  // namespace phonobus
