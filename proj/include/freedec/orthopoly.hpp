#pragma once

#include <complex>
#include <vector>

#include "freedec/linalg.hpp"

namespace freedec {

using cplx = std::complex<double>;

// U_0..U_K at t (real or complex), by the three-term recurrence.
template <class T>
void chebyshev_u_all(T t, int K, T* out) {
    if (K < 0) return;
    out[0] = T(1);
    if (K >= 1) out[1] = T(2) * t;
    for (int k = 2; k <= K; ++k) out[k] = T(2) * t * out[k - 1] - out[k - 2];
}

// Jacobi P_0..P_K^{(a,b)} at t with the standard normalization P_k(1) = binom(k+a, k).
template <class T>
void jacobi_p_all(double a, double b, T t, int K, T* out) {
    if (K < 0) return;
    out[0] = T(1);
    if (K >= 1) out[1] = T(0.5 * (a + b + 2.0)) * t + T(0.5 * (a - b));
    for (int n = 2; n <= K; ++n) {
        const double s = 2.0 * n + a + b;
        const double c0 = 2.0 * n * (n + a + b) * (s - 2.0);
        const double c1 = (s - 1.0) * s * (s - 2.0);
        const double c2 = (s - 1.0) * (a * a - b * b);
        const double c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        out[n] = ((T(c1) * t + T(c2)) * out[n - 1] - T(c3) * out[n - 2]) / T(c0);
    }
}

// ||P_k||^2 = int_{-1}^{1} (1-t)^a (1+t)^b P_k(t)^2 dt.
double jacobi_norm_sq(int k, double a, double b);

// Jacobi weight (1-t)^a (1+t)^b, zero outside [-1,1].
double jacobi_weight(double a, double b, double t);

// n-point Gauss-Jacobi rule. Rules are cached process-wide (thread-safe).
const GaussRule& gauss_jacobi(int n, double a, double b);

// Gauss-Legendre on [-1,1].
inline const GaussRule& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

// Inverse Joukowski map: J(u) = u - sqrt(u^2-1) with the root chosen so |J| <= 1
// off [-1,1]; on the cut the C+ limit is returned.
cplx joukowski_inverse(cplx u);
inline cplx joukowski(cplx w) { return 0.5 * (w + 1.0 / w); }

// Q_0(u) = int w(t)/(t-u) dt for u off [-1,1]; real u inside the interval is
// taken as the C+ limit. Closed forms for (1/2,1/2), (-1/2,-1/2), (0,0);
// otherwise an endpoint-aware numerical integral with the pole subtracted.
cplx jacobi_q0(double a, double b, cplx u);

// Q_k(u) by a dedicated n-point Gauss-Jacobi rule (accurate away from the cut).
cplx jacobi_qk_quadrature(int k, double a, double b, cplx u, int n);

// Radius of the Bernstein ellipse through u: |u + sqrt(u^2-1)| >= 1.
double bernstein_rho(cplx u);

}  // namespace freedec
