#include "freedec/orthopoly.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "freedec/errors.hpp"

namespace freedec {

double jacobi_norm_sq(int k, double a, double b) {
    if (k < 0) throw InputError("negative degree");
    const double ab = a + b;
    if (k == 0) {
        return std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
    }
    return std::exp((ab + 1.0) * std::log(2.0) - std::log(2.0 * k + ab + 1.0) + std::lgamma(k + a + 1.0) +
                    std::lgamma(k + b + 1.0) - std::lgamma(k + 1.0) - std::lgamma(k + ab + 1.0));
}

double jacobi_weight(double a, double b, double t) {
    if (t <= -1.0 || t >= 1.0) {
        if (t == 1.0 && a == 0.0) return std::pow(2.0, b);
        if (t == -1.0 && b == 0.0) return std::pow(2.0, a);
        return 0.0;
    }
    return std::pow(1.0 - t, a) * std::pow(1.0 + t, b);
}

const GaussRule& gauss_jacobi(int n, double a, double b) {
    if (n < 1) throw InputError("Gauss rule needs at least one node");
    if (!(a > -1.0 && b > -1.0)) throw InputError("Jacobi parameters must exceed -1");
    static std::mutex mu;
    static std::map<std::tuple<int, double, double>, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(n, a, b);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;

    Tridiagonal t;
    t.diag.resize(n);
    t.off.resize(n - 1);
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        t.diag[k] = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        double v;
        if (k == 1)
            v = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        else
            v = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
        t.off[k - 1] = std::sqrt(v);
    }
    auto rule = std::make_unique<GaussRule>(gauss_rule_from_jacobi(t, jacobi_norm_sq(0, a, b)));
    auto& ref = *rule;
    cache.emplace(key, std::move(rule));
    return ref;
}

namespace {
cplx cut_sqrt(cplx u) {
    // sqrt(u-1) sqrt(u+1): analytic off [-1,1], ~u at infinity.
    if (u.imag() == 0.0) u = cplx(u.real(), 0.0);
    return std::sqrt(u - 1.0) * std::sqrt(u + 1.0);
}
}  // namespace

cplx joukowski_inverse(cplx u) {
    const cplx s = cut_sqrt(u);
    // u + s is the larger-modulus root of w^2 - 2uw + 1, so 1/(u+s) is the stable small one.
    return 1.0 / (u + s);
}

double bernstein_rho(cplx u) { return std::abs(u + cut_sqrt(u)); }

cplx jacobi_q0(double a, double b, cplx u) {
    using std::numbers::pi;
    if (u.imag() == 0.0) u = cplx(u.real(), 0.0);
    if (a == 0.5 && b == 0.5) return -pi * joukowski_inverse(u);
    if (a == -0.5 && b == -0.5) return -pi / cut_sqrt(u);
    const cplx logterm = std::log((u - 1.0) / (u + 1.0));
    if (a == 0.0 && b == 0.0) return logterm;

    // Subtract the pole: int (w(t) - w(x0))/(t-u) dt + w(x0) * log((u-1)/(u+1)),
    // splitting at x0 = Re u so the kink sits on an endpoint of each piece.
    const double x0 = std::clamp(u.real(), -1.0 + 1e-12, 1.0 - 1e-12);
    const double w0 = jacobi_weight(a, b, x0);
    const bool near_cut = std::abs(u.real()) < 1.0 && std::abs(u.imag()) < 0.5;
    const double shift = near_cut ? w0 : 0.0;

    boost::math::quadrature::tanh_sinh<double> ts(10);
    auto piece = [&](double lo, double hi) {
        auto fr = [&](double t) { return ((jacobi_weight(a, b, t) - shift) / (cplx(t) - u)).real(); };
        auto fi = [&](double t) { return ((jacobi_weight(a, b, t) - shift) / (cplx(t) - u)).imag(); };
        if (hi - lo <= 0.0) return cplx(0.0);
        return cplx(ts.integrate(fr, lo, hi, 1e-13), ts.integrate(fi, lo, hi, 1e-13));
    };
    cplx r = near_cut ? piece(-1.0, x0) + piece(x0, 1.0) : piece(-1.0, 1.0);
    return r + shift * logterm;
}

cplx jacobi_qk_quadrature(int k, double a, double b, cplx u, int n) {
    const GaussRule& g = gauss_jacobi(n, a, b);
    std::vector<double> p(k + 1);
    cplx s = 0.0;
    for (int i = 0; i < n; ++i) {
        jacobi_p_all(a, b, g.nodes[i], k, p.data());
        s += g.weights[i] * p[k] / (g.nodes[i] - u);
    }
    return s;
}

}  // namespace freedec
