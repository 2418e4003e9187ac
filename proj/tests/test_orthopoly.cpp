#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "freedec/orthopoly.hpp"
#include "freedec/random.hpp"
#include "oracles.hpp"

using namespace freedec;
using std::numbers::pi;

TEST_CASE("U_k matches sin((k+1)theta)/sin(theta)") {
    double u[21];
    for (double th : {0.3, 1.1, 2.5}) {
        chebyshev_u_all(std::cos(th), 20, u);
        for (int k = 0; k <= 20; ++k) CHECK(u[k] == doctest::Approx(std::sin((k + 1) * th) / std::sin(th)).epsilon(1e-12));
    }
    chebyshev_u_all(1.0, 20, u);
    for (int k = 0; k <= 20; ++k) CHECK(u[k] == doctest::Approx(k + 1.0));
}

TEST_CASE("Jacobi polynomials are orthogonal under their weight") {
    for (auto [a, b] : {std::pair{0.5, 0.5}, {0.0, 0.0}, {1.5, -0.3}, {2.0, 4.0}}) {
        CAPTURE(a);
        CAPTURE(b);
        const int K = 12;
        for (int j = 0; j <= K; ++j)
            for (int k = j; k <= K; ++k) {
                auto f = [&](double t) {
                    std::vector<double> p(K + 1);
                    jacobi_p_all(a, b, t, K, p.data());
                    return jacobi_weight(a, b, t) * p[j] * p[k];
                };
                const double v = oracle::integrate(f, -1.0, 1.0);
                if (j == k) CHECK(v == doctest::Approx(jacobi_norm_sq(k, a, b)).epsilon(1e-9));
                else CHECK(std::abs(v) <= 1e-9 * jacobi_norm_sq(k, a, b));
            }
        double p1[2];
        jacobi_p_all(a, b, 1.0, 1, p1);
        CHECK(p1[1] == doctest::Approx(a + 1.0));
    }
}

TEST_CASE("Gauss-Jacobi rules integrate polynomials exactly") {
    const GaussRule& g = gauss_jacobi(20, 1.5, 0.5);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], 30);
    const double ref = oracle::integrate([](double t) { return jacobi_weight(1.5, 0.5, t) * std::pow(t, 30); }, -1, 1);
    CHECK(s == doctest::Approx(ref).epsilon(1e-12));
    CHECK(&gauss_jacobi(20, 1.5, 0.5) == &g);
}

TEST_CASE("Joukowski map") {
    CHECK(std::abs(joukowski_inverse(2.0) - (2.0 - std::sqrt(3.0))) < 1e-15);
    CHECK(std::abs(joukowski_inverse(-2.0) - (-2.0 + std::sqrt(3.0))) < 1e-15);
    // On the cut the upper limit lies on the lower unit semicircle.
    const cplx j = joukowski_inverse(0.5);
    CHECK(std::abs(j - cplx(0.5, -std::sqrt(0.75))) < 1e-15);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const cplx u(4 * rng.uniform() - 2, 3 * rng.uniform() - 1.5);
        const cplx J = joukowski_inverse(u);
        CHECK(std::abs(J) <= 1.0 + 1e-14);
        CHECK(std::abs(joukowski(J) - u) <= 1e-13);
    }
    const cplx w = 0.5 * std::polar(1.0, pi / 3);
    CHECK(std::abs(joukowski_inverse(joukowski(w)) - w) <= 1e-12);
    const cplx far(0.0, 1e4);
    CHECK(std::abs(joukowski_inverse(far) / (1.0 / (2.0 * far)) - 1.0) <= 1e-3);
    for (int i = 0; i <= 198; ++i) CHECK(std::abs(joukowski_inverse(cplx(-0.99 + 0.01 * i, 1e-6))) <= 1.0);
    CHECK(bernstein_rho(2.0) == doctest::Approx(2.0 + std::sqrt(3.0)));
    CHECK(bernstein_rho(0.3) == doctest::Approx(1.0));
}

TEST_CASE("Stieltjes transforms of the Chebyshev U basis are powers of J") {
    Rng rng(17);
    for (int k = 0; k <= 5; ++k) {
        for (int i = 0; i < 20; ++i) {
            const cplx u(3 * rng.uniform() - 1.5, 0.05 + rng.uniform());
            auto rho = [k](double t) {
                double v[6];
                chebyshev_u_all(t, k, v);
                return v[k] * std::sqrt(1 - t * t);
            };
            const cplx ref = oracle::stieltjes(rho, -1.0, 1.0, u);
            CHECK(std::abs(-pi * std::pow(joukowski_inverse(u), k + 1) - ref) <= 1e-8);
        }
    }
}

namespace {

// int w(t)/(t-u) dt after t = cos(theta), which removes the endpoint singularities
// of weights with exponents >= -1/2.
cplx q0_theta(double a, double b, cplx u) {
    auto g = [&](double th) {
        const double c = std::cos(th);
        return std::pow(1 - c, a + 0.5) * std::pow(1 + c, b + 0.5) / (cplx(c) - u);
    };
    return {oracle::integrate([&](double th) { return g(th).real(); }, 0.0, pi),
            oracle::integrate([&](double th) { return g(th).imag(); }, 0.0, pi)};
}

}  // namespace

TEST_CASE("Q_0 against quadrature") {
    for (auto [a, b] : {std::pair{0.5, 0.5}, {-0.5, -0.5}, {0.0, 0.0}, {1.5, 0.7}, {-0.3, 2.0}}) {
        CAPTURE(a);
        CAPTURE(b);
        auto w = [a, b](double t) { return jacobi_weight(a, b, t); };
        for (cplx u : {cplx(0.3, 0.2), cplx(-0.8, 0.05), cplx(1.7, 0.0), cplx(-2.5, -0.4), cplx(0.0, 3.0)}) {
            const cplx ref = q0_theta(a, b, u);
            CHECK(std::abs(jacobi_q0(a, b, u) - ref) <= 1e-9 * (1 + std::abs(ref)));
        }
        // Upper limit on the cut: principal value plus i*pi*w(x).
        for (double x : {-0.6, 0.1, 0.45}) {
            const cplx q = jacobi_q0(a, b, x);
            CHECK(q.imag() == doctest::Approx(pi * w(x)).epsilon(1e-10));
            CHECK(std::abs(q.real() - oracle::principal_value(w, -1.0, 1.0, x)) <= 1e-7 * (1 + std::abs(q.real())));
        }
    }
}

TEST_CASE("Q_k by Gauss-Jacobi away from the cut") {
    const double a = 1.5, b = 0.7;
    for (int k : {0, 3, 8}) {
        auto rho = [&](double t) {
            std::vector<double> p(k + 1);
            jacobi_p_all(a, b, t, k, p.data());
            return jacobi_weight(a, b, t) * p[k];
        };
        for (cplx u : {cplx(1.5, 0.3), cplx(0.0, 1.0), cplx(-3.0, 0.0)}) {
            const cplx ref = oracle::stieltjes(rho, -1.0, 1.0, u.imag() == 0.0 ? u + cplx(0, 1e-300) : u);
            CHECK(std::abs(jacobi_qk_quadrature(k, a, b, u, 96) - ref) <= 1e-10 * (1 + std::abs(ref)));
        }
    }
}
