#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "freedec/ensembles.hpp"
#include "freedec/errors.hpp"
#include "freedec/linalg.hpp"
#include "freedec/random.hpp"
#include "oracles.hpp"

using namespace freedec;

namespace {

HermitianMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a[i * n + j] = a[j * n + i] = rng.normal();
    return HermitianMatrix(n, std::move(a));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("identity has unit eigenvalues") {
    const auto s = eigenvalues_symmetric(HermitianMatrix::diagonal({1, 1, 1}));
    CHECK(s.eigenvalues.size() == 3);
    for (double v : s.eigenvalues) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.source_order == 3);
}

TEST_CASE("permutation similarity of diag(1,2,3)") {
    // P diag(3,1,2) P^T with a cyclic P, written out explicitly.
    Matrix m(3, 3);
    m(0, 0) = 2;
    m(1, 1) = 3;
    m(2, 2) = 1;
    const auto s = eigenvalues_symmetric(HermitianMatrix(m));
    CHECK(max_abs_diff(s.eigenvalues, {1, 2, 3}) < 1e-14);
}

TEST_CASE("GOE 50x50 agrees with inertia bisection") {
    const auto d = draw_wigner(50, 11);
    const auto s = eigenvalues_symmetric(d.matrix);
    const double bound = 4.0 * d.matrix.max_abs() * 50;
    for (int k = 0; k < 50; ++k) {
        const double ref = oracle::bisect_eigenvalue(d.matrix, k, -bound, bound);
        CHECK(std::abs(s.eigenvalues[k] - ref) <= 1e-10);
    }
}

TEST_CASE("300x300 spectrum agrees with Eigen's solver") {
    const auto a = random_symmetric(300, 5);
    Eigen::MatrixXd e(300, 300);
    for (int i = 0; i < 300; ++i)
        for (int j = 0; j < 300; ++j) e(i, j) = a(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
    std::vector<double> ref(es.eigenvalues().data(), es.eigenvalues().data() + 300);
    const auto s = eigenvalues_symmetric(a);
    CHECK(max_abs_diff(s.eigenvalues, ref) < 1e-11 * a.max_abs() * 300);
}

TEST_CASE("eigenvalues are sorted and preserve the trace") {
    const auto a = random_symmetric(120, 8);
    const auto s = eigenvalues_symmetric(a);
    CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    double sum = 0.0;
    for (double v : s.eigenvalues) sum += v;
    CHECK(std::abs(sum - a.trace()) <= 120 * 1e-10 * a.max_abs());
}

TEST_CASE("tridiagonal reduction preserves the spectrum") {
    const auto a = random_symmetric(40, 3);
    const Tridiagonal t = tridiagonalize(a);
    CHECK(t.diag.size() == 40);
    CHECK(t.off.size() == 39);
    const auto direct = tridiagonal_eigenvalues(t);
    const auto s = eigenvalues_symmetric(a);
    CHECK(max_abs_diff(direct, s.eigenvalues) < 1e-12 * 40 * a.max_abs());
    // Frobenius norm is invariant under the orthogonal similarity.
    double fa = 0.0, ft = 0.0;
    for (double v : a.entries()) fa += v * v;
    for (double v : t.diag) ft += v * v;
    for (double v : t.off) ft += 2 * v * v;
    CHECK(std::abs(fa - ft) <= 1e-12 * fa * 40);
}

TEST_CASE("non-finite or asymmetric input is rejected") {
    std::vector<double> bad{1, 2, 2, NAN};
    CHECK_THROWS_AS(HermitianMatrix(2, bad), InputError);
    std::vector<double> asym{1, 2, 3, 4};
    CHECK_THROWS_AS(HermitianMatrix(2, asym), InputError);
    CHECK_THROWS_AS(SpectrumSample::from_values({1.0, INFINITY}), InputError);
}

TEST_CASE("Golub-Welsch reproduces the 3-point Gauss-Legendre rule") {
    // Legendre recurrence: alpha_k = 0, beta_k = k/sqrt(4k^2-1).
    Tridiagonal t{{0, 0, 0}, {1.0 / std::sqrt(3.0), 2.0 / std::sqrt(15.0)}};
    const GaussRule r = gauss_rule_from_jacobi(t, 2.0);
    const double x = std::sqrt(0.6);
    REQUIRE(r.nodes.size() == 3);
    CHECK(r.nodes[0] == doctest::Approx(-x).epsilon(1e-14));
    CHECK(std::abs(r.nodes[1]) < 1e-14);
    CHECK(r.nodes[2] == doctest::Approx(x).epsilon(1e-14));
    CHECK(r.weights[0] == doctest::Approx(5.0 / 9).epsilon(1e-14));
    CHECK(r.weights[1] == doctest::Approx(8.0 / 9).epsilon(1e-14));
}

TEST_CASE("principal submatrix sampling") {
    const auto a = random_symmetric(8, 21);
    SUBCASE("full size is a permutation similarity") {
        const auto b = sample_principal_submatrix(a, 8, 4);
        CHECK(max_abs_diff(eigenvalues_symmetric(a).eigenvalues, eigenvalues_symmetric(b).eigenvalues) < 1e-10);
    }
    SUBCASE("k = 1 picks a diagonal entry") {
        const auto b = sample_principal_submatrix(a, 1, 9);
        bool found = false;
        for (std::size_t i = 0; i < 8; ++i) found |= b(0, 0) == a(i, i);
        CHECK(found);
    }
    SUBCASE("fixed seed replays") {
        const auto b1 = sample_principal_submatrix(a, 4, 77);
        const auto b2 = sample_principal_submatrix(a, 4, 77);
        CHECK(b1.entries() == b2.entries());
    }
    SUBCASE("k out of range") {
        CHECK_THROWS_AS(sample_principal_submatrix(a, 0, 1), InputError);
        CHECK_THROWS_AS(sample_principal_submatrix(a, 9, 1), InputError);
    }
}

TEST_CASE("random subsets are distinct and roughly uniform") {
    std::vector<int> hits(10, 0);
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
        const auto idx = random_subset(10, 3, seed);
        std::set<std::size_t> u(idx.begin(), idx.end());
        REQUIRE(u.size() == 3);
        for (auto i : idx) ++hits[i];
    }
    // Expected 1200 each; binomial sd ~ 29.
    for (int h : hits) CHECK(std::abs(h - 1200) < 150);
}

TEST_CASE("Cauchy interlacing for nested principal submatrices") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto a = random_symmetric(10, 100 + seed);
        std::vector<std::size_t> big{0, 2, 3, 5, 7, 8}, small{0, 2, 5, 7, 8};
        const auto lb = eigenvalues_symmetric(principal_submatrix(a, big)).eigenvalues;
        const auto ls = eigenvalues_symmetric(principal_submatrix(a, small)).eigenvalues;
        for (std::size_t i = 0; i < ls.size(); ++i) {
            CHECK(lb[i] <= ls[i] + 1e-12);
            CHECK(ls[i] <= lb[i + 1] + 1e-12);
        }
    }
}

TEST_CASE("Haar orthogonal matrices") {
    SUBCASE("n = 16 is orthogonal with unit columns") {
        const Matrix o = haar_orthogonal(16, 3);
        const Matrix g = multiply(transpose(o), o);
        double err = 0.0;
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = 0; j < 16; ++j) err = std::max(err, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
        CHECK(err <= 1e-12);
        for (std::size_t j = 0; j < 16; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < 16; ++i) s += o(i, j) * o(i, j);
            CHECK(std::abs(std::sqrt(s) - 1.0) <= 1e-12);
        }
    }
    SUBCASE("n = 1 gives both signs") {
        int plus = 0;
        for (std::uint64_t s = 0; s < 400; ++s) {
            const double v = haar_orthogonal(1, s)(0, 0);
            REQUIRE(std::abs(std::abs(v) - 1.0) < 1e-15);
            plus += v > 0;
        }
        CHECK(std::abs(plus - 200) < 50);
    }
    SUBCASE("first entry has the spherical marginal") {
        // O_11^2 ~ Beta(1/2, (n-1)/2), mean 1/n.
        double mean = 0.0;
        const int reps = 2000;
        for (int s = 0; s < reps; ++s) {
            const double v = haar_orthogonal(5, 1000 + s)(0, 0);
            mean += v * v / reps;
        }
        CHECK(std::abs(mean - 0.2) < 0.02);
    }
}

TEST_CASE("Cholesky factor reproduces the matrix") {
    Matrix x(6, 12);
    Rng rng(4);
    for (double& v : x.data) v = rng.normal();
    const HermitianMatrix g = gram(x);
    const Matrix l = cholesky(g);
    const Matrix back = multiply(l, transpose(l));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(back(i, j) - g(i, j)) < 1e-12 * g.max_abs());
    CHECK_THROWS_AS(cholesky(HermitianMatrix::diagonal({1.0, -1.0})), NumericalError);
}
