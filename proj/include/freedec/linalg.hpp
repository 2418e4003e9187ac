#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace freedec {

// Dense row-major matrix. Used for intermediate products and orthogonal factors.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Matrix identity(std::size_t n);
};

// Real symmetric matrix. Construction validates exact symmetry and finiteness.
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    HermitianMatrix(std::size_t n, std::vector<double> entries);
    explicit HermitianMatrix(const Matrix& m);

    // Symmetrizes (A + A^T)/2 instead of validating; for generators whose
    // construction is symmetric only up to rounding.
    static HermitianMatrix symmetrized(const Matrix& m);
    static HermitianMatrix diagonal(const std::vector<double>& d);

    std::size_t order() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    const std::vector<double>& entries() const { return a_; }
    double trace() const;
    double max_abs() const;
    Matrix to_matrix() const;

    void apply(const double* x, double* y) const;  // y = A x

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

struct SpectrumSample {
    std::vector<double> eigenvalues;  // ascending
    std::size_t source_order = 0;
    std::optional<std::size_t> parent_order;

    // Sorts, checks finiteness, sets source_order from the count.
    static SpectrumSample from_values(std::vector<double> values,
                                      std::optional<std::size_t> parent = std::nullopt);
};

struct Tridiagonal {
    std::vector<double> diag;  // n
    std::vector<double> off;   // n-1
};

Tridiagonal tridiagonalize(const HermitianMatrix& m);

// Implicit QL with Wilkinson shifts. When `first` is given it must hold the
// first row of the current eigenvector basis (e1 for Golub-Welsch) and is
// rotated along, so on return first[k] is the first component of eigenvector k.
// Eigenvalues are returned ascending (with `first` permuted to match).
std::vector<double> tridiagonal_eigenvalues(Tridiagonal t, std::vector<double>* first = nullptr);

SpectrumSample eigenvalues_symmetric(const HermitianMatrix& m);

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch: nodes/weights for the measure whose Jacobi matrix is t, with
// total mass mu0.
GaussRule gauss_rule_from_jacobi(const Tridiagonal& t, double mu0);

// Uniform random k-subset of {0..n-1}, in the order produced by a partial
// Fisher-Yates shuffle.
std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, std::uint64_t seed);

HermitianMatrix principal_submatrix(const HermitianMatrix& m, const std::vector<std::size_t>& idx);
HermitianMatrix sample_principal_submatrix(const HermitianMatrix& m, std::size_t k, std::uint64_t seed);

Matrix haar_orthogonal(std::size_t n, std::uint64_t seed);

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
// X X^T for a rows x cols matrix X.
HermitianMatrix gram(const Matrix& x);
// Lower-triangular L with L L^T = A; throws NumericalError if A is not positive definite.
Matrix cholesky(const HermitianMatrix& a);
// L^{-1} A L^{-T} for lower-triangular L.
HermitianMatrix congruence_inverse(const Matrix& l, const HermitianMatrix& a);

// Largest-magnitude eigenvalue by power iteration (used for scale estimates).
double power_iteration(const HermitianMatrix& m, std::uint64_t seed, int iters = 200);

}  // namespace freedec
