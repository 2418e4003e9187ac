#include "freedec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "freedec/errors.hpp"
#include "freedec/random.hpp"

namespace freedec {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

HermitianMatrix::HermitianMatrix(std::size_t n, std::vector<double> entries) : n_(n), a_(std::move(entries)) {
    if (n == 0) throw InputError("matrix order must be at least 1");
    if (a_.size() != n * n) throw InputError("entry count does not match order");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = a_[i * n + j];
            if (!std::isfinite(v))
                throw InputError("non-finite entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            if (j > i && v != a_[j * n + i])
                throw InputError("matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
}

HermitianMatrix::HermitianMatrix(const Matrix& m) {
    if (m.rows != m.cols) throw InputError("matrix is not square");
    *this = HermitianMatrix(m.rows, m.data);
}

HermitianMatrix HermitianMatrix::symmetrized(const Matrix& m) {
    if (m.rows != m.cols) throw InputError("matrix is not square");
    const std::size_t n = m.rows;
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i * n + i] = m(i, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 0.5 * (m(i, j) + m(j, i));
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    return HermitianMatrix(n, std::move(a));
}

HermitianMatrix HermitianMatrix::diagonal(const std::vector<double>& d) {
    const std::size_t n = d.size();
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] = d[i];
    return HermitianMatrix(n, std::move(a));
}

double HermitianMatrix::trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += a_[i * n_ + i];
    return s;
}

double HermitianMatrix::max_abs() const {
    double s = 0.0;
    for (double v : a_) s = std::max(s, std::abs(v));
    return s;
}

Matrix HermitianMatrix::to_matrix() const {
    Matrix m(n_, n_);
    m.data = a_;
    return m;
}

void HermitianMatrix::apply(const double* x, double* y) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const double* row = &a_[i * n_];
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

SpectrumSample SpectrumSample::from_values(std::vector<double> values, std::optional<std::size_t> parent) {
    if (values.empty()) throw InputError("spectrum sample is empty");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i])) throw InputError("non-finite eigenvalue at index " + std::to_string(i));
    std::sort(values.begin(), values.end());
    SpectrumSample s;
    s.source_order = values.size();
    s.eigenvalues = std::move(values);
    s.parent_order = parent;
    if (parent && *parent < s.source_order) throw InputError("parent order smaller than sample order");
    return s;
}

Tridiagonal tridiagonalize(const HermitianMatrix& m) {
    const std::size_t n = m.order();
    std::vector<double> a = m.entries();
    Tridiagonal t;
    t.diag.assign(n, 0.0);
    t.off.assign(n > 0 ? n - 1 : 0, 0.0);
    std::vector<double> v(n), p(n);

    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t s = k + 1, len = n - s;
        double norm = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            v[i] = a[(s + i) * n + k];
            norm = std::hypot(norm, v[i]);
        }
        t.diag[k] = a[k * n + k];
        if (norm == 0.0) {
            t.off[k] = 0.0;
            continue;
        }
        const double alpha = v[0] > 0 ? -norm : norm;
        v[0] -= alpha;
        double vv = 0.0;
        for (std::size_t i = 0; i < len; ++i) vv += v[i] * v[i];
        t.off[k] = alpha;
        if (vv == 0.0) continue;
        const double beta = 2.0 / vv;

        double vp = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const double* row = &a[(s + i) * n + s];
            double acc = 0.0;
            for (std::size_t j = 0; j < len; ++j) acc += row[j] * v[j];
            p[i] = beta * acc;
            vp += v[i] * p[i];
        }
        const double kk = 0.5 * beta * vp;
        for (std::size_t i = 0; i < len; ++i) p[i] -= kk * v[i];
        for (std::size_t i = 0; i < len; ++i) {
            double* row = &a[(s + i) * n + s];
            const double vi = v[i], pi = p[i];
            for (std::size_t j = 0; j < len; ++j) row[j] -= vi * p[j] + pi * v[j];
        }
    }
    if (n >= 2) {
        t.diag[n - 2] = a[(n - 2) * n + (n - 2)];
        t.off[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    if (n >= 1) t.diag[n - 1] = a[(n - 1) * n + (n - 1)];
    return t;
}

std::vector<double> tridiagonal_eigenvalues(Tridiagonal t, std::vector<double>* first) {
    std::vector<double>& d = t.diag;
    const std::size_t n = d.size();
    if (n == 0) return {};
    std::vector<double> e(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = t.off[i];
    if (first && first->size() != n) throw InputError("first-component vector has wrong length");
    const int cap = 30;

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m == l) break;
            if (++iter > cap) throw NumericalError("QL iteration did not converge for eigenvalue " + std::to_string(l), static_cast<long>(l));

            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            std::size_t i;
            for (i = m; i-- > l;) {
                double f = s * e[i];
                double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if (first) {
                    double& z0 = (*first)[i];
                    double& z1 = (*first)[i + 1];
                    double fz = z1;
                    z1 = s * z0 + c * fz;
                    z0 = c * z0 - s * fz;
                }
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = d[order[i]];
    if (first) {
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = (*first)[order[i]];
        *first = std::move(f);
    }
    return out;
}

SpectrumSample eigenvalues_symmetric(const HermitianMatrix& m) {
    if (m.order() == 0) throw InputError("empty matrix");
    for (double v : m.entries())
        if (!std::isfinite(v)) throw InputError("non-finite matrix entry");
    auto ev = tridiagonal_eigenvalues(tridiagonalize(m));
    return SpectrumSample::from_values(std::move(ev));
}

GaussRule gauss_rule_from_jacobi(const Tridiagonal& t, double mu0) {
    const std::size_t n = t.diag.size();
    std::vector<double> first(n, 0.0);
    if (n > 0) first[0] = 1.0;
    GaussRule g;
    g.nodes = tridiagonal_eigenvalues(t, &first);
    g.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.weights[i] = mu0 * first[i] * first[i];
    return g;
}

std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > n) throw InputError("subset size " + std::to_string(k) + " out of range [1, " + std::to_string(n) + "]");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(k);
    return perm;
}

HermitianMatrix principal_submatrix(const HermitianMatrix& m, const std::vector<std::size_t>& idx) {
    const std::size_t k = idx.size();
    std::vector<double> a(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        if (idx[i] >= m.order()) throw InputError("index out of range");
        for (std::size_t j = 0; j < k; ++j) a[i * k + j] = m(idx[i], idx[j]);
    }
    return HermitianMatrix(k, std::move(a));
}

HermitianMatrix sample_principal_submatrix(const HermitianMatrix& m, std::size_t k, std::uint64_t seed) {
    return principal_submatrix(m, random_subset(m.order(), k, seed));
}

Matrix haar_orthogonal(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InputError("order must be at least 1");
    Rng rng(seed);
    // Work on columns stored as rows of `g` (g[j] is column j) for contiguous access.
    Matrix g(n, n);
    for (double& v : g.data) v = rng.normal();

    std::vector<std::vector<double>> reflectors(n);
    std::vector<double> sign(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        double* col = &g.data[k * n];
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm = std::hypot(norm, col[i]);
        const double alpha = col[k] > 0 ? -norm : norm;  // R_kk
        sign[k] = alpha < 0 ? -1.0 : 1.0;
        std::vector<double> v(col + k, col + n);
        v[0] -= alpha;
        double vv = 0.0;
        for (double x : v) vv += x * x;
        if (vv > 0.0) {
            const double beta = 2.0 / vv;
            for (std::size_t j = k + 1; j < n; ++j) {
                double* cj = &g.data[j * n];
                double s = 0.0;
                for (std::size_t i = k; i < n; ++i) s += v[i - k] * cj[i];
                s *= beta;
                for (std::size_t i = k; i < n; ++i) cj[i] -= s * v[i - k];
            }
            for (double& x : v) x *= std::sqrt(beta);
        } else {
            v.assign(v.size(), 0.0);
        }
        reflectors[k] = std::move(v);
    }

    // Q = H_0 H_1 ... H_{n-1}; accumulate on columns of the identity, again stored transposed.
    Matrix qt = Matrix::identity(n);  // qt row j = column j of Q
    for (std::size_t k = n; k-- > 0;) {
        const auto& v = reflectors[k];
        for (std::size_t j = 0; j < n; ++j) {
            double* cj = &qt.data[j * n];
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += v[i - k] * cj[i];
            if (s == 0.0) continue;
            for (std::size_t i = k; i < n; ++i) cj[i] -= s * v[i - k];
        }
    }
    Matrix q(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) q(i, j) = sign[j] * qt(j, i);
    return q;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw InputError("dimension mismatch in multiply");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* ci = &c.data[i * c.cols];
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = &b.data[k * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

HermitianMatrix gram(const Matrix& x) {
    const std::size_t n = x.rows, d = x.cols;
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = &x.data[i * d];
        for (std::size_t j = 0; j <= i; ++j) {
            const double* xj = &x.data[j * d];
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += xi[k] * xj[k];
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    return HermitianMatrix(n, std::move(a));
}

Matrix cholesky(const HermitianMatrix& a) {
    const std::size_t n = a.order();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double* li = &l.data[i * n];
        for (std::size_t j = 0; j <= i; ++j) {
            const double* lj = &l.data[j * n];
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            if (i == j) {
                if (!(s > 0.0)) throw NumericalError("matrix is not positive definite", static_cast<long>(i));
                li[i] = std::sqrt(s);
            } else {
                li[j] = s / lj[j];
            }
        }
    }
    return l;
}

namespace {
// Solve L Y = B in place (B overwritten by Y), rows contiguous.
void forward_solve_rows(const Matrix& l, Matrix& b) {
    const std::size_t n = l.rows, m = b.cols;
    for (std::size_t i = 0; i < n; ++i) {
        double* bi = &b.data[i * m];
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = l(i, k);
            if (lik == 0.0) continue;
            const double* bk = &b.data[k * m];
            for (std::size_t j = 0; j < m; ++j) bi[j] -= lik * bk[j];
        }
        const double inv = 1.0 / l(i, i);
        for (std::size_t j = 0; j < m; ++j) bi[j] *= inv;
    }
}
}  // namespace

HermitianMatrix congruence_inverse(const Matrix& l, const HermitianMatrix& a) {
    Matrix y = a.to_matrix();
    forward_solve_rows(l, y);      // L^{-1} A
    Matrix z = transpose(y);       // A L^{-T}
    forward_solve_rows(l, z);      // L^{-1} A L^{-T}
    return HermitianMatrix::symmetrized(z);
}

double power_iteration(const HermitianMatrix& m, std::uint64_t seed, int iters) {
    const std::size_t n = m.order();
    Rng rng(seed);
    std::vector<double> x(n), y(n);
    for (double& v : x) v = rng.normal();
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        double nx = 0.0;
        for (double v : x) nx += v * v;
        nx = std::sqrt(nx);
        if (nx == 0.0) return 0.0;
        for (double& v : x) v /= nx;
        m.apply(x.data(), y.data());
        double rq = 0.0;
        for (std::size_t i = 0; i < n; ++i) rq += x[i] * y[i];
        lambda = rq;
        x.swap(y);
    }
    return std::abs(lambda);
}

}  // namespace freedec
