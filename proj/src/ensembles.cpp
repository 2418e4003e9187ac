#include "freedec/ensembles.hpp"

#include <cmath>
#include <numbers>

#include "freedec/errors.hpp"
#include "freedec/random.hpp"

namespace freedec {

std::string law_name(LawKind k) {
    switch (k) {
        case LawKind::Wigner: return "wigner";
        case LawKind::MarchenkoPastur: return "mp";
        case LawKind::KestenMcKay: return "kesten-mckay";
        case LawKind::Wachter: return "wachter";
        case LawKind::Meixner: return "meixner";
    }
    return "?";
}

LawKind parse_law_name(const std::string& s) {
    if (s == "wigner") return LawKind::Wigner;
    if (s == "mp" || s == "marchenko-pastur") return LawKind::MarchenkoPastur;
    if (s == "kesten-mckay" || s == "km") return LawKind::KestenMcKay;
    if (s == "wachter") return LawKind::Wachter;
    if (s == "meixner") return LawKind::Meixner;
    throw InputError("unknown ensemble '" + s + "'");
}

double EnsembleLaw::param(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw InputError("law has no parameter '" + name + "'");
    return it->second;
}

EnsembleLaw EnsembleLaw::wigner(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InputError("Wigner radius must be positive");
    EnsembleLaw l(LawKind::Wigner);
    l.params_ = {{"r", r}};
    l.p_ = {0.0, -1.0, 0.0};
    l.q_ = {r * r / 4.0, 0.0, 0.0};
    l.finish();
    return l;
}

EnsembleLaw EnsembleLaw::marchenko_pastur(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("Marchenko-Pastur ratio must be positive");
    EnsembleLaw l(LawKind::MarchenkoPastur);
    l.params_ = {{"lambda", lambda}};
    l.p_ = {1.0 - lambda, -1.0, 0.0};
    l.q_ = {0.0, lambda, 0.0};
    l.finish();
    return l;
}

EnsembleLaw EnsembleLaw::kesten_mckay(double d) {
    if (!(d >= 2.0) || !std::isfinite(d)) throw InputError("Kesten-McKay degree must be at least 2");
    EnsembleLaw l(LawKind::KestenMcKay);
    l.params_ = {{"d", d}};
    l.p_ = {0.0, (2.0 - d) / (d - 1.0), 0.0};
    l.q_ = {d * d / (d - 1.0), 0.0, -1.0 / (d - 1.0)};
    l.finish();
    return l;
}

EnsembleLaw EnsembleLaw::wachter(double a, double b) {
    if (!(a > 0.0 && b > 0.0 && a + b > 1.0)) throw InputError("Wachter parameters need a, b > 0 and a + b > 1");
    EnsembleLaw l(LawKind::Wachter);
    l.params_ = {{"a", a}, {"b", b}};
    const double s = a + b - 1.0;
    l.p_ = {(a - 1.0) / s, -(a + b - 2.0) / s, 0.0};
    l.q_ = {0.0, 1.0 / s, -1.0 / s};
    l.finish();
    return l;
}

EnsembleLaw EnsembleLaw::meixner(double a, double b, double c) {
    if (!(b > 0.0 && c > 0.0 && c <= 1.0) || !std::isfinite(a)) throw InputError("Meixner parameters need b > 0 and 0 < c <= 1");
    EnsembleLaw l(LawKind::Meixner);
    l.params_ = {{"a", a}, {"b", b}, {"c", c}};
    l.p_ = {-a * c, -(2.0 - c), 0.0};
    l.q_ = {b * c * c, a * c, 1.0 - c};
    l.finish();
    return l;
}

void EnsembleLaw::finish() {
    const double c2 = p_[1] * p_[1] - 4.0 * q_[2];
    const double c1 = 2.0 * p_[0] * p_[1] - 4.0 * q_[1];
    const double c0 = p_[0] * p_[0] - 4.0 * q_[0];
    if (!(c2 > 0.0)) throw InputError("law has no compact support");
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (!(disc > 0.0)) throw InputError("law has degenerate support");
    const double sq = std::sqrt(disc);
    // Stable quadratic roots.
    const double qq = -0.5 * (c1 + std::copysign(sq, c1));
    double r1 = qq / c2, r2 = (qq != 0.0) ? c0 / qq : -r1;
    if (r1 > r2) std::swap(r1, r2);
    lo_ = r1;
    hi_ = r2;

    const double w = hi_ - lo_;
    const cplx z0((lo_ + hi_) / 2.0, 1e3 * w);
    const cplx s = disc_root(z0), p = eval_P(z0), q = eval_Q(z0);
    const cplx mp = (p + s) / (2.0 * q), mm = (p - s) / (2.0 * q);
    sigma_ = std::abs(z0 * mp + 1.0) < std::abs(z0 * mm + 1.0) ? 1.0 : -1.0;

    // Atoms: real zeros of Q outside the support where the principal root has a pole.
    std::vector<double> zeros;
    if (q_[2] != 0.0) {
        const double dq = q_[1] * q_[1] - 4.0 * q_[2] * q_[0];
        if (dq >= 0.0) {
            const double sd = std::sqrt(dq);
            const double t = -0.5 * (q_[1] + std::copysign(sd, q_[1]));
            if (t != 0.0) {
                zeros.push_back(t / q_[2]);
                zeros.push_back(q_[0] / t);
            } else {
                zeros.push_back(0.0);
            }
        }
    } else if (q_[1] != 0.0) {
        zeros.push_back(-q_[0] / q_[1]);
    }
    for (double x0 : zeros) {
        if (x0 > lo_ && x0 < hi_) continue;
        const cplx sx = disc_root(cplx(x0, 0.0)), px = eval_P(x0);
        if (std::abs(px + sigma_ * sx) <= std::abs(px - sigma_ * sx)) continue;
        const double dq = q_[1] + 2.0 * q_[2] * x0;
        const double mass = -px.real() / dq;
        if (mass > 1e-14) atoms_.push_back({x0, mass});
    }
}

cplx EnsembleLaw::disc_root(cplx z) const {
    if (z.imag() == 0.0) z = cplx(z.real(), 0.0);
    const double c2 = p_[1] * p_[1] - 4.0 * q_[2];
    return std::sqrt(c2) * std::sqrt(z - lo_) * std::sqrt(z - hi_);
}

double EnsembleLaw::density(double x) const {
    if (!(x > lo_ && x < hi_)) return 0.0;
    const double p = eval_P(x).real(), q = eval_Q(x).real();
    const double neg_disc = 4.0 * q - p * p;
    if (neg_disc <= 0.0) return 0.0;
    return std::sqrt(neg_disc) / (2.0 * std::numbers::pi * std::abs(q));
}

cplx EnsembleLaw::stieltjes(cplx z, Branch branch) const {
    double sg = sigma_;
    if (branch == Branch::Secondary && z.imag() < 0.0) sg = -sg;
    const cplx s = disc_root(z), p = eval_P(z), q = eval_Q(z);
    const cplx big = p + sg * s, small = p - sg * s;
    if (std::abs(big) >= std::abs(small)) return big / (2.0 * q);
    return 2.0 / small;
}

cplx EnsembleLaw::stieltjes_derivative(cplx z, Branch branch) const {
    // Differentiate Q m^2 - P m + 1 = 0: m' = (P' m - Q' m^2) / (2 Q m - P).
    const cplx m = stieltjes(z, branch);
    const cplx dp = p_[1] + 2.0 * p_[2] * z, dq = q_[1] + 2.0 * q_[2] * z;
    return (dp * m - dq * m * m) / (2.0 * eval_Q(z) * m - eval_P(z));
}

double EnsembleLaw::hilbert(double x) const {
    if (!(x > lo_ && x < hi_)) throw InputError("Hilbert transform requested outside the open support");
    const double q = eval_Q(x).real();
    if (q == 0.0) throw InputError("Q vanishes at x");
    return eval_P(x).real() / (2.0 * q);
}

cplx EnsembleLaw::r_transform(cplx z) const {
    // Rationalized forms of the tabulated expressions: same function, no
    // cancellation at z -> 0.
    switch (kind_) {
        case LawKind::Wigner: {
            const double r = param("r");
            return r * r / 4.0 * z;
        }
        case LawKind::MarchenkoPastur: return 1.0 / (1.0 - param("lambda") * z);
        case LawKind::KestenMcKay: {
            const double d = param("d");
            return 2.0 * d * z / (std::sqrt(1.0 + 4.0 * z * z) + 1.0);
        }
        case LawKind::Wachter: {
            const double a = param("a"), b = param("b");
            const cplx B = (a + b) * (a + b) + 2.0 * (a - b) * z + z * z;
            return 2.0 * a / (std::sqrt(B) + a + b - z);
        }
        case LawKind::Meixner: {
            const double a = param("a"), b = param("b"), c = param("c");
            const cplx A = (1.0 - a * z) * (1.0 - a * z) - 4.0 * b * (1.0 - c) * z * z;
            return 2.0 * b * c * z / (1.0 - a * z + std::sqrt(A));
        }
    }
    throw InputError("unknown law");
}

double EnsembleLaw::mean() const {
    const double h = 1e-5;
    return 0.5 * (r_transform(cplx(0, h)) + r_transform(cplx(0, -h))).real();
}

double EnsembleLaw::variance() const {
    const double h = 1e-5;
    return ((r_transform(cplx(0, h)) - r_transform(cplx(0, -h))) / cplx(0, 2 * h)).real();
}

MeixnerParams meixner_decompression_params(double a, double b, double c, double alpha) {
    if (!(c > 0.0 && c < 1.0)) throw InputError("Meixner flow needs 0 < c < 1");
    if (!(alpha > 0.0)) throw InputError("flow factor must be positive");
    const double ca = c / (c + alpha * (1.0 - c));
    return {a * alpha, b * alpha * alpha * (1.0 - c) / (1.0 - ca), ca};
}

HermitianMatrix wishart(std::size_t n, std::size_t d, std::uint64_t seed, WishartMethod method) {
    if (n == 0 || d == 0) throw InputError("Wishart dimensions must be positive");
    Rng rng(seed);
    if (method == WishartMethod::Direct || d < n) {
        Matrix x(n, d);
        for (double& v : x.data) v = rng.normal();
        return gram(x);
    }
    // Bartlett: W = L L^T, L lower triangular, L_ii^2 ~ chi2(d - i), L_ij ~ N(0,1).
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) l(i, j) = rng.normal();
        l(i, i) = std::sqrt(rng.chi_square(static_cast<double>(d - i)));
    }
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = &l.data[i * n];
        for (std::size_t j = 0; j <= i; ++j) {
            const double* lj = &l.data[j * n];
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += li[k] * lj[k];
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    return HermitianMatrix(n, std::move(a));
}

EnsembleDraw draw_wigner(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InputError("n must be positive");
    Rng rng(seed);
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i * n + i] = std::numbers::sqrt2 * rng.normal();
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = rng.normal();
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    return {EnsembleLaw::wigner(2.0 * std::sqrt(static_cast<double>(n))), HermitianMatrix(n, std::move(a)),
            {{"n", double(n)}}, {}};
}

EnsembleDraw draw_marchenko_pastur(std::size_t n, std::size_t d, std::uint64_t seed, WishartMethod method) {
    if (n == 0 || d == 0) throw InputError("n and d must be positive");
    HermitianMatrix w = wishart(n, d, seed, method);
    std::vector<double> a = w.entries();
    for (double& v : a) v /= static_cast<double>(d);
    return {EnsembleLaw::marchenko_pastur(double(n) / double(d)), HermitianMatrix(n, std::move(a)),
            {{"n", double(n)}, {"d", double(d)}}, {}};
}

EnsembleDraw draw_kesten_mckay(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n == 0) throw InputError("n must be positive");
    if (d < 2 || d % 2 != 0) throw InputError("Kesten-McKay generator needs an even degree d >= 2");
    const std::size_t k = d / 2;
    Rng root(seed);
    Matrix sum(n, n);
    for (std::size_t i = 0; i < k; ++i) {
        Matrix o = haar_orthogonal(n, root.split(i).next());
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) sum(r, c) += o(r, c) + o(c, r);
    }
    return {EnsembleLaw::kesten_mckay(double(d)), HermitianMatrix::symmetrized(sum),
            {{"n", double(n)}, {"d", double(d)}}, {}};
}

EnsembleDraw draw_wachter(std::size_t n, std::size_t d1, std::size_t d2, std::uint64_t seed) {
    if (n == 0 || d1 == 0 || d2 == 0) throw InputError("dimensions must be positive");
    if (d1 + d2 <= n) throw InputError("Wachter generator needs d1 + d2 > n");
    Rng root(seed);
    HermitianMatrix s1 = wishart(n, d1, root.split(1).next(), WishartMethod::Bartlett);
    HermitianMatrix s2 = wishart(n, d2, root.split(2).next(), WishartMethod::Bartlett);
    std::vector<double> b(n * n);
    for (std::size_t i = 0; i < n * n; ++i) b[i] = s1.entries()[i] + s2.entries()[i];
    Matrix l = cholesky(HermitianMatrix(n, std::move(b)));
    return {EnsembleLaw::wachter(double(d1) / double(n), double(d2) / double(n)), congruence_inverse(l, s1),
            {{"n", double(n)}, {"d1", double(d1)}, {"d2", double(d2)}}, {}};
}

EnsembleDraw draw_meixner_jacobi(std::size_t n, double alpha0, double beta0, double alpha1, double beta1) {
    if (n == 0) throw InputError("n must be positive");
    if (alpha0 != 0.0) throw InputError("Meixner generator requires alpha0 = 0");
    if (!(beta0 > 0.0 && beta1 > 0.0)) throw InputError("Jacobi off-diagonals must be positive");
    const double a = alpha1, b = beta1 * beta1, c = beta0 * beta0 / b;
    Tridiagonal t;
    t.diag.assign(n, alpha1);
    t.diag[0] = alpha0;
    t.off.assign(n > 0 ? n - 1 : 0, beta1);
    if (n > 1) t.off[0] = beta0;
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = t.diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i) m[i * n + i + 1] = m[(i + 1) * n + i] = t.off[i];
    GaussRule g = gauss_rule_from_jacobi(t, 1.0);
    EnsembleDraw out{EnsembleLaw::meixner(a, b, c), HermitianMatrix(n, std::move(m)),
                     {{"n", double(n)}, {"alpha0", alpha0}, {"beta0", beta0}, {"alpha1", alpha1}, {"beta1", beta1}},
                     std::move(g.weights)};
    return out;
}

EnsembleDraw draw_meixner(std::size_t n, double a, double b, double c) {
    if (!(b > 0.0 && c > 0.0)) throw InputError("Meixner parameters need b > 0 and c > 0");
    return draw_meixner_jacobi(n, 0.0, std::sqrt(b * c), a, std::sqrt(b));
}

}  // namespace freedec
