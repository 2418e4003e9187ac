#include "freedec/stieltjes.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "freedec/errors.hpp"
#include "freedec/random.hpp"

namespace freedec {

using std::numbers::pi;

cplx GlueFunction::eval(cplx z) const {
    cplx s = d + c * z;
    for (std::size_t j = 0; j < poles.size(); ++j) s += residues[j] / (z - poles[j]);
    return s;
}

cplx GlueFunction::derivative(cplx z) const {
    cplx s = c;
    for (std::size_t j = 0; j < poles.size(); ++j) {
        const cplx dz = z - poles[j];
        s -= residues[j] / (dz * dz);
    }
    return s;
}

cplx StieltjesEvaluator::derivative(cplx z, Branch b) const {
    const double L = hi() - lo();
    const double dist = std::min(std::abs(z - lo()), std::abs(z - hi()));
    double h = std::min(1e-5 * L, 1e-3 * dist);
    if (!(h > 0.0)) h = 1e-9 * L;
    const cplx f1 = eval(z + h, b), f_1 = eval(z - h, b);
    const cplx f2 = eval(z + 2.0 * h, b), f_2 = eval(z - 2.0 * h, b);
    return (f_2 - 8.0 * f_1 + 8.0 * f1 - f2) / (12.0 * h);
}

double StieltjesEvaluator::density(double x) const {
    if (!(x > lo() && x < hi())) return 0.0;
    return std::max(0.0, eval(cplx(x, 0.0), Branch::Principal).imag() / pi);
}

namespace {

template <class T>
WynnResult wynn_impl(const std::vector<T>& c, cplx z) {
    if (c.empty()) throw InputError("Wynn epsilon needs at least one coefficient");
    const std::size_t n = c.size();
    std::vector<cplx> cur(n);
    cplx sum = 0.0, comp = 0.0, zk = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        // Kahan-compensated partial sums.
        const cplx y = cplx(c[k]) * zk - comp;
        const cplx t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        cur[k] = sum;
        zk *= z;
    }
    WynnResult best{cur.back(), 0, false};
    if (n == 1) return best;
    std::vector<cplx> prev(n + 1, 0.0);
    for (int col = 1; cur.size() >= 2; ++col) {
        std::vector<cplx> next(cur.size() - 1);
        bool ok = true;
        for (std::size_t j = 0; j + 1 < cur.size(); ++j) {
            const cplx diff = cur[j + 1] - cur[j];
            const double ad = std::abs(diff);
            if (!(ad > 1e-300) || !std::isfinite(ad)) {
                ok = false;
                break;
            }
            next[j] = prev[j + 1] + 1.0 / diff;
            if (!std::isfinite(next[j].real()) || !std::isfinite(next[j].imag())) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            best.breakdown = true;
            break;
        }
        prev = std::move(cur);
        cur = std::move(next);
        if (col % 2 == 0) best = {cur.back(), col, false};
    }
    return best;
}

}  // namespace

WynnResult wynn_epsilon(const std::vector<double>& c, cplx z) { return wynn_impl(c, z); }
WynnResult wynn_epsilon(const std::vector<cplx>& c, cplx z) { return wynn_impl(c, z); }

// ---------------------------------------------------------------- Pade-Chebyshev

PadeChebyshevEvaluator::PadeChebyshevEvaluator(const DensityModel& m) : model_(m) {
    m.validate();
    if (m.basis != BasisKind::ChebyshevU) throw InputError("Pade-Chebyshev evaluator needs a ChebyshevU model");
    c_ = m.effective();
}

cplx PadeChebyshevEvaluator::eval_diag(cplx z, Branch b, WynnResult* diag) const {
    const cplx u = (2.0 * z - model_.lo - model_.hi) / model_.width();
    const cplx J = joukowski_inverse(u);
    if (b == Branch::Principal || z.imag() >= 0.0) {
        cplx s = 0.0;
        for (std::size_t k = c_.size(); k-- > 0;) s = s * J + c_[k];
        if (diag) *diag = {s, 0, false};
        return -pi * J * s;
    }
    const cplx w = 1.0 / J;
    WynnResult r = wynn_epsilon(c_, w);
    if (diag) *diag = r;
    return -pi * w * r.value;
}

cplx PadeChebyshevEvaluator::eval(cplx z, Branch b) const { return eval_diag(z, b, nullptr); }

cplx stieltjes_pade_chebyshev(const DensityModel& m, cplx z, Branch b) {
    return PadeChebyshevEvaluator(m).eval(z, b);
}

// ---------------------------------------------------------------- Jacobi + glue

namespace {
constexpr double kFarRho = 1.25;
}

JacobiGlueEvaluator::JacobiGlueEvaluator(const DensityModel& m, GlueFunction g, int n0)
    : source_(m), model_(as_jacobi(m)), glue_(std::move(g)), n0_(n0) {
    model_.validate();
    if (n0 < 1) throw InputError("n0 must be positive");
    for (double a : glue_.poles)
        if (a > model_.lo && a < model_.hi) throw InputError("glue pole inside the support");
    c_ = model_.effective();
    const int K = model_.K();
    const double a = model_.alpha, b = model_.beta;
    // Modes sharing a rule size collapse into one node/weight vector:
    // sum_k c_k sum_i w_i P_k(t_i)/(t_i - u) = sum_i (sum_k c_k w_i P_k(t_i))/(t_i - u).
    std::vector<double> p(K + 1);
    for (int k = 0; k <= K; ++k) {
        if (c_[k] == 0.0) continue;
        const int n = nodes_for_mode(k);
        if (mode_rules_.empty() || mode_rules_.back().size != n) {
            const GaussRule& r = gauss_jacobi(n, a, b);
            mode_rules_.push_back({n, r.nodes, std::vector<double>(r.nodes.size(), 0.0)});
        }
        auto& g = mode_rules_.back();
        const GaussRule& r = gauss_jacobi(n, a, b);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            jacobi_p_all(a, b, g.nodes[i], k, p.data());
            g.coef[i] += c_[k] * r.weights[i] * p[k];
        }
    }
    const int N = std::max(K / 2 + 2, 24);
    for (int extra = 0; extra < 3; ++extra) {
        const GaussRule& r = gauss_jacobi(N + extra, a, b);
        SubRule s{r.nodes, r.weights, std::vector<double>(r.nodes.size())};
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            jacobi_p_all(a, b, r.nodes[i], K, p.data());
            double v = 0.0;
            for (int k = 0; k <= K; ++k) v += c_[k] * p[k];
            s.pvals[i] = v;
        }
        sub_.push_back(std::move(s));
    }
}

cplx JacobiGlueEvaluator::principal_upper(cplx u) const {
    const int K = model_.K();
    if (bernstein_rho(u) > kFarRho) {
        cplx s = 0.0;
        for (const auto& g : mode_rules_)
            for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.coef[i] / (g.nodes[i] - u);
        return s;
    }
    // p(u) Q_0(u) + int w (p(t) - p(u))/(t - u) dt, the second term exact by Gauss-Jacobi.
    std::vector<cplx> pu(K + 1);
    jacobi_p_all(model_.alpha, model_.beta, u, K, pu.data());
    cplx p = 0.0;
    for (int k = 0; k <= K; ++k) p += c_[k] * pu[k];
    const SubRule* best = &sub_[0];
    double best_gap = -1.0;
    for (const auto& r : sub_) {
        double gap = INFINITY;
        for (double t : r.nodes) gap = std::min(gap, std::abs(t - u));
        if (gap > best_gap) {
            best_gap = gap;
            best = &r;
        }
    }
    cplx s = 0.0;
    for (std::size_t i = 0; i < best->nodes.size(); ++i)
        s += best->weights[i] * (best->pvals[i] - p) / (best->nodes[i] - u);
    return p * jacobi_q0(model_.alpha, model_.beta, u) + s;
}

cplx JacobiGlueEvaluator::principal(cplx z) const {
    if (z.imag() < 0.0) return std::conj(principal(std::conj(z)));
    const cplx u = cplx((2.0 * z.real() - model_.lo - model_.hi) / model_.width(), 2.0 * z.imag() / model_.width());
    return 2.0 / model_.width() * principal_upper(u);
}

cplx JacobiGlueEvaluator::eval(cplx z, Branch b) const {
    if (b == Branch::Principal || z.imag() >= 0.0) return principal(z);
    return glue_.eval(z) - principal(z);
}

cplx stieltjes_jacobi_glue(const DensityModel& m, const GlueFunction& g, cplx z, Branch b) {
    return JacobiGlueEvaluator(m, g).eval(z, b);
}

// ---------------------------------------------------------------- glue fitting

namespace {

struct LinearFit {
    Eigen::VectorXd coef;
    double rms;
};

// Columns: 1, t (when linear), 1/(t - tau_i). The returned coefficient vector
// always has the slope in slot 1.
LinearFit solve_glue(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& tau,
                     bool linear) {
    const std::size_t n = t.size(), q = tau.size(), off = linear ? 2 : 1;
    Eigen::MatrixXd A(n, off + q);
    Eigen::VectorXd b(n);
    for (std::size_t j = 0; j < n; ++j) {
        A(j, 0) = 1.0;
        if (linear) A(j, 1) = t[j];
        for (std::size_t i = 0; i < q; ++i) A(j, off + i) = 1.0 / (t[j] - tau[i]);
        b(j) = y[j];
    }
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    const double rms = std::sqrt((A * x - b).squaredNorm() / n);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(2 + q);
    coef(0) = x(0);
    if (linear) coef(1) = x(1);
    for (std::size_t i = 0; i < q; ++i) coef(2 + i) = x(off + i);
    return {coef, std::isfinite(rms) ? rms : INFINITY};
}

std::vector<double> taus(const std::vector<double>& theta, int n_left) {
    std::vector<double> tau(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        tau[i] = (static_cast<int>(i) < n_left) ? -1.0 - std::exp(theta[i]) : 1.0 + std::exp(theta[i]);
    return tau;
}

}  // namespace

GlueFunction fit_glue(const std::vector<double>& x, const std::vector<double>& target, double lo, double hi, int q,
                      bool linear) {
    if (q < 0) throw InputError("glue degree must be non-negative");
    if (x.size() != target.size() || x.size() < static_cast<std::size_t>(q + 3))
        throw InputError("glue fit needs at least q + 3 samples");
    if (!(lo < hi)) throw InputError("support must satisfy lo < hi");
    const double center = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    std::vector<double> t(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!std::isfinite(target[j])) throw InputError("non-finite glue target");
        t[j] = (x[j] - center) / half;
    }

    std::vector<double> best_tau;
    LinearFit best{Eigen::VectorXd(), INFINITY};
    if (q == 0) {
        best = solve_glue(t, target, {}, linear);
    } else {
        const double tmin = -9.0, tmax = 6.0;
        for (int n_left = 0; n_left <= q; ++n_left) {
            auto objective = [&](const std::vector<double>& th) { return solve_glue(t, target, taus(th, n_left), linear).rms; };
            // Coarse common start, then coordinate-wise Brent sweeps.
            std::vector<double> th(q, 0.0);
            double fbest = INFINITY, th0 = 0.0;
            for (int g = 0; g <= 60; ++g) {
                const double v = tmin + (tmax - tmin) * g / 60.0;
                std::vector<double> trial(q);
                for (int i = 0; i < q; ++i) trial[i] = v + 0.3 * i;
                const double f = objective(trial);
                if (f < fbest) {
                    fbest = f;
                    th0 = v;
                }
            }
            for (int i = 0; i < q; ++i) th[i] = th0 + 0.3 * i;
            for (int sweep = 0; sweep < 6; ++sweep) {
                for (int i = 0; i < q; ++i) {
                    auto f1 = [&](double v) {
                        auto trial = th;
                        trial[i] = v;
                        return objective(trial);
                    };
                    std::uintmax_t iters = 200;
                    auto r = boost::math::tools::brent_find_minima(f1, tmin, tmax, 40, iters);
                    if (r.second <= f1(th[i])) th[i] = r.first;
                }
            }
            const auto tau = taus(th, n_left);
            LinearFit fit = solve_glue(t, target, tau, linear);
            if (fit.rms < best.rms) {
                best = fit;
                best_tau = tau;
            }
        }
    }
    if (!std::isfinite(best.rms)) throw NumericalError("glue fit failed");
    GlueFunction g;
    g.c = best.coef(1) / half;
    g.d = best.coef(0) - best.coef(1) * center / half;
    for (int i = 0; i < q; ++i) {
        g.poles.push_back(center + half * best_tau[i]);
        g.residues.push_back(best.coef(2 + i) * half);
    }
    g.residual = best.rms;
    return g;
}

GlueFunction fit_glue(const DensityModel& m, int q, bool linear) {
    JacobiGlueEvaluator ev(m, GlueFunction{});
    const std::size_t N = 256;
    std::vector<double> xs(N), ys(N);
    for (std::size_t j = 0; j < N; ++j) {
        xs[j] = m.x_of(-std::cos((j + 0.5) * pi / N));
        ys[j] = 2.0 * ev.principal(cplx(xs[j], 0.0)).real();
    }
    return fit_glue(xs, ys, m.lo, m.hi, q, linear);
}

std::string evaluator_name(EvaluatorKind k) { return k == EvaluatorKind::PadeChebyshev ? "pade-chebyshev" : "jacobi-glue"; }

EvaluatorKind parse_evaluator(const std::string& s) {
    if (s == "pade-chebyshev" || s == "pade") return EvaluatorKind::PadeChebyshev;
    if (s == "jacobi-glue" || s == "glue") return EvaluatorKind::JacobiGlue;
    throw InputError("unknown evaluator '" + s + "'");
}

// ---------------------------------------------------------------- Lanczos

cplx jacobi_continued_fraction(const std::vector<double>& alpha, const std::vector<double>& beta, cplx z) {
    if (alpha.empty()) throw InputError("empty Jacobi matrix");
    cplx f = 1.0 / (alpha.back() - z);
    for (std::size_t j = alpha.size() - 1; j-- > 0;) f = 1.0 / (alpha[j] - z - beta[j] * beta[j] * f);
    return f;
}

LanczosResult lanczos_stieltjes(const HermitianMatrix& a, int p, cplx z, const std::vector<double>& start, double eps) {
    const std::size_t n = a.order();
    if (p < 1 || static_cast<std::size_t>(p) > n) throw InputError("Lanczos steps must be in [1, n]");
    if (start.size() != n) throw InputError("start vector has wrong length");
    if (z.imag() == 0.0) throw InputError("Lanczos evaluation needs z off the real axis");
    double nrm = 0.0;
    for (double v : start) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0)) throw InputError("start vector is zero");
    const double scale = std::max(a.max_abs(), 1e-300) * static_cast<double>(n);

    std::vector<std::vector<double>> V;
    V.emplace_back(start);
    for (double& v : V[0]) v /= nrm;
    LanczosResult res;
    std::vector<double> w(n);
    cplx prev_val = 0.0;
    for (int j = 0; j < p; ++j) {
        a.apply(V[j].data(), w.data());
        double al = 0.0;
        for (std::size_t i = 0; i < n; ++i) al += V[j][i] * w[i];
        res.alpha.push_back(al);
        for (std::size_t i = 0; i < n; ++i) w[i] -= al * V[j][i] + (j > 0 ? res.beta[j - 1] * V[j - 1][i] : 0.0);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& v : V) {
                double d = 0.0;
                for (std::size_t i = 0; i < n; ++i) d += v[i] * w[i];
                for (std::size_t i = 0; i < n; ++i) w[i] -= d * v[i];
            }
        }
        const cplx val = jacobi_continued_fraction(res.alpha, res.beta, z);
        res.value = val;
        res.steps = j + 1;
        if (eps > 0.0 && j > 0 && std::abs(val - prev_val) < eps) {
            res.converged = true;
            break;
        }
        prev_val = val;
        double b = 0.0;
        for (double v : w) b += v * v;
        b = std::sqrt(b);
        if (j + 1 == p) break;
        if (b <= 1e-13 * scale) {
            // Invariant subspace: the continued fraction is exact.
            res.breakdown = true;
            res.converged = true;
            break;
        }
        res.beta.push_back(b);
        V.emplace_back(n);
        for (std::size_t i = 0; i < n; ++i) V.back()[i] = w[i] / b;
    }
    if (res.steps == static_cast<int>(n)) res.converged = true;
    return res;
}

LanczosResult lanczos_stieltjes(const HermitianMatrix& a, int p, cplx z, std::uint64_t seed, double eps) {
    Rng rng(seed);
    std::vector<double> v(a.order());
    for (double& x : v) x = rng.normal();
    return lanczos_stieltjes(a, p, z, v, eps);
}

cplx lanczos_stieltjes_averaged(const HermitianMatrix& a, int p, cplx z, std::uint64_t seed, int probes) {
    if (probes < 1) throw InputError("need at least one probe");
    Rng root(seed);
    cplx s = 0.0;
    for (int i = 0; i < probes; ++i) s += lanczos_stieltjes(a, p, z, root.split(i).next()).value;
    return s / static_cast<double>(probes);
}

LanczosEvaluator::LanczosEvaluator(const HermitianMatrix& a, int p, std::uint64_t seed) {
    LanczosResult r = lanczos_stieltjes(a, p, cplx(0.0, 1.0), seed);
    alpha_ = r.alpha;
    beta_ = r.beta;
    Tridiagonal t{alpha_, beta_};
    t.off.resize(alpha_.size() - 1);
    auto ev = tridiagonal_eigenvalues(t);
    lo_ = ev.front();
    hi_ = ev.back();
    if (!(lo_ < hi_)) hi_ = lo_ + 1e-12 * (1.0 + std::abs(lo_));
}

cplx LanczosEvaluator::eval(cplx z, Branch) const {
    if (z.imag() < 0.0) return std::conj(jacobi_continued_fraction(alpha_, beta_, std::conj(z)));
    return jacobi_continued_fraction(alpha_, beta_, z);
}

std::unique_ptr<StieltjesEvaluator> make_evaluator(const DensityModel& m, const std::optional<GlueFunction>& glue,
                                                   EvaluatorKind kind) {
    if (kind == EvaluatorKind::PadeChebyshev) {
        if (m.basis != BasisKind::ChebyshevU) throw InputError("the Pade evaluator needs a Chebyshev model");
        return std::make_unique<PadeChebyshevEvaluator>(m);
    }
    GlueFunction g = glue ? *glue : fit_glue(m, kDefaultGlueDegree, kDefaultGlueLinear);
    return std::make_unique<JacobiGlueEvaluator>(m, std::move(g));
}

}  // namespace freedec
