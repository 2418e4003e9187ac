#include "freedec/density_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "freedec/errors.hpp"
#include "freedec/orthopoly.hpp"

namespace freedec {

using std::numbers::pi;

std::string basis_name(BasisKind b) { return b == BasisKind::ChebyshevU ? "chebyshev" : "jacobi"; }

BasisKind parse_basis(const std::string& s) {
    if (s == "chebyshev" || s == "chebyshev-u") return BasisKind::ChebyshevU;
    if (s == "jacobi") return BasisKind::Jacobi;
    throw InputError("unknown basis '" + s + "'");
}

std::string kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::None: return "none";
        case KernelKind::Gaussian: return "gaussian";
        case KernelKind::Beta: return "beta";
    }
    return "?";
}

KernelKind parse_kernel(const std::string& s) {
    if (s == "none") return KernelKind::None;
    if (s == "gaussian") return KernelKind::Gaussian;
    if (s == "beta") return KernelKind::Beta;
    throw InputError("unknown kernel '" + s + "'");
}

std::vector<double> DensityModel::effective() const {
    std::vector<double> c(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) c[k] = psi[k] * (k < damping.size() ? damping[k] : 1.0);
    return c;
}

double DensityModel::weight(double t) const {
    if (basis == BasisKind::ChebyshevU) return (t <= -1.0 || t >= 1.0) ? 0.0 : std::sqrt((1.0 - t) * (1.0 + t));
    return jacobi_weight(alpha, beta, t);
}

double DensityModel::density(double x) const {
    if (!(x >= lo && x <= hi)) return 0.0;
    const double t = std::clamp(t_of(x), -1.0, 1.0);
    const double w = weight(t);
    if (w == 0.0) return 0.0;
    const int K = this->K();
    std::vector<double> p(K + 1);
    const auto c = effective();
    double s = 0.0;
    if (basis == BasisKind::ChebyshevU) {
        chebyshev_u_all(t, K, p.data());
        for (int k = 0; k <= K; ++k) s += c[k] * p[k];
        return w * s;
    }
    jacobi_p_all(alpha, beta, t, K, p.data());
    for (int k = 0; k <= K; ++k) s += c[k] * p[k];
    return 2.0 / width() * w * s;
}

std::vector<double> DensityModel::density(const std::vector<double>& xs) const {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = density(xs[i]);
    return out;
}

double DensityModel::mass() const {
    if (psi.empty()) return 0.0;
    const double c0 = psi[0] * (damping.empty() ? 1.0 : damping[0]);
    if (basis == BasisKind::ChebyshevU) return pi * width() / 4.0 * c0;
    return jacobi_norm_sq(0, alpha, beta) * c0;
}

void DensityModel::validate() const {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw InputError("model support must satisfy lo < hi");
    if (psi.empty()) throw InputError("model has no coefficients");
    if (!damping.empty() && damping.size() != psi.size()) throw InputError("damping and coefficient lengths differ");
    if (basis == BasisKind::Jacobi && !(alpha > -1.0 && beta > -1.0)) throw InputError("Jacobi parameters must exceed -1");
    for (double v : psi)
        if (!std::isfinite(v)) throw InputError("non-finite coefficient");
    for (double v : damping)
        if (!std::isfinite(v)) throw InputError("non-finite damping factor");
}

SupportEstimate estimate_support(const SpectrumSample& s, double delta) {
    if (s.eigenvalues.empty()) throw InputError("empty spectrum sample");
    if (!(delta > 0.0)) throw InputError("support padding delta must be positive");
    const double n = static_cast<double>(s.eigenvalues.size());
    const auto [mn, mx] = std::minmax_element(s.eigenvalues.begin(), s.eigenvalues.end());
    if (*mn == *mx) {
        const double half = 0.5 * std::max(2.0 * delta / n, 1e-8 * (1.0 + std::abs(*mn)));
        return {*mn - half, *mn + half, true};
    }
    return {*mn - delta / n, *mx + delta / n, false};
}

std::vector<double> chebyshev_coefficients(const SpectrumSample& s, double lo, double hi, int K) {
    if (K < 0) throw InputError("K must be non-negative");
    if (!(lo < hi)) throw InputError("support must satisfy lo < hi");
    const double L = hi - lo;
    std::vector<double> acc(K + 1, 0.0), u(K + 1);
    for (double lam : s.eigenvalues) {
        if (lam < lo || lam > hi) throw InputError("eigenvalue outside the support interval");
        const double t = (2.0 * lam - lo - hi) / L;
        chebyshev_u_all(t, K, u.data());
        for (int k = 0; k <= K; ++k) acc[k] += u[k];
    }
    const double scale = 4.0 / (pi * static_cast<double>(s.eigenvalues.size()) * L);
    for (double& v : acc) v *= scale;
    return acc;
}

double silverman_bandwidth(const SpectrumSample& s) {
    const auto& e = s.eigenvalues;
    const std::size_t n = e.size();
    if (n < 2) return 0.0;
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / n;
    double var = 0.0;
    for (double v : e) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (n - 1));
    auto q = [&](double p) {
        const double pos = p * (n - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double f = pos - i;
        return i + 1 < n ? e[i] * (1 - f) + e[i + 1] * f : e[n - 1];
    };
    const double iqr = q(0.75) - q(0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

GridDensity kernel_presmooth(const SpectrumSample& s, double lo, double hi, KernelKind kernel, double bandwidth,
                             std::size_t points) {
    if (!(bandwidth > 0.0)) throw InputError("bandwidth must be positive");
    if (!(lo < hi)) throw InputError("support must satisfy lo < hi");
    if (points < 3) throw InputError("grid needs at least 3 points");
    if (kernel == KernelKind::None) throw InputError("kernel presmoothing needs a kernel");
    const double L = hi - lo;
    const double cell = L / static_cast<double>(points - 1);
    const double h = std::max(bandwidth, 2.0 * cell);
    GridDensity g;
    g.x.resize(points);
    g.values.assign(points, 0.0);
    for (std::size_t j = 0; j < points; ++j) g.x[j] = lo + cell * static_cast<double>(j);
    g.x.back() = hi;
    const auto& e = s.eigenvalues;
    const double n = static_cast<double>(e.size());

    if (kernel == KernelKind::Gaussian) {
        const double norm = 1.0 / (n * h * std::sqrt(2.0 * pi));
        for (std::size_t j = 0; j < points; ++j) {
            double acc = 0.0;
            for (double lam : e) {
                const double d = (g.x[j] - lam) / h;
                if (std::abs(d) < 40.0) acc += std::exp(-0.5 * d * d);
            }
            g.values[j] = acc * norm;
        }
    } else {
        // Chen's beta kernel on [0,1]: K(y_i; y/b + 1, (1-y)/b + 1), zero outside the support.
        const double b = h / L;
        std::vector<double> ly, l1y;
        ly.reserve(e.size());
        l1y.reserve(e.size());
        for (double lam : e) {
            const double y = std::clamp((lam - lo) / L, 1e-300, 1.0 - 1e-16);
            ly.push_back(std::log(y));
            l1y.push_back(std::log1p(-y));
        }
        for (std::size_t j = 0; j < points; ++j) {
            const double y = (g.x[j] - lo) / L;
            const double p = y / b + 1.0, q = (1.0 - y) / b + 1.0;
            const double lbeta = std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
            double acc = 0.0;
            for (std::size_t i = 0; i < e.size(); ++i) {
                const double ex = (p - 1.0) * ly[i] + (q - 1.0) * l1y[i] - lbeta;
                if (ex > -700.0) acc += std::exp(ex);
            }
            g.values[j] = acc / (n * L);
        }
    }
    double mass = 0.0;
    for (std::size_t j = 0; j + 1 < points; ++j) mass += 0.5 * (g.values[j] + g.values[j + 1]) * (g.x[j + 1] - g.x[j]);
    if (!(mass > 0.0)) throw NumericalError("kernel estimate has zero mass on the support");
    for (double& v : g.values) v /= mass;
    return g;
}

std::vector<double> jacobi_coefficients(const GridDensity& g, double lo, double hi, double a, double b, int K,
                                        double gamma) {
    if (K < 0) throw InputError("K must be non-negative");
    if (!(a > -1.0 && b > -1.0)) throw InputError("Jacobi parameters must exceed -1");
    if (!(gamma >= 0.0)) throw InputError("gamma must be non-negative");
    if (g.x.size() != g.values.size() || g.x.size() < 2) throw InputError("malformed grid density");
    for (double v : g.values)
        if (!std::isfinite(v)) throw InputError("non-finite grid density value");
    const double L = hi - lo;
    // Piecewise-linear density between grid nodes, integrated against P_k with
    // 3-point Gauss-Legendre per cell. Plain trapezoid leaves O(h^2 k^4) residue
    // in the high modes.
    static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    std::vector<double> acc(K + 1, 0.0), p(K + 1);
    for (std::size_t j = 1; j < g.x.size(); ++j) {
        const double t0 = (2.0 * g.x[j - 1] - lo - hi) / L, t1 = (2.0 * g.x[j] - lo - hi) / L;
        const double f0 = 0.5 * L * g.values[j - 1], f1 = 0.5 * L * g.values[j];  // t-density
        const double half = 0.5 * (t1 - t0);
        for (int q = 0; q < 3; ++q) {
            const double s = 0.5 * (1.0 + gx[q]);
            const double w = gw[q] * half * ((1.0 - s) * f0 + s * f1);
            jacobi_p_all(a, b, t0 + s * (t1 - t0), K, p.data());
            for (int k = 0; k <= K; ++k) acc[k] += w * p[k];
        }
    }
    for (int k = 0; k <= K; ++k) {
        const double r = static_cast<double>(k) / (K + 1.0);
        acc[k] /= gamma * r * r + jacobi_norm_sq(k, a, b);
    }
    return acc;
}

std::vector<double> jackson_damping(int K) {
    if (K < 0) throw InputError("K must be non-negative");
    std::vector<double> g(K + 1);
    g[0] = 1.0;
    if (K == 0) return g;
    const double th = pi / (K + 1.0);
    const double cot = std::cos(th) / std::sin(th);
    for (int k = 1; k <= K; ++k) {
        const double v = ((K - k + 1) * std::cos(th * k) + std::sin(th * k) * cot) / (K + 1.0);
        g[k] = std::clamp(v, 0.0, 1.0);
    }
    return g;
}

namespace {
double half_ratio(int k) {
    // P_k^{(1/2,1/2)} = c_k U_k, c_k = Gamma(k + 3/2) / (Gamma(3/2) k! (k+1)).
    return std::exp(std::lgamma(k + 1.5) - std::lgamma(1.5) - std::lgamma(k + 1.0)) / (k + 1.0);
}
}  // namespace

std::vector<double> chebyshev_to_jacobi_half(const std::vector<double>& psi, double lo, double hi) {
    std::vector<double> out(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) out[k] = psi[k] * (hi - lo) / (2.0 * half_ratio(int(k)));
    return out;
}

std::vector<double> jacobi_half_to_chebyshev(const std::vector<double>& psi, double lo, double hi) {
    std::vector<double> out(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) out[k] = psi[k] * 2.0 * half_ratio(int(k)) / (hi - lo);
    return out;
}

DensityModel as_jacobi(const DensityModel& m) {
    if (m.basis == BasisKind::Jacobi) return m;
    DensityModel j = m;
    j.basis = BasisKind::Jacobi;
    j.alpha = j.beta = 0.5;
    j.psi = chebyshev_to_jacobi_half(m.psi, m.lo, m.hi);
    return j;
}

std::vector<double> constraint_grid(const DensityModel& m, std::size_t n) {
    std::vector<double> xs(n);
    for (std::size_t j = 0; j < n; ++j) xs[j] = m.x_of(-std::cos((j + 0.5) * pi / n));
    return xs;
}

namespace {

// Rows: density at grid point j per unit psi_k (damping included).
std::vector<std::vector<double>> design(const DensityModel& m, const std::vector<double>& xs) {
    const int K = m.K();
    std::vector<std::vector<double>> a(xs.size(), std::vector<double>(K + 1));
    std::vector<double> p(K + 1);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double t = m.t_of(xs[j]);
        const double w = m.weight(t);
        double scale = w;
        if (m.basis == BasisKind::ChebyshevU) {
            chebyshev_u_all(t, K, p.data());
        } else {
            jacobi_p_all(m.alpha, m.beta, t, K, p.data());
            scale *= 2.0 / m.width();
        }
        for (int k = 0; k <= K; ++k) a[j][k] = scale * p[k] * (m.damping.empty() ? 1.0 : m.damping[k]);
    }
    return a;
}

double grid_min(const std::vector<std::vector<double>>& a, const std::vector<double>& psi, std::vector<double>* vals) {
    double mn = INFINITY;
    if (vals) vals->resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < psi.size(); ++k) s += a[j][k] * psi[k];
        if (vals) (*vals)[j] = s;
        mn = std::min(mn, s);
    }
    return mn;
}

// Smallest theta with (1-theta) rho + theta omega >= 0 on the grid; omega is the
// pure-weight density (positive at every interior grid point).
std::vector<double> mix_with_weight(const std::vector<std::vector<double>>& a, const std::vector<double>& psi,
                                    const std::vector<double>& pure) {
    std::vector<double> rho, omega;
    grid_min(a, psi, &rho);
    grid_min(a, pure, &omega);
    double theta = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j)
        if (rho[j] < 0.0) theta = std::max(theta, -rho[j] / (omega[j] - rho[j]));
    theta = std::min(1.0, theta * (1.0 + 1e-9) + 1e-15);
    std::vector<double> out(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) out[k] = (1.0 - theta) * psi[k] + theta * pure[k];
    return out;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

}  // namespace

DensityModel repair_positivity_mass(const DensityModel& m, RepairReport* report) {
    m.validate();
    const auto xs = constraint_grid(m);
    const auto a = design(m, xs);
    const double min0 = grid_min(a, m.psi, nullptr);
    const double mass0 = m.mass();
    if (report) *report = {false, false, min0, mass0};
    if (min0 >= -1e-9 && std::abs(mass0 - 1.0) <= 1e-6) return m;

    const double kappa = mass0 / m.psi[0];  // mass per unit psi_0
    if (!(std::isfinite(kappa) && kappa > 0.0)) throw NumericalError("model mass is not controlled by psi_0");
    std::vector<double> pure(m.psi.size(), 0.0);
    pure[0] = 1.0 / kappa;

    auto renormalize = [&](std::vector<double> psi) {
        const double ms = kappa * psi[0];
        if (ms > 0.0)
            for (double& v : psi) v /= ms;
        return psi;
    };

    // Quadratic penalty on the negative grid values, minimized exactly for a growing
    // active set; mu is raised until the sticky set is pushed up to (numerically) zero.
    const std::size_t N = a.size(), P = m.psi.size();
    Eigen::VectorXd psi0 = Eigen::Map<const Eigen::VectorXd>(m.psi.data(), P);
    Eigen::VectorXd x = psi0;
    std::vector<char> active(N, 0);
    std::vector<double> rho;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(P, P);
    std::vector<double> psi(m.psi);
    for (double mu = 1e2; mu <= 1e14; mu *= 10.0) {
        for (int it = 0; it < 50; ++it) {
            grid_min(a, psi, &rho);
            bool grew = false;
            for (std::size_t j = 0; j < N; ++j) {
                if (active[j] || rho[j] >= 0.0) continue;
                active[j] = 1;
                grew = true;
                Eigen::Map<const Eigen::VectorXd> r(a[j].data(), P);
                gram.noalias() += r * r.transpose();
            }
            if (!grew && it > 0) break;
            Eigen::MatrixXd H = Eigen::MatrixXd::Identity(P, P) + (mu / N) * gram;
            x = H.ldlt().solve(psi0);
            psi.assign(x.data(), x.data() + P);
        }
        if (grid_min(a, renormalize(psi), nullptr) >= -1e-10) break;
    }
    psi = renormalize(psi);
    bool fallback = false;
    if (grid_min(a, psi, nullptr) < 0.0) {
        psi = mix_with_weight(a, psi, pure);
        fallback = true;
    }
    // Mixing straight from the input is also feasible; keep whichever moved less.
    std::vector<double> direct = renormalize(m.psi);
    if (grid_min(a, direct, nullptr) < 0.0) direct = mix_with_weight(a, direct, pure);
    if (distance(direct, m.psi) < distance(psi, m.psi)) psi = direct;

    DensityModel out = m;
    out.psi = std::move(psi);
    out.repair_warning = fallback;
    if (report) {
        report->changed = true;
        report->used_fallback = fallback;
    }
    return out;
}

DensityModel fit_density(const SpectrumSample& s, const FitOptions& opt) {
    if (opt.K < 0) throw InputError("K must be non-negative");
    const SupportEstimate sup = estimate_support(s, opt.delta);
    DensityModel m;
    m.lo = sup.lo;
    m.hi = sup.hi;
    m.degenerate = sup.degenerate;
    m.basis = opt.basis;
    m.gamma = opt.gamma;
    m.meta.n_s = s.eigenvalues.size();
    m.meta.K = opt.K;
    m.meta.gamma = opt.gamma;
    m.meta.kernel = kernel_name(opt.kernel);
    m.meta.seed = opt.seed;
    m.meta.delta = opt.delta;

    if (opt.kernel == KernelKind::None) {
        if (opt.basis != BasisKind::ChebyshevU) throw InputError("the Jacobi basis needs a kernel estimate (gaussian or beta)");
        m.psi = chebyshev_coefficients(s, m.lo, m.hi, opt.K);
        // Same Tikhonov shrinkage as the Galerkin path, with ||U_k||^2 = pi/2.
        for (int k = 0; k <= opt.K; ++k) {
            const double r = k / (opt.K + 1.0);
            m.psi[k] *= (pi / 2.0) / (opt.gamma * r * r + pi / 2.0);
        }
    } else {
        double bw = opt.bandwidth > 0.0 ? opt.bandwidth : silverman_bandwidth(s);
        const double cell = m.width() / 4095.0;
        bw = std::max(bw, 2.0 * cell);
        m.meta.bandwidth = bw;
        GridDensity g = kernel_presmooth(s, m.lo, m.hi, opt.kernel, bw, 4096);
        if (opt.basis == BasisKind::ChebyshevU) {
            m.psi = jacobi_half_to_chebyshev(jacobi_coefficients(g, m.lo, m.hi, 0.5, 0.5, opt.K, opt.gamma), m.lo, m.hi);
        } else {
            m.alpha = opt.alpha;
            m.beta = opt.beta;
            m.psi = jacobi_coefficients(g, m.lo, m.hi, opt.alpha, opt.beta, opt.K, opt.gamma);
        }
    }
    m.damping = opt.jackson ? jackson_damping(opt.K) : std::vector<double>(opt.K + 1, 1.0);
    if (opt.repair) m = repair_positivity_mass(m);
    return m;
}

}  // namespace freedec
