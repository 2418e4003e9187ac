#include "freedec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "freedec/errors.hpp"
#include "freedec/random.hpp"
#include "json.hpp"

namespace freedec {

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(lo < hi)) throw InputError("uniform grid needs lo < hi and at least two points");
    std::vector<double> x(points);
    for (std::size_t i = 0; i < points; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    x.back() = hi;
    return x;
}

namespace {

void check_grid(const GridDensity& g) {
    if (g.x.size() != g.values.size() || g.x.size() < 2) throw InputError("density grid and values must match, n >= 2");
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        if (!std::isfinite(g.x[i]) || !std::isfinite(g.values[i])) throw InputError("non-finite density sample");
        if (i > 0 && !(g.x[i] > g.x[i - 1])) throw InputError("density grid must be strictly increasing");
    }
}

void check_shared(const GridDensity& a, const GridDensity& b) {
    check_grid(a);
    check_grid(b);
    if (a.x.size() != b.x.size()) throw InputError("densities are on different grids");
    for (std::size_t i = 0; i < a.x.size(); ++i)
        if (std::abs(a.x[i] - b.x[i]) > 1e-12 * (1.0 + std::abs(a.x[i]))) throw InputError("densities are on different grids");
}

std::vector<double> normalized(const GridDensity& g) {
    std::vector<double> v(g.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(0.0, g.values[i]);
    const double m = trapezoid(g.x, v);
    if (!(m > 0.0)) throw InputError("density has no mass on its grid");
    for (double& y : v) y /= m;
    return v;
}

}  // namespace

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    return s;
}

GridDensity resample(const GridDensity& g, const std::vector<double>& x) {
    check_grid(g);
    GridDensity out{x, std::vector<double>(x.size(), 0.0)};
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < g.x.front() || x[i] > g.x.back()) continue;
        auto it = std::upper_bound(g.x.begin(), g.x.end(), x[i]);
        std::size_t j = static_cast<std::size_t>(it - g.x.begin());
        if (j >= g.x.size()) j = g.x.size() - 1;
        if (j == 0) j = 1;
        const double s = (x[i] - g.x[j - 1]) / (g.x[j] - g.x[j - 1]);
        out.values[i] = g.values[j - 1] + s * (g.values[j] - g.values[j - 1]);
    }
    return out;
}

double total_variation(const GridDensity& a, const GridDensity& b) {
    check_shared(a, b);
    const auto p = normalized(a), q = normalized(b);
    std::vector<double> d(p.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(p[i] - q[i]);
    return std::clamp(0.5 * trapezoid(a.x, d), 0.0, 1.0);
}

double jensen_shannon(const GridDensity& a, const GridDensity& b) {
    check_shared(a, b);
    const auto p = normalized(a), q = normalized(b);
    std::vector<double> f(p.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        double v = 0.0;
        if (p[i] > 0.0) v += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) v += 0.5 * q[i] * std::log(q[i] / m);
        f[i] = v;
    }
    return std::clamp(trapezoid(a.x, f), 0.0, std::log(2.0));
}

std::vector<double> moments(const GridDensity& g, int kmax) {
    check_grid(g);
    if (kmax < 0) throw InputError("moment order must be >= 0");
    std::vector<double> out(kmax + 1), f(g.x.size());
    for (int k = 0; k <= kmax; ++k) {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(g.x[i], k) * g.values[i];
        out[k] = trapezoid(g.x, f);
    }
    return out;
}

double log_determinant(const GridDensity& g, double n) {
    check_grid(g);
    if (!(n > 0.0)) throw InputError("matrix order must be positive");
    const double tol = 1e-12 * std::max(1.0, std::abs(g.x.back()));
    // x log x - x and x^2 log x / 2 - x^2 / 4
    auto F1 = [](double x) { return x * std::log(x) - x; };
    auto F2 = [](double x) { return 0.5 * x * x * std::log(x) - 0.25 * x * x; };
    double s = 0.0, mass = 0.0;
    for (std::size_t i = 0; i + 1 < g.x.size(); ++i) {
        const double a = g.x[i], b = g.x[i + 1], ra = g.values[i], rb = g.values[i + 1];
        if (ra == 0.0 && rb == 0.0) continue;
        mass += 0.5 * (b - a) * (ra + rb);
        if (a <= tol)
            throw InputError("density support reaches 0, log-determinant undefined; exclude zero atoms first");
        const double slope = (rb - ra) / (b - a);
        // rho = (ra - slope a) + slope x on [a, b]
        s += (ra - slope * a) * (F1(b) - F1(a)) + slope * (F2(b) - F2(a));
    }
    if (!(mass > 0.0)) throw InputError("density has no mass");
    return n * s / mass;
}

double van_der_corput(std::uint64_t i) {
    double v = 0.0, f = 0.5;
    while (i) {
        if (i & 1u) v += f;
        i >>= 1;
        f *= 0.5;
    }
    return v;
}

QmcResult qmc_sample(const GridDensity& g, std::size_t count, std::optional<std::uint64_t> shift_seed) {
    check_grid(g);
    const std::size_t N = g.x.size();
    std::vector<double> C(N, 0.0);
    for (std::size_t i = 1; i < N; ++i) C[i] = C[i - 1] + 0.5 * (g.x[i] - g.x[i - 1]) * (g.values[i] + g.values[i - 1]);
    QmcResult res;
    for (std::size_t i = 1; i < N; ++i)
        if (C[i] < C[i - 1]) {
            C[i] = C[i - 1];
            res.remonotonized = true;
        }
    const double total = C.back();
    if (!(total > 0.0)) throw InputError("density has no mass to sample from");
    const double shift = shift_seed ? Rng(*shift_seed).uniform() : 0.0;

    res.points.reserve(count);
    for (std::size_t k = 1; k <= count; ++k) {
        double u = van_der_corput(k) + shift;
        u -= std::floor(u);
        const double target = u * total;
        std::size_t j = static_cast<std::size_t>(std::upper_bound(C.begin(), C.end(), target) - C.begin());
        j = std::clamp<std::size_t>(j, 1, N - 1);
        const double h = g.x[j] - g.x[j - 1], need = target - C[j - 1];
        const double ra = g.values[j - 1], rb = g.values[j];
        double s;
        if (res.remonotonized || ra < 0.0 || rb < 0.0) {
            const double cell = C[j] - C[j - 1];
            s = cell > 0.0 ? h * need / cell : 0.0;
        } else {
            // ra s + (rb - ra) s^2 / (2h) = need
            const double A = 0.5 * (rb - ra) / h;
            if (std::abs(A) * h < 1e-12 * std::max(ra, 1e-300)) {
                s = ra > 0.0 ? need / ra : 0.0;
            } else {
                const double disc = std::max(0.0, ra * ra + 4.0 * A * need);
                s = 2.0 * need / (ra + std::sqrt(disc));
            }
        }
        res.points.push_back(g.x[j - 1] + std::clamp(s, 0.0, h));
    }
    std::sort(res.points.begin(), res.points.end());
    return res;
}

double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = cdf(sorted[i]);
        d = std::max({d, std::abs((i + 1) / n - F), std::abs(i / n - F)});
    }
    return d;
}

GridDensity histogram_density(const std::vector<double>& sample, const std::vector<double>& x) {
    GridDensity out{x, std::vector<double>(x.size(), 0.0)};
    if (x.size() < 2) throw InputError("histogram grid needs at least two points");
    std::vector<double> counts(x.size() - 1, 0.0);
    for (double v : sample) {
        if (v < x.front() || v > x.back()) continue;
        std::size_t j = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), v) - x.begin());
        j = std::clamp<std::size_t>(j, 1, x.size() - 1);
        counts[j - 1] += 1.0;
    }
    const double n = static_cast<double>(sample.size());
    std::vector<double> cell(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) cell[j] = counts[j] / (n * (x[j + 1] - x[j]));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double l = i > 0 ? cell[i - 1] : 0.0, r = i < cell.size() ? cell[i] : 0.0;
        out.values[i] = (i == 0 || i == cell.size()) ? l + r : 0.5 * (l + r);
    }
    return out;
}

DensityComparison compare_densities(const GridDensity& a, const GridDensity& b, double n, std::size_t points) {
    check_grid(a);
    check_grid(b);
    const auto x = uniform_grid(std::min(a.x.front(), b.x.front()), std::max(a.x.back(), b.x.back()), points);
    GridDensity A = resample(a, x), B = resample(b, x);
    for (auto* g : {&A, &B}) {
        const auto v = normalized(*g);
        g->values = v;
    }
    DensityComparison c;
    c.grid_points = points;
    c.tv = total_variation(A, B);
    c.js = jensen_shannon(A, B);
    const auto ma = moments(A, 2), mb = moments(B, 2);
    auto rel = [](double u, double v) { return std::abs(u - v) / std::max(std::abs(v), 1e-300); };
    c.mu1_rel_err = rel(ma[1], mb[1]);
    c.mu2_rel_err = rel(ma[2], mb[2]);
    auto safe_logdet = [&](const GridDensity& g) {
        try {
            return log_determinant(g, n);
        } catch (const InputError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    c.logdet_a = safe_logdet(A);
    c.logdet_b = safe_logdet(B);
    return c;
}

std::string comparison_json(const DensityComparison& c) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["tv"] = num(c.tv);
    j["js"] = num(c.js);
    j["moment_rel_err"] = {num(c.mu1_rel_err), num(c.mu2_rel_err)};
    j["logdet_a"] = num(c.logdet_a);
    j["logdet_b"] = num(c.logdet_b);
    j["grid_points"] = c.grid_points;
    return j.dump(2);
}

std::string comparison_table(const DensityComparison& c) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%-10s %-10s %-12s %-12s %-16s %-16s\n"
                  "%-10.6f %-10.6f %-12.4e %-12.4e %-16.6f %-16.6f\n",
                  "TV", "JS", "relerr_mu1", "relerr_mu2", "logdet_a", "logdet_b", c.tv, c.js, c.mu1_rel_err,
                  c.mu2_rel_err, c.logdet_a, c.logdet_b);
    return buf;
}

}  // namespace freedec
