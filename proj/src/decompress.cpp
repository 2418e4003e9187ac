#include "freedec/decompress.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>

namespace freedec {

using std::numbers::pi;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double source_width(const StieltjesEvaluator& ev) { return ev.hi() - ev.lo(); }

}  // namespace

int default_threads() {
    if (const char* env = std::getenv("FREEDEC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

CharacteristicSolution newton_characteristic(const StieltjesEvaluator& ev, cplx w, double t, cplx start,
                                             const NewtonOptions& opt) {
    const double a = std::expm1(t);
    if (a == 0.0) return {w, 0, 0.0, true};
    const double tol = opt.tol * (1.0 + std::abs(w));
    auto F = [&](cplx z) { return z - a / ev.eval(z, Branch::Secondary) - w; };

    CharacteristicSolution s;
    s.z = start;
    cplx f = F(start);
    if (!finite(f)) return s;
    for (int it = 0; it < opt.max_iter; ++it) {
        s.iterations = it;
        s.residual = std::abs(f);
        if (s.residual <= tol) {
            s.converged = true;
            return s;
        }
        const cplx m = ev.eval(s.z, Branch::Secondary);
        const cplx dm = ev.derivative(s.z, Branch::Secondary);
        const cplx fp = 1.0 + a * dm / (m * m);
        if (!finite(fp) || fp == 0.0) return s;
        const cplx step = f / fp;
        double lam = 1.0;
        bool moved = false;
        for (int h = 0; h < 40; ++h, lam *= 0.5) {
            const cplx zn = s.z - lam * step;
            const cplx fn = F(zn);
            if (finite(fn) && std::abs(fn) < std::abs(f)) {
                s.z = zn;
                f = fn;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    s.residual = std::abs(f);
    s.converged = s.residual <= tol;
    return s;
}

CharacteristicSolution continue_characteristic(const StieltjesEvaluator& ev, cplx w, double t,
                                               const NewtonOptions& opt) {
    if (t == 0.0) return {w, 0, 0.0, true};
    double tc = 0.0, dt = t / 10.0;
    cplx z = w, z_prev = w;
    double dt_prev = 0.0;
    int total = 0;
    NewtonOptions loose = opt;
    loose.tol = std::max(opt.tol, 1e-9);
    while (tc < t) {
        const double tn = std::min(t, tc + dt);
        const double step = tn - tc;
        // Secant predictor along the path.
        const cplx guess = dt_prev > 0.0 ? z + (z - z_prev) * (step / dt_prev) : z;
        CharacteristicSolution s = newton_characteristic(ev, w, tn, guess, tn == t ? opt : loose);
        if (!s.converged && dt_prev > 0.0) s = newton_characteristic(ev, w, tn, z, tn == t ? opt : loose);
        total += s.iterations;
        if (s.converged) {
            z_prev = z;
            z = s.z;
            dt_prev = step;
            tc = tn;
            dt = std::min(1.5 * dt, t / 4.0);
        } else {
            dt *= 0.5;
            if (dt < 1e-7 * t) return {z, total, s.residual, false};
        }
    }
    return {z, total, std::abs(z - std::expm1(t) / ev.eval(z, Branch::Secondary) - w), true};
}

CharacteristicSolution solve_characteristic(const StieltjesEvaluator& ev, double x, double t, double delta,
                                            const NewtonOptions& opt, const cplx* warm) {
    if (t < 0.0 || !std::isfinite(t)) throw InputError("decompression scale t must be finite and >= 0");
    if (!(delta > 0.0)) throw InputError("delta must be positive");
    const cplx w(x, delta);
    if (t == 0.0) return {w, 0, 0.0, true};
    int spent = 0;
    if (warm) {
        auto s = newton_characteristic(ev, w, t, *warm, opt);
        if (s.converged) return s;
        spent += s.iterations;
    }
    auto s = continue_characteristic(ev, w, t, opt);
    if (s.converged) return s;
    spent += s.iterations;
    for (cplx start : {w, cplx(x, -0.1 * source_width(ev))}) {
        s = newton_characteristic(ev, w, t, start, opt);
        spent += s.iterations;
        if (s.converged) {
            s.iterations = spent;
            return s;
        }
    }
    s.iterations = spent;
    return s;
}

double decompressed_density_at(const StieltjesEvaluator& ev, double x, double t, double delta,
                               const NewtonOptions& opt) {
    if (t == 0.0) return ev.density(x);
    auto s = solve_characteristic(ev, x, t, delta, opt);
    if (!s.converged) return kNaN;
    return std::max(0.0, ev.eval(s.z, Branch::Secondary).imag() / pi * std::exp(-t));
}

double DecompressionResult::mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (std::isnan(density[i]) || std::isnan(density[i + 1])) continue;
        m += 0.5 * (x[i + 1] - x[i]) * (density[i] + density[i + 1]);
    }
    return m;
}

SupportEdges track_support(const StieltjesEvaluator& ev, double t, double delta) {
    if (t < 0.0) throw InputError("decompression scale t must be >= 0");
    const double W = source_width(ev);
    // The density at x + i delta carries a Lorentzian tail ~ delta / d^2 that
    // would sit above the edge threshold far outside the support, so edges are
    // located much closer to the axis than the grid evaluation.
    if (delta <= 0.0) delta = 1e-9 * W;
    const double c = 0.5 * (ev.lo() + ev.hi());
    double half = 0.5 * W * std::exp(t) * 1.05;
    // Successive scan points reuse the previous root as a Newton start.
    cplx warm;
    bool have_warm = false;
    auto rho = [&](double x) {
        if (t == 0.0) return std::max(0.0, ev.density(x));
        const auto s = solve_characteristic(ev, x, t, delta, NewtonOptions{}, have_warm ? &warm : nullptr);
        have_warm = s.converged;
        if (!s.converged) return 0.0;
        warm = s.z;
        return std::max(0.0, ev.eval(s.z, Branch::Secondary).imag() / pi * std::exp(-t));
    };

    const int N = 400;
    std::vector<double> xs(N), ys(N);
    for (int attempt = 0; attempt <= 10; ++attempt, half *= 2.0) {
        double peak = 0.0;
        for (int i = 0; i < N; ++i) {
            xs[i] = c - half + 2.0 * half * i / (N - 1);
            ys[i] = rho(xs[i]);
            peak = std::max(peak, ys[i]);
        }
        if (!(peak > 0.0)) throw NumericalError("decompressed density vanishes on the search bracket");
        const double thr = 1e-4 * peak;
        int first = -1, last = -1;
        for (int i = 0; i < N; ++i)
            if (ys[i] >= thr) {
                if (first < 0) first = i;
                last = i;
            }
        if (first == 0 || last == N - 1) continue;  // mass reaches the bracket: widen

        auto bisect = [&](double outside, double inside) {
            for (int it = 0; it < 60 && std::abs(inside - outside) > 1e-12 * (1.0 + std::abs(inside)); ++it) {
                const double mid = 0.5 * (outside + inside);
                (rho(mid) >= thr ? inside : outside) = mid;
            }
            return 0.5 * (outside + inside);
        };
        return {bisect(xs[first - 1], xs[first]), bisect(xs[last + 1], xs[last])};
    }
    throw NumericalError("support edges not bracketed after 10 doublings");
}

DecompressionResult decompress_density(const StieltjesEvaluator& ev, const DecompressOptions& opt) {
    if (!(opt.ratio >= 1.0) || !std::isfinite(opt.ratio)) throw InputError("ratio n/n_s must be finite and >= 1");
    DecompressionResult r;
    r.ratio = opt.ratio;
    r.t = std::log(opt.ratio);
    r.delta = opt.delta > 0.0 ? opt.delta : 1e-3 * source_width(ev);
    if (r.delta >= 0.1 * source_width(ev)) throw InputError("delta must be small against the support width");

    if (opt.grid.empty()) {
        if (opt.auto_points < 2) throw InputError("auto grid needs at least two points");
        const SupportEdges e = track_support(ev, r.t);
        r.support_lo = e.lo;
        r.support_hi = e.hi;
        const double W = e.hi - e.lo;
        const double c = 0.5 * (e.lo + e.hi), h = 0.5 * W + opt.margin * W;
        const std::size_t N = opt.auto_points;
        r.x.resize(N);
        for (std::size_t j = 0; j < N; ++j) r.x[j] = c - h * std::cos(pi * j / (N - 1));
        r.x.front() = c - h;
        r.x.back() = c + h;
    } else {
        r.x = opt.grid;
        for (std::size_t j = 0; j < r.x.size(); ++j) {
            if (!std::isfinite(r.x[j])) throw InputError("grid contains a non-finite value");
            if (j > 0 && !(r.x[j] > r.x[j - 1])) throw InputError("grid must be strictly increasing");
        }
        r.support_lo = r.x.front();
        r.support_hi = r.x.back();
    }

    const std::size_t N = r.x.size();
    r.density.assign(N, kNaN);
    r.diagnostics.assign(N, PointDiagnostics{});
    const double scale = std::exp(-r.t);

    // Fixed chunking keeps results independent of the worker count.
    constexpr std::size_t kChunk = 64;
    const std::size_t chunks = (N + kChunk - 1) / kChunk;
    auto run_chunk = [&](std::size_t ci) {
        cplx prev;
        bool have_prev = false;
        for (std::size_t j = ci * kChunk; j < std::min(N, (ci + 1) * kChunk); ++j) {
            PointDiagnostics& d = r.diagnostics[j];
            if (r.t == 0.0) {
                d.z = cplx(r.x[j], r.delta);
                d.converged = true;
                d.raw = ev.density(r.x[j]);
                r.density[j] = d.raw;
                continue;
            }
            const auto s = solve_characteristic(ev, r.x[j], r.t, r.delta, opt.newton, have_prev ? &prev : nullptr);
            d.z = s.z;
            d.iterations = s.iterations;
            d.residual = s.residual;
            d.converged = s.converged;
            if (!s.converged) {
                have_prev = false;
                d.raw = kNaN;
                continue;
            }
            d.raw = ev.eval(s.z, Branch::Secondary).imag() / pi * scale;
            r.density[j] = std::max(0.0, d.raw);
            prev = s.z;
            have_prev = true;
        }
    };

    const int threads = std::min<int>(opt.threads > 0 ? opt.threads : default_threads(), static_cast<int>(chunks));
    if (threads <= 1) {
        for (std::size_t ci = 0; ci < chunks; ++ci) run_chunk(ci);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i)
            pool.emplace_back([&] {
                for (std::size_t ci = next++; ci < chunks; ci = next++) run_chunk(ci);
            });
        for (auto& th : pool) th.join();
    }

    for (const auto& d : r.diagnostics) r.failures += d.converged ? 0 : 1;
    if (static_cast<double>(r.failures) > opt.max_failure_fraction * static_cast<double>(N))
        throw DecompressionFailure(std::to_string(r.failures) + " of " + std::to_string(N) +
                                       " characteristic solves failed",
                                   std::move(r));
    return r;
}

CrossingReport verify_crossing(const StieltjesEvaluator& ev, cplx z, double t_max) {
    if (!(z.imag() > 0.0)) throw InputError("crossing check needs z in the upper half plane");
    if (!(t_max > 0.0)) throw InputError("t_max must be positive");
    CrossingReport rep;
    NewtonOptions opt;
    double tc = 0.0, dt = 1e-8 * std::max(1.0, t_max);
    cplx phi = z;
    while (tc < t_max) {
        const double tn = std::min(t_max, tc + dt);
        auto s = newton_characteristic(ev, z, tn, phi, opt);
        if (!s.converged) {
            dt *= 0.5;
            if (dt < 1e-14 * std::max(1.0, t_max)) return rep;
            continue;
        }
        if (s.z.imag() <= 0.0) {
            double a = tc, b = tn;
            cplx pa = phi, pb = s.z;
            for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, b); ++it) {
                const double mid = 0.5 * (a + b);
                auto sm = newton_characteristic(ev, z, mid, pa, opt);
                if (!sm.converged) sm = newton_characteristic(ev, z, mid, pb, opt);
                if (!sm.converged) break;
                if (sm.z.imag() > 0.0) {
                    a = mid;
                    pa = sm.z;
                } else {
                    b = mid;
                    pb = sm.z;
                }
            }
            rep.crossed = true;
            rep.t_star = 0.5 * (a + b);
            rep.phi = std::abs(pa.imag()) < std::abs(pb.imag()) ? pa : pb;
            const double tol = 1e-6 * source_width(ev);
            rep.inside_support = rep.phi.real() >= ev.lo() - tol && rep.phi.real() <= ev.hi() + tol;
            return rep;
        }
        phi = s.z;
        tc = tn;
        dt = std::min(2.0 * dt, t_max / 50.0);
    }
    return rep;
}

}  // namespace freedec
