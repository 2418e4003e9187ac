#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <numbers>

#include "freedec/decompress.hpp"
#include "freedec/metrics.hpp"

using namespace freedec;
using std::numbers::pi;

namespace {

DensityModel mp_model(std::uint64_t seed = 1) {
    const auto d = draw_marchenko_pastur(1000, 50000, seed);
    return fit_density(SpectrumSample::from_values(eigenvalues_symmetric(d.matrix).eigenvalues), FitOptions{});
}

GridDensity law_grid(const EnsembleLaw& law, std::size_t points = 4001) {
    GridDensity g;
    g.x = uniform_grid(law.lo(), law.hi(), points);
    for (double x : g.x) g.values.push_back(law.density(x));
    return g;
}

GridDensity as_grid(const DecompressionResult& r) { return {r.x, r.density}; }

double tv_to_law(const DecompressionResult& r, const EnsembleLaw& law) {
    return compare_densities(as_grid(r), law_grid(law), 1.0).tv;
}

// Passes everything through to a law except that m(z) is NaN right of `cut`.
class BrokenEvaluator final : public StieltjesEvaluator {
public:
    BrokenEvaluator(EnsembleLaw law, double cut) : inner_(std::move(law)), cut_(cut) {}
    cplx eval(cplx z, Branch b) const override {
        return z.real() > cut_ ? cplx(NAN, NAN) : inner_.eval(z, b);
    }
    double lo() const override { return inner_.lo(); }
    double hi() const override { return inner_.hi(); }
    std::string method() const override { return "broken"; }

private:
    LawEvaluator inner_;
    double cut_;
};

}  // namespace

TEST_CASE("characteristic solves") {
    const LawEvaluator mp(EnsembleLaw::marchenko_pastur(1.0 / 50));
    SUBCASE("t = 0 is the identity") {
        for (double x : {0.8, 1.0, 1.25}) {
            const auto s = solve_characteristic(mp, x, 0.0, 1e-3);
            CHECK(s.converged);
            CHECK(s.z == cplx(x, 1e-3));
        }
    }
    SUBCASE("MP x32 at the bulk centre of MP(32/50)") {
        const double t = std::log(32.0);
        const auto s = solve_characteristic(mp, 1.0, t, 1e-3);
        REQUIRE(s.converged);
        const cplx m = mp.eval(s.z);
        CHECK(std::abs(cplx(1.0, 1e-3) - s.z + std::expm1(t) / m) <= 1e-12 * 2.0);
        CHECK(s.residual <= 1e-12 * 2.0);
        CHECK(s.z.imag() < 0.0);
    }
    SUBCASE("Wigner roots at x = 0 lie on the imaginary axis") {
        const LawEvaluator w(EnsembleLaw::wigner(2.0));
        for (double t : {0.1, 1.0, std::log(32.0)}) {
            const auto s = solve_characteristic(w, 0.0, t, 1e-3);
            REQUIRE(s.converged);
            CHECK(std::abs(s.z.real()) <= 1e-10);
        }
    }
}

TEST_CASE("decompression of closed-form laws") {
    const double t = std::log(32.0);
    SUBCASE("MP(1/50) -> MP(32/50)") {
        DecompressOptions opt;
        opt.ratio = 32.0;
        const auto r = decompress_density(LawEvaluator(EnsembleLaw::marchenko_pastur(1.0 / 50)), opt);
        CHECK(r.failures == 0);
        CHECK(tv_to_law(r, EnsembleLaw::marchenko_pastur(32.0 / 50)) <= 0.02);
    }
    SUBCASE("Wigner r -> r e^{t/2}") {
        DecompressOptions opt;
        opt.ratio = 32.0;
        const auto r = decompress_density(LawEvaluator(EnsembleLaw::wigner(2.0)), opt);
        CHECK(tv_to_law(r, EnsembleLaw::wigner(2.0 * std::exp(t / 2))) <= 0.02);
    }
    SUBCASE("mass and positivity along the flow") {
        for (double ratio : {1.0, 2.0, 8.0, 32.0}) {
            CAPTURE(ratio);
            DecompressOptions opt;
            opt.ratio = ratio;
            for (const auto& law : {EnsembleLaw::marchenko_pastur(1.0 / 50), EnsembleLaw::wigner(1.0)}) {
                const auto r = decompress_density(LawEvaluator(law), opt);
                CHECK(r.mass() >= 0.98);
                CHECK(r.mass() <= 1.02);
                for (double v : r.density) CHECK(v >= -1e-9);
            }
        }
    }
}

TEST_CASE("decompression of a fitted model") {
    const auto m = mp_model(2);
    SUBCASE("ratio 1 reproduces the model") {
        for (EvaluatorKind k : {EvaluatorKind::PadeChebyshev, EvaluatorKind::JacobiGlue}) {
            const auto ev = make_evaluator(m, std::nullopt, k);
            DecompressOptions opt;
            const auto r = decompress_density(*ev, opt);
            double sup = 0.0;
            for (std::size_t i = 0; i < r.x.size(); ++i) sup = std::max(sup, std::abs(r.density[i] - m.density(r.x[i])));
            CHECK(sup <= 1e-6);
        }
    }
    const auto ev = make_evaluator(m, std::nullopt, EvaluatorKind::JacobiGlue);
    SUBCASE("mass along the flow") {
        for (double ratio : {2.0, 8.0, 32.0}) {
            DecompressOptions opt;
            opt.ratio = ratio;
            const auto r = decompress_density(*ev, opt);
            CHECK(r.mass() >= 0.98);
            CHECK(r.mass() <= 1.02);
        }
    }
    SUBCASE("result does not depend on the worker count") {
        DecompressOptions opt;
        opt.ratio = 32.0;
        opt.threads = 1;
        const auto a = decompress_density(*ev, opt);
        opt.threads = 5;
        const auto b = decompress_density(*ev, opt);
        CHECK(a.x == b.x);
        for (std::size_t i = 0; i < a.density.size(); ++i)
            CHECK(std::memcmp(&a.density[i], &b.density[i], sizeof(double)) == 0);
    }
    SUBCASE("semigroup: x4 then refit then x8 against x32") {
        DecompressOptions o4;
        o4.ratio = 4.0;
        const auto r4 = decompress_density(*ev, o4);
        GridDensity g;
        for (std::size_t i = 0; i < r4.x.size(); ++i)
            if (r4.x[i] >= r4.support_lo && r4.x[i] <= r4.support_hi) {
                g.x.push_back(r4.x[i]);
                g.values.push_back(std::max(0.0, r4.density[i]));
            }
        DensityModel refit;
        refit.lo = r4.support_lo;
        refit.hi = r4.support_hi;
        refit.psi = jacobi_half_to_chebyshev(jacobi_coefficients(g, refit.lo, refit.hi, 0.5, 0.5, 50, 1e-4), refit.lo,
                                             refit.hi);
        refit.damping = jackson_damping(50);
        refit = repair_positivity_mass(refit);
        DecompressOptions o8;
        o8.ratio = 8.0;
        const auto two = decompress_density(*make_evaluator(refit, std::nullopt, EvaluatorKind::JacobiGlue), o8);
        DecompressOptions o32;
        o32.ratio = 32.0;
        const auto direct = decompress_density(*ev, o32);
        CHECK(compare_densities(as_grid(two), as_grid(direct), 1.0).tv <= 0.05);
    }
}

TEST_CASE("support tracking") {
    const LawEvaluator mp(EnsembleLaw::marchenko_pastur(1.0 / 50));
    SUBCASE("t = 0") {
        const auto e = track_support(mp, 0.0);
        const double w = mp.hi() - mp.lo();
        CHECK(std::abs(e.lo - mp.lo()) <= 0.01 * w);
        CHECK(std::abs(e.hi - mp.hi()) <= 0.01 * w);
    }
    SUBCASE("MP x32") {
        const auto e = track_support(mp, std::log(32.0));
        const double s = std::sqrt(32.0 / 50);
        CHECK(e.lo == doctest::Approx((1 - s) * (1 - s)).epsilon(0.02));
        CHECK(e.hi == doctest::Approx((1 + s) * (1 + s)).epsilon(0.02));
    }
    SUBCASE("MP x32 from a fitted model") {
        // Sample edges carry Tracy-Widom noise, so the fitted edges are compared
        // on the scale of the target support width.
        const auto m = mp_model(1);
        const auto e = track_support(*make_evaluator(m, std::nullopt, EvaluatorKind::JacobiGlue), std::log(32.0));
        const double s = std::sqrt(32.0 / 50), lo = (1 - s) * (1 - s), hi = (1 + s) * (1 + s);
        CHECK(std::abs(e.lo - lo) <= 0.02 * (hi - lo));
        CHECK(std::abs(e.hi - hi) <= 0.02 * (hi - lo));
    }
    SUBCASE("Wigner x4") {
        const LawEvaluator w(EnsembleLaw::wigner(2.0));
        const auto e = track_support(w, std::log(4.0));
        CHECK(e.lo == doctest::Approx(-4.0).epsilon(0.02));
        CHECK(e.hi == doctest::Approx(4.0).epsilon(0.02));
    }
    SUBCASE("Wigner fit x32 edges scale with the square root of the ratio") {
        const auto d = draw_wigner(1000, 3);
        const auto m = fit_density(SpectrumSample::from_values(eigenvalues_symmetric(d.matrix).eigenvalues), FitOptions{});
        DecompressOptions opt;
        opt.ratio = 32.0;
        const auto r = decompress_density(*make_evaluator(m, std::nullopt, EvaluatorKind::JacobiGlue), opt);
        double peak = 0.0;
        for (double v : r.density) peak = std::max(peak, v);
        // Outermost points where the density clears 1% of the peak.
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i < r.x.size(); ++i)
            if (r.density[i] >= 1e-2 * peak) {
                lo = std::min(lo, r.x[i]);
                hi = std::max(hi, r.x[i]);
            }
        const double edge = d.law.param("r") * std::sqrt(32.0);
        CHECK(hi == doctest::Approx(edge).epsilon(0.02));
        CHECK(lo == doctest::Approx(-edge).epsilon(0.02));
    }
}

TEST_CASE("crossing of the characteristic curves") {
    const double lam = 1.0 / 50;
    const LawEvaluator mp(EnsembleLaw::marchenko_pastur(lam));
    SUBCASE("z = 1 + i crosses on the support") {
        const auto c = verify_crossing(mp, cplx(1.0, 1.0), 20.0);
        REQUIRE(c.crossed);
        CHECK(c.t_star > 0.0);
        CHECK(c.inside_support);
        CHECK(c.phi.real() >= std::pow(1 - std::sqrt(lam), 2));
        CHECK(c.phi.real() <= std::pow(1 + std::sqrt(lam), 2));
    }
    SUBCASE("crossing time grows with Im z") {
        double prev = 0.0;
        for (double y : {0.05, 0.1, 0.3, 0.6, 1.2}) {
            const auto c = verify_crossing(mp, cplx(1.0, y), 30.0);
            REQUIRE(c.crossed);
            CHECK(c.t_star > prev);
            prev = c.t_star;
        }
    }
    SUBCASE("starting next to the cut") {
        const auto c = verify_crossing(mp, cplx(1.0, 1e-6), 5.0);
        REQUIRE(c.crossed);
        CHECK(c.t_star <= 1e-4);
    }
    SUBCASE("t_max too small") {
        CHECK_FALSE(verify_crossing(mp, cplx(1.0, 1.0), 1e-3).crossed);
    }
}

TEST_CASE("failing characteristic solves abort with diagnostics") {
    const auto law = EnsembleLaw::marchenko_pastur(1.0 / 50);
    const BrokenEvaluator broken(law, 1.0);
    DecompressOptions opt;
    opt.ratio = 4.0;
    try {
        decompress_density(broken, opt);
        FAIL("expected DecompressionFailure");
    } catch (const DecompressionFailure& e) {
        const auto& r = e.result();
        CHECK(r.failures > r.x.size() / 20);
        std::size_t flagged = 0;
        for (std::size_t i = 0; i < r.x.size(); ++i)
            if (!r.diagnostics[i].converged) {
                ++flagged;
                CHECK(std::isnan(r.density[i]));
            }
        CHECK(flagged == r.failures);
    }
}

TEST_CASE("decompression commutes with rescaling the spectrum") {
    // Unnormalized Gram matrices put the support at O(d); nothing may assume unit scale.
    const auto d = draw_marchenko_pastur(1000, 50000, 4);
    auto eig = eigenvalues_symmetric(d.matrix).eigenvalues;
    const double s = 5e4;
    const DensityModel m = fit_density(SpectrumSample::from_values(eig), FitOptions{});
    for (double& v : eig) v *= s;
    FitOptions fo;
    fo.delta *= s;  // the support padding delta/n is in absolute units
    const DensityModel ms = fit_density(SpectrumSample::from_values(eig), fo);
    const JacobiGlueEvaluator ev(m, fit_glue(m, 1, false)), evs(ms, fit_glue(ms, 1, false));
    DecompressOptions o;
    o.ratio = 8.0;
    o.threads = 1;
    const auto r = decompress_density(ev, o);
    const auto rs = decompress_density(evs, o);
    REQUIRE(r.x.size() == rs.x.size());
    CHECK(rs.failures == 0);
    CHECK(rs.support_hi == doctest::Approx(s * r.support_hi).epsilon(1e-6));
    double worst = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        worst = std::max(worst, std::abs(s * rs.density[i] - r.density[i]));
        peak = std::max(peak, r.density[i]);
    }
    CHECK(worst <= 1e-6 * peak);
}
