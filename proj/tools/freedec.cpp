#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "freedec/decompress.hpp"
#include "freedec/density_fit.hpp"
#include "freedec/ensembles.hpp"
#include "freedec/errors.hpp"
#include "freedec/io.hpp"
#include "freedec/metrics.hpp"
#include "freedec/stieltjes.hpp"

using namespace freedec;

namespace {

enum Exit { kOk = 0, kInput = 2, kNumerical = 3, kOther = 4 };

struct EnsembleArgs {
    std::string ensemble;
    std::size_t n = 0, d = 0, d1 = 0, d2 = 0;
    double a = 0.1, b = 4.0, c = 0.6;
};

void add_ensemble_flags(CLI::App* cmd, EnsembleArgs& e) {
    cmd->add_option("--ensemble", e.ensemble, "wigner | mp | kesten-mckay | wachter | meixner")
        ->check(CLI::IsMember({"wigner", "mp", "kesten-mckay", "wachter", "meixner"}));
    cmd->add_option("--n", e.n, "matrix order");
    cmd->add_option("--d", e.d, "degrees of freedom (mp) or degree (kesten-mckay)");
    cmd->add_option("--d1", e.d1, "first Wachter dimension");
    cmd->add_option("--d2", e.d2, "second Wachter dimension");
    cmd->add_option("--a", e.a, "Meixner a");
    cmd->add_option("--b", e.b, "Meixner b");
    cmd->add_option("--c", e.c, "Meixner c");
}

void need(bool ok, const std::string& msg) {
    if (!ok) throw InputError(msg);
}

// Limiting law matching the generator normalization for the same flags.
EnsembleLaw law_for(const EnsembleArgs& e) {
    switch (parse_law_name(e.ensemble)) {
        case LawKind::Wigner:
            need(e.n > 0, "wigner needs --n");
            return EnsembleLaw::wigner(2.0 * std::sqrt(double(e.n)));
        case LawKind::MarchenkoPastur:
            need(e.n > 0 && e.d > 0, "mp needs --n and --d");
            return EnsembleLaw::marchenko_pastur(double(e.n) / double(e.d));
        case LawKind::KestenMcKay:
            need(e.d >= 2 && e.d % 2 == 0, "kesten-mckay needs an even --d >= 2");
            return EnsembleLaw::kesten_mckay(double(e.d));
        case LawKind::Wachter:
            need(e.n > 0 && e.d1 > 0 && e.d2 > 0, "wachter needs --n, --d1 and --d2");
            return EnsembleLaw::wachter(double(e.d1) / double(e.n), double(e.d2) / double(e.n));
        case LawKind::Meixner:
            return EnsembleLaw::meixner(e.a, e.b, e.c);
    }
    throw InputError("unknown ensemble");
}

void emit(const std::optional<std::string>& path, const std::string& content) {
    if (path) {
        write_file_atomic(*path, content);
    } else {
        std::fwrite(content.data(), 1, content.size(), stdout);
        std::fflush(stdout);
    }
}

int cmd_sample(const EnsembleArgs& e, std::optional<std::uint64_t> seed, const std::optional<std::string>& out) {
    need(!e.ensemble.empty(), "sample needs --ensemble");
    const LawKind kind = parse_law_name(e.ensemble);
    law_for(e);  // parameter checks before anything else
    if (kind != LawKind::Meixner) need(seed.has_value(), "--seed is required for stochastic ensembles");
    need(e.n > 0 || kind == LawKind::KestenMcKay, "sample needs --n");
    const std::uint64_t s = seed.value_or(0);
    if (kind == LawKind::Meixner) {
        // Uniformly weighted eigenvalues of the Jacobi matrix follow an arcsine
        // law; the Meixner law is its e1 spectral measure. Emit n quantile
        // points of the law instead.
        const EnsembleLaw law = law_for(e);
        GridDensity g{uniform_grid(law.lo(), law.hi(), 8001), {}};
        for (double x : g.x) g.values.push_back(law.density(x));
        emit(out, eigenvalues_text(qmc_sample(g, e.n).points));
        return kOk;
    }
    EnsembleDraw draw = [&] {
        switch (kind) {
            case LawKind::Wigner: return draw_wigner(e.n, s);
            case LawKind::MarchenkoPastur:
                need(e.d > 0, "mp needs --d");
                return draw_marchenko_pastur(e.n, e.d, s);
            case LawKind::KestenMcKay:
                need(e.d >= 2 && e.d % 2 == 0, "kesten-mckay needs an even --d >= 2");
                need(e.n > 0, "sample needs --n");
                return draw_kesten_mckay(e.n, e.d, s);
            case LawKind::Wachter:
                need(e.d1 > 0 && e.d2 > 0, "wachter needs --d1 and --d2");
                return draw_wachter(e.n, e.d1, e.d2, s);
            case LawKind::Meixner: break;
        }
        throw InputError("unknown ensemble");
    }();
    emit(out, eigenvalues_text(eigenvalues_symmetric(draw.matrix).eigenvalues));
    return kOk;
}

struct FitArgs {
    std::string input;
    int K = 50;
    std::string basis = "chebyshev";
    double alpha = 0.5, beta = 0.5, gamma = 1e-4;
    std::string kernel;
    double bandwidth = 0.0, delta = 1e-3;
    bool no_jackson = false, no_repair = false;
    int glue_degree = kDefaultGlueDegree;
    bool glue_linear = kDefaultGlueLinear;
};

int cmd_fit(const FitArgs& f, std::optional<std::uint64_t> seed, const std::optional<std::string>& out) {
    FitOptions o;
    o.basis = parse_basis(f.basis);
    o.K = f.K;
    o.alpha = f.alpha;
    o.beta = f.beta;
    o.gamma = f.gamma;
    // The Jacobi projection needs a presmoothed density; default to the beta kernel.
    o.kernel = f.kernel.empty() ? (o.basis == BasisKind::Jacobi ? KernelKind::Beta : KernelKind::None)
                                : parse_kernel(f.kernel);
    o.bandwidth = f.bandwidth;
    o.delta = f.delta;
    o.jackson = !f.no_jackson;
    o.repair = !f.no_repair;
    o.seed = seed.value_or(0);
    need(f.glue_degree >= 0, "--glue-degree must be >= 0");

    const auto s = SpectrumSample::from_values(parse_eigenvalues(read_text_file(f.input)));
    DensityModel m = fit_density(s, o);
    std::optional<GlueFunction> glue;
    if (f.glue_degree > 0) glue = fit_glue(m, f.glue_degree, f.glue_linear);
    emit(out, model_to_json(m, glue));

    const auto xs = constraint_grid(m);
    double mn = INFINITY;
    for (double x : xs) mn = std::min(mn, m.density(x));
    std::fprintf(stderr, "fit: n_s=%zu K=%d support=[%.6g, %.6g] mass=%.9f min_density=%.3g%s\n", s.eigenvalues.size(),
                 m.K(), m.lo, m.hi, m.mass(), mn, m.repair_warning ? " (repair fallback used)" : "");
    if (glue)
        std::fprintf(stderr, "glue: degree=%d d=%.6g c=%.6g rms=%.3g\n", glue->degree(), glue->d, glue->c,
                     glue->residual);
    return kOk;
}

struct DecompressArgs {
    std::string model;
    std::optional<double> ratio;
    std::optional<double> target_n;
    std::string grid = "auto";
    std::string method = "jacobi-glue";
    double offset = 0.0;
    std::optional<std::string> diagnostics;
};

int cmd_decompress(const DecompressArgs& a, const std::optional<std::string>& out) {
    const ModelFile mf = model_from_json(read_text_file(a.model));
    need(a.ratio.has_value() != a.target_n.has_value(), "give exactly one of --ratio and --n");
    double ratio;
    if (a.ratio) {
        ratio = *a.ratio;
    } else {
        need(mf.model.meta.n_s > 0, "--n needs fit_meta.n_s in the model file; use --ratio");
        ratio = *a.target_n / double(mf.model.meta.n_s);
    }
    need(std::isfinite(ratio) && ratio >= 1.0, "ratio must be >= 1");

    const auto kind = parse_evaluator(a.method);
    const auto ev = make_evaluator(mf.model, mf.glue, kind);
    DecompressOptions o;
    o.ratio = ratio;
    if (auto g = parse_grid_spec(a.grid)) o.grid = std::move(*g);
    o.delta = a.offset;

    std::optional<std::string> diag = a.diagnostics;
    if (!diag && out) diag = *out + ".diag.json";
    try {
        DecompressionResult r = decompress_density(*ev, o);
        if (diag) write_file_atomic(*diag, decompression_diagnostics_json(r, ev->method()));
        emit(out, density_csv(r.x, r.density));
        std::fprintf(stderr, "decompress: ratio=%g points=%zu failures=%zu mass=%.6f support=[%.6g, %.6g]\n", ratio,
                     r.x.size(), r.failures, r.mass(), r.support_lo, r.support_hi);
    } catch (const DecompressionFailure& e) {
        const std::string d = decompression_diagnostics_json(e.result(), ev->method());
        if (diag) write_file_atomic(*diag, d);
        else std::fputs(d.c_str(), stderr);
        throw;
    }
    return kOk;
}

int cmd_metrics(const std::string& a, const std::string& b, double n, const std::optional<std::string>& out) {
    const GridDensity ga = parse_density_csv(read_text_file(a));
    const GridDensity gb = parse_density_csv(read_text_file(b));
    const DensityComparison c = compare_densities(ga, gb, n);
    if (out) write_file_atomic(*out, comparison_json(c));
    std::fputs(comparison_table(c).c_str(), stdout);
    return kOk;
}

int cmd_density(const EnsembleArgs& e, const std::optional<std::string>& model, const std::string& grid,
                const std::optional<std::string>& out) {
    need(model.has_value() != !e.ensemble.empty(), "density needs exactly one of --model and --ensemble");
    auto g = parse_grid_spec(grid);
    std::vector<double> x, y;
    if (model) {
        const ModelFile mf = model_from_json(read_text_file(*model));
        x = g ? *g : uniform_grid(mf.model.lo, mf.model.hi, 1000);
        for (double v : x) y.push_back(std::max(0.0, mf.model.density(v)));
    } else {
        const EnsembleLaw law = law_for(e);
        const double pad = 0.05 * (law.hi() - law.lo());
        x = g ? *g : uniform_grid(law.lo() - pad, law.hi() + pad, 1000);
        for (double v : x) y.push_back(law.density(v));
    }
    emit(out, density_csv(x, y));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral densities of large matrices from small random submatrices"};
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;

    EnsembleArgs ens;
    auto* sample = app.add_subcommand("sample", "draw an ensemble matrix and write its eigenvalues");
    add_ensemble_flags(sample, ens);
    sample->add_option("--seed", seed, "random seed (required unless the ensemble is deterministic)");
    sample->add_option("-o,--output", out, "eigenvalue file (default stdout)");

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "fit a smoothed density model to eigenvalues");
    fitc->add_option("eigenvalues", fit.input, "eigenvalue file")->required();
    fitc->add_option("--K", fit.K, "polynomial degree")->check(CLI::Range(0, 2000));
    fitc->add_option("--basis", fit.basis, "chebyshev | jacobi")->check(CLI::IsMember({"chebyshev", "jacobi"}));
    fitc->add_option("--alpha", fit.alpha, "Jacobi alpha");
    fitc->add_option("--beta", fit.beta, "Jacobi beta");
    fitc->add_option("--gamma", fit.gamma, "Tikhonov strength");
    fitc->add_option("--kernel", fit.kernel, "none | gaussian | beta")->check(CLI::IsMember({"none", "gaussian", "beta"}));
    fitc->add_option("--bandwidth", fit.bandwidth, "kernel bandwidth (0: Silverman)");
    fitc->add_option("--delta", fit.delta, "support padding, in units of 1/n_s");
    fitc->add_flag("--no-jackson", fit.no_jackson, "skip Jackson damping");
    fitc->add_flag("--no-repair", fit.no_repair, "skip positivity and mass repair");
    fitc->add_option("--glue-degree", fit.glue_degree, "glue poles (0: store no glue)");
    fitc->add_flag("--glue-linear", fit.glue_linear, "allow a linear glue term");
    fitc->add_option("--seed", seed, "recorded in the model file");
    fitc->add_option("-o,--output", out, "model file (default stdout)");

    DecompressArgs dec;
    auto* decc = app.add_subcommand("decompress", "evolve a fitted model to a larger matrix order");
    decc->add_option("model", dec.model, "model file")->required();
    decc->add_option("--ratio", dec.ratio, "n / n_s");
    decc->add_option("--n", dec.target_n, "target order (uses fit_meta.n_s)");
    decc->add_option("--grid", dec.grid, "lo:hi:count or auto");
    decc->add_option("--method", dec.method, "jacobi-glue | pade-chebyshev");
    decc->add_option("--delta", dec.offset, "imaginary offset for the characteristic solve (0: automatic)");
    decc->add_option("--diagnostics", dec.diagnostics, "per-point diagnostics JSON (default <output>.diag.json)");
    decc->add_option("-o,--output", out, "density CSV (default stdout)");

    std::string ma, mb;
    double morder = 1.0;
    auto* met = app.add_subcommand("metrics", "compare two density files");
    met->add_option("a", ma, "density CSV")->required();
    met->add_option("b", mb, "reference density CSV")->required();
    met->add_option("--n", morder, "matrix order for the log-determinant");
    met->add_option("-o,--output", out, "JSON report");

    EnsembleArgs dens;
    std::optional<std::string> dmodel;
    std::string dgrid = "auto";
    auto* den = app.add_subcommand("density", "evaluate an analytic law or a fitted model on a grid");
    add_ensemble_flags(den, dens);
    den->add_option("--model", dmodel, "model file");
    den->add_option("--grid", dgrid, "lo:hi:count or auto");
    den->add_option("-o,--output", out, "density CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample) return cmd_sample(ens, seed, out);
        if (*fitc) return cmd_fit(fit, seed, out);
        if (*decc) return cmd_decompress(dec, out);
        if (*met) return cmd_metrics(ma, mb, morder, out);
        if (*den) return cmd_density(dens, dmodel, dgrid, out);
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInput;
    } catch (const DecompressionFailure& e) {
        std::fprintf(stderr, "error: %s (%zu of %zu points failed)\n", e.what(), e.result().failures,
                     e.result().x.size());
        return kNumerical;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kOther;
    }
    return kOther;
}
