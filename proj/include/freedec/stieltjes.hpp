#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "freedec/density_fit.hpp"
#include "freedec/ensembles.hpp"
#include "freedec/linalg.hpp"
#include "freedec/orthopoly.hpp"

namespace freedec {

// G(z) = d + c z + sum_j r_j / (z - a_j), real coefficients and real poles outside the support.
struct GlueFunction {
    double d = 0.0;
    double c = 0.0;
    std::vector<double> poles;
    std::vector<double> residues;
    double residual = 0.0;  // RMS misfit on the fitting grid

    int degree() const { return static_cast<int>(poles.size()); }
    cplx eval(cplx z) const;
    cplx derivative(cplx z) const;
};

// Branch-aware m(z) = int rho(x)/(x - z) dx. The secondary branch agrees with the
// principal one on the closed upper half plane and continues it across the
// support cut into the lower half plane.
class StieltjesEvaluator {
public:
    virtual ~StieltjesEvaluator() = default;
    virtual cplx eval(cplx z, Branch b = Branch::Secondary) const = 0;
    // Central differences along the real direction unless overridden.
    virtual cplx derivative(cplx z, Branch b = Branch::Secondary) const;
    virtual double lo() const = 0;
    virtual double hi() const = 0;
    // Density represented by the evaluator (the model density, or the law).
    virtual double density(double x) const;
    virtual std::string method() const = 0;
};

struct WynnResult {
    cplx value;
    int column = 0;          // even column the value came from
    bool breakdown = false;  // some deeper column broke down
};

// Pade value of sum_k c_k z^k from the epsilon table of its partial sums.
WynnResult wynn_epsilon(const std::vector<double>& c, cplx z);
WynnResult wynn_epsilon(const std::vector<cplx>& c, cplx z);

class LawEvaluator final : public StieltjesEvaluator {
public:
    explicit LawEvaluator(EnsembleLaw law) : law_(std::move(law)) {}
    cplx eval(cplx z, Branch b = Branch::Secondary) const override { return law_.stieltjes(z, b); }
    cplx derivative(cplx z, Branch b = Branch::Secondary) const override { return law_.stieltjes_derivative(z, b); }
    double lo() const override { return law_.lo(); }
    double hi() const override { return law_.hi(); }
    double density(double x) const override { return law_.density(x); }
    std::string method() const override { return "law"; }
    const EnsembleLaw& law() const { return law_; }

private:
    EnsembleLaw law_;
};

// m(z) = -pi Lambda(J(t(z))), Lambda(w) = sum_k g_k psi_k w^{k+1}. The lower
// sheet uses the Pade continuation of Lambda at w = 1/J.
class PadeChebyshevEvaluator final : public StieltjesEvaluator {
public:
    explicit PadeChebyshevEvaluator(const DensityModel& m);
    cplx eval(cplx z, Branch b = Branch::Secondary) const override;
    cplx eval_diag(cplx z, Branch b, WynnResult* diag) const;
    double lo() const override { return model_.lo; }
    double hi() const override { return model_.hi; }
    double density(double x) const override { return model_.density(x); }
    std::string method() const override { return "pade-chebyshev"; }

private:
    DensityModel model_;
    std::vector<double> c_;
};

// Jacobi-basis principal branch (per-mode Gauss-Jacobi rules away from the cut,
// pole-subtracted form near it) plus the glue continuation
// m(z) = G(z) - conj(m(conj z)) below the axis.
class JacobiGlueEvaluator final : public StieltjesEvaluator {
public:
    JacobiGlueEvaluator(const DensityModel& m, GlueFunction g, int n0 = 96);
    cplx eval(cplx z, Branch b = Branch::Secondary) const override;
    cplx principal(cplx z) const;
    double lo() const override { return model_.lo; }
    double hi() const override { return model_.hi; }
    // The model as given, so ratio 1 reproduces it exactly.
    double density(double x) const override { return source_.density(x); }
    std::string method() const override { return "jacobi-glue"; }
    const GlueFunction& glue() const { return glue_; }
    const DensityModel& model() const { return model_; }
    // Node count used for mode k.
    int nodes_for_mode(int k) const { return std::max(k + 1, n0_); }

private:
    cplx principal_upper(cplx u) const;  // u in closed C+, t-coordinates, without the 2/L factor
    DensityModel source_, model_;
    GlueFunction glue_;
    int n0_;
    std::vector<double> c_;
    // per-mode rules grouped by size; coef holds sum_k c_k w_i P_k(t_i)
    struct ModeRule {
        int size;
        std::vector<double> nodes, coef;
    };
    std::vector<ModeRule> mode_rules_;
    // subtraction rules (three interlacing sizes) with p(t_i) precomputed
    struct SubRule {
        std::vector<double> nodes, weights, pvals;
    };
    std::vector<SubRule> sub_;
};

// Principal-branch evaluator from a Lanczos tridiagonalization.
struct LanczosResult {
    cplx value;
    int steps = 0;
    bool converged = false;
    bool breakdown = false;
    std::vector<double> alpha, beta;
};

LanczosResult lanczos_stieltjes(const HermitianMatrix& a, int p, cplx z, std::uint64_t seed, double eps = 0.0);
LanczosResult lanczos_stieltjes(const HermitianMatrix& a, int p, cplx z, const std::vector<double>& start,
                                double eps = 0.0);
// Average of single-vector estimates over `probes` random start vectors.
cplx lanczos_stieltjes_averaged(const HermitianMatrix& a, int p, cplx z, std::uint64_t seed, int probes);

// Continued fraction e1^T (T - z)^{-1} e1 for Jacobi coefficients.
cplx jacobi_continued_fraction(const std::vector<double>& alpha, const std::vector<double>& beta, cplx z);

class LanczosEvaluator final : public StieltjesEvaluator {
public:
    LanczosEvaluator(const HermitianMatrix& a, int p, std::uint64_t seed);
    cplx eval(cplx z, Branch b = Branch::Secondary) const override;
    double lo() const override { return lo_; }
    double hi() const override { return hi_; }
    std::string method() const override { return "lanczos"; }

private:
    std::vector<double> alpha_, beta_;
    double lo_, hi_;
};

// Free-function forms.
cplx stieltjes_pade_chebyshev(const DensityModel& m, cplx z, Branch b = Branch::Secondary);
cplx stieltjes_jacobi_glue(const DensityModel& m, const GlueFunction& g, cplx z, Branch b = Branch::Secondary);

// Re G(x) ~ 2 H[rho](x) on a support grid; q poles placed outside [lo, hi].
// With linear = false the slope c is pinned to zero.
GlueFunction fit_glue(const DensityModel& m, int q, bool linear = true);
GlueFunction fit_glue(const std::vector<double>& x, const std::vector<double>& target, double lo, double hi, int q,
                      bool linear = true);

enum class EvaluatorKind { PadeChebyshev, JacobiGlue };
std::string evaluator_name(EvaluatorKind k);
EvaluatorKind parse_evaluator(const std::string& s);

// Glue used when a model carries none: one pole, no linear term.
constexpr int kDefaultGlueDegree = 1;
constexpr bool kDefaultGlueLinear = false;

std::unique_ptr<StieltjesEvaluator> make_evaluator(const DensityModel& m, const std::optional<GlueFunction>& glue,
                                                   EvaluatorKind kind);

}  // namespace freedec
