#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "freedec/linalg.hpp"

namespace freedec {

using cplx = std::complex<double>;

enum class LawKind { Wigner, MarchenkoPastur, KestenMcKay, Wachter, Meixner };
enum class Branch { Principal, Secondary };

std::string law_name(LawKind k);
LawKind parse_law_name(const std::string& s);  // wigner | mp | kesten-mckay | wachter | meixner

struct Atom {
    double location;
    double mass;
};

// Closed-form spectral law. m solves Q m^2 - P m + 1 = 0; P, Q are stored as
// coefficient triples (constant, linear, quadratic).
class EnsembleLaw {
public:
    static EnsembleLaw wigner(double r);
    static EnsembleLaw marchenko_pastur(double lambda);
    static EnsembleLaw kesten_mckay(double d);
    static EnsembleLaw wachter(double a, double b);
    static EnsembleLaw meixner(double a, double b, double c);

    LawKind kind() const { return kind_; }
    const std::map<std::string, double>& params() const { return params_; }
    double param(const std::string& name) const;
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::array<double, 3>& P() const { return p_; }
    const std::array<double, 3>& Q() const { return q_; }

    cplx eval_P(cplx z) const { return p_[0] + z * (p_[1] + z * p_[2]); }
    cplx eval_Q(cplx z) const { return q_[0] + z * (q_[1] + z * q_[2]); }

    // Absolutely continuous part; zero outside [lo, hi].
    double density(double x) const;
    // Stieltjes transform m(z) = int rho/(x-z) (atoms included).
    cplx stieltjes(cplx z, Branch branch = Branch::Principal) const;
    cplx stieltjes_derivative(cplx z, Branch branch = Branch::Principal) const;
    // Principal-value Hilbert transform P(x)/(2Q(x)) on the open support.
    double hilbert(double x) const;
    cplx r_transform(cplx z) const;

    // Mean and variance of the full law (atoms included), from the tail of m.
    double mean() const;
    double variance() const;

private:
    EnsembleLaw(LawKind k) : kind_(k) {}
    void finish();
    cplx disc_root(cplx z) const;  // S(z) = sqrt(c2) sqrt(z-lo) sqrt(z-hi)

    LawKind kind_;
    std::map<std::string, double> params_;
    std::array<double, 3> p_{}, q_{};
    double lo_ = 0.0, hi_ = 0.0;
    double sigma_ = 1.0;  // sign making (P + sigma S)/(2Q) the Herglotz root
    std::vector<Atom> atoms_;
};

struct MeixnerParams {
    double a, b, c;
};
// Parameters of the law whose R-transform is R_{a,b,c}(alpha z).
MeixnerParams meixner_decompression_params(double a, double b, double c, double alpha);

struct EnsembleDraw {
    EnsembleLaw law;
    HermitianMatrix matrix;
    std::map<std::string, double> generator_params;
    // Spectral-measure weights for the Meixner Jacobi matrix (empty otherwise).
    std::vector<double> weights;
};

enum class WishartMethod { Bartlett, Direct };

// GOE (X + X^T)/sqrt(2); law radius 2 sqrt(n).
EnsembleDraw draw_wigner(std::size_t n, std::uint64_t seed);
// (1/d) X X^T with X n x d; law lambda = n/d.
EnsembleDraw draw_marchenko_pastur(std::size_t n, std::size_t d, std::uint64_t seed,
                                   WishartMethod method = WishartMethod::Bartlett);
// sum_{i<k} (O_i + O_i^T), d = 2k (even d only).
EnsembleDraw draw_kesten_mckay(std::size_t n, std::size_t d, std::uint64_t seed);
// Generalized eigenproblem (S1, S1 + S2), S_i = X_i X_i^T with X_i n x d_i.
EnsembleDraw draw_wachter(std::size_t n, std::size_t d1, std::size_t d2, std::uint64_t seed);
// Bordered-Toeplitz Jacobi matrix with alpha0 = 0, beta0^2 = bc, alpha1 = a, beta1^2 = b.
EnsembleDraw draw_meixner(std::size_t n, double a, double b, double c);
// Same matrix family from explicit Jacobi coefficients (alpha0 must be 0).
EnsembleDraw draw_meixner_jacobi(std::size_t n, double alpha0, double beta0, double alpha1, double beta1);

// Unnormalized Wishart W ~ W_n(d, I) (equal in law to X X^T, X n x d).
HermitianMatrix wishart(std::size_t n, std::size_t d, std::uint64_t seed, WishartMethod method);

}  // namespace freedec
