#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freedec/linalg.hpp"

namespace freedec {

enum class BasisKind { ChebyshevU, Jacobi };
enum class KernelKind { None, Gaussian, Beta };

std::string basis_name(BasisKind b);
BasisKind parse_basis(const std::string& s);  // chebyshev | jacobi
std::string kernel_name(KernelKind k);
KernelKind parse_kernel(const std::string& s);  // none | gaussian | beta

struct FitMeta {
    std::size_t n_s = 0;
    int K = 0;
    double gamma = 0.0;
    std::string kernel = "none";
    double bandwidth = 0.0;
    std::uint64_t seed = 0;
    double delta = 0.0;
};

// Smoothed density on [lo, hi], t = (2x - lo - hi)/(hi - lo).
//   ChebyshevU: rho(x) = sqrt(1-t^2) sum g_k psi_k U_k(t)       (psi in x-density units)
//   Jacobi:     rho(x) = (2/L) w(t) sum g_k psi_k P_k^{(a,b)}(t)   (psi in t-density units)
struct DensityModel {
    double lo = -1.0, hi = 1.0;
    BasisKind basis = BasisKind::ChebyshevU;
    double alpha = 0.5, beta = 0.5;
    std::vector<double> psi;
    std::vector<double> damping;  // g_k; all ones when undamped
    double gamma = 0.0;
    FitMeta meta;
    bool degenerate = false;
    bool repair_warning = false;

    int K() const { return static_cast<int>(psi.size()) - 1; }
    double width() const { return hi - lo; }
    double t_of(double x) const { return (2.0 * x - lo - hi) / (hi - lo); }
    double x_of(double t) const { return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t; }
    std::vector<double> effective() const;  // g_k psi_k
    double weight(double t) const;          // sqrt(1-t^2) or (1-t)^a (1+t)^b
    double density(double x) const;
    std::vector<double> density(const std::vector<double>& xs) const;
    double mass() const;  // exact, from the k = 0 coefficient
    void validate() const;
};

struct SupportEstimate {
    double lo, hi;
    bool degenerate = false;
};

SupportEstimate estimate_support(const SpectrumSample& s, double delta);

// psi_k = 4/(pi n L) sum_i U_k(t(lambda_i)).
std::vector<double> chebyshev_coefficients(const SpectrumSample& s, double lo, double hi, int K);

struct GridDensity {
    std::vector<double> x;
    std::vector<double> values;
};

double silverman_bandwidth(const SpectrumSample& s);

// Density samples on `points` uniform nodes spanning [lo, hi] (both ends included).
GridDensity kernel_presmooth(const SpectrumSample& s, double lo, double hi, KernelKind kernel, double bandwidth,
                             std::size_t points = 4096);

// Regularized Galerkin projection psi_k = int rho_t P_k dt / (gamma_k + ||P_k||^2),
// gamma_k = gamma (k/(K+1))^2, where rho_t is the grid density pushed to t.
std::vector<double> jacobi_coefficients(const GridDensity& g, double lo, double hi, double a, double b, int K,
                                        double gamma);

std::vector<double> jackson_damping(int K);

// Chebyshev-U coefficients <-> Jacobi(1/2,1/2) coefficients for the same density.
std::vector<double> chebyshev_to_jacobi_half(const std::vector<double>& psi, double lo, double hi);
std::vector<double> jacobi_half_to_chebyshev(const std::vector<double>& psi, double lo, double hi);
// Re-express a ChebyshevU model as a Jacobi(1/2,1/2) model (same density).
DensityModel as_jacobi(const DensityModel& m);

struct RepairReport {
    bool changed = false;
    bool used_fallback = false;
    double min_before = 0.0;
    double mass_before = 0.0;
};

// 2048 Chebyshev points on the open support, used for positivity checks.
std::vector<double> constraint_grid(const DensityModel& m, std::size_t n = 2048);

DensityModel repair_positivity_mass(const DensityModel& m, RepairReport* report = nullptr);

struct FitOptions {
    BasisKind basis = BasisKind::ChebyshevU;
    int K = 50;
    double alpha = 0.5, beta = 0.5;
    double gamma = 1e-4;
    KernelKind kernel = KernelKind::None;  // None: moment estimator (ChebyshevU only)
    double bandwidth = 0.0;                // 0: Silverman
    double delta = 1e-3;
    bool jackson = true;
    bool repair = true;
    std::uint64_t seed = 0;  // recorded only
};

DensityModel fit_density(const SpectrumSample& s, const FitOptions& opt);

}  // namespace freedec
