#pragma once

#include <cstddef>
#include <vector>

#include "freedec/errors.hpp"
#include "freedec/stieltjes.hpp"

namespace freedec {

struct NewtonOptions {
    double tol = 1e-12;  // scaled by (1 + |x|)
    int max_iter = 200;
};

struct CharacteristicSolution {
    cplx z;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

// Root of  w = z - (e^t - 1)/m(z)  on the secondary sheet, by damped Newton
// from `start`. No retries.
CharacteristicSolution newton_characteristic(const StieltjesEvaluator& ev, cplx w, double t, cplx start,
                                             const NewtonOptions& opt = {});

// Continuation in t from the trivial root z = w at t = 0.
CharacteristicSolution continue_characteristic(const StieltjesEvaluator& ev, cplx w, double t,
                                               const NewtonOptions& opt = {});

// x + i delta = z - (e^t - 1)/m(z). Tries `warm` first when given, then
// continuation in t, then cold starts at x + i delta and x - 0.1 i |support|.
CharacteristicSolution solve_characteristic(const StieltjesEvaluator& ev, double x, double t, double delta,
                                            const NewtonOptions& opt = {}, const cplx* warm = nullptr);

struct PointDiagnostics {
    cplx z;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    double raw = 0.0;  // (1/pi) Im m(z) e^{-t} before clipping
};

struct DecompressOptions {
    double ratio = 1.0;        // n / n_s
    std::vector<double> grid;  // empty: automatic
    std::size_t auto_points = 1000;
    double margin = 0.2;
    double delta = 0.0;  // 0: 1e-3 times the source support width
    NewtonOptions newton;
    double max_failure_fraction = 0.05;
    int threads = 0;  // 0: FREEDEC_THREADS, else hardware concurrency
};

struct DecompressionResult {
    double ratio = 1.0, t = 0.0, delta = 0.0;
    std::vector<double> x;
    std::vector<double> density;  // NaN where the solve failed
    std::vector<PointDiagnostics> diagnostics;
    double support_lo = 0.0, support_hi = 0.0;
    std::size_t failures = 0;

    double mass() const;  // trapezoid over successful points
};

class DecompressionFailure : public NumericalError {
public:
    DecompressionFailure(const std::string& what, DecompressionResult r)
        : NumericalError(what), result_(std::move(r)) {}
    const DecompressionResult& result() const { return result_; }

private:
    DecompressionResult result_;
};

// Density of the decompressed law at scale t = log(ratio) on one point, by the
// t-continued characteristic. NaN when the solve fails.
double decompressed_density_at(const StieltjesEvaluator& ev, double x, double t, double delta,
                               const NewtonOptions& opt = {});

DecompressionResult decompress_density(const StieltjesEvaluator& ev, const DecompressOptions& opt);

struct SupportEdges {
    double lo, hi;
};
// Edges where the decompressed density falls below 1e-4 of its peak, evaluated
// at offset delta (0: 1e-9 times the source support width).
SupportEdges track_support(const StieltjesEvaluator& ev, double t, double delta = 0.0);

struct CrossingReport {
    bool crossed = false;
    double t_star = 0.0;
    cplx phi;  // phi(t*, z)
    bool inside_support = false;
};

// phi(t, z) solves z = phi - (e^t - 1)/m(phi); finds the first t with Im phi = 0.
CrossingReport verify_crossing(const StieltjesEvaluator& ev, cplx z, double t_max);

// Worker count: FREEDEC_THREADS when set, else hardware concurrency.
int default_threads();

}  // namespace freedec
