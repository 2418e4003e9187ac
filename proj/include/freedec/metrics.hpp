#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "freedec/density_fit.hpp"

namespace freedec {

// Uniform grid with both endpoints.
std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

// Piecewise-linear resampling; zero outside the source grid.
GridDensity resample(const GridDensity& g, const std::vector<double>& x);

double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

// Both inputs must share the grid; each is renormalized to unit mass first.
double total_variation(const GridDensity& a, const GridDensity& b);
// Jensen-Shannon divergence in nats (at most log 2).
double jensen_shannon(const GridDensity& a, const GridDensity& b);

// Raw moments int x^k rho dx for k = 0..kmax.
std::vector<double> moments(const GridDensity& g, int kmax);

// n int log(x) rho(x) dx for rho renormalized to unit mass; each cell integrates
// log exactly against the linear interpolant of rho, which handles the growth
// of log near 0.
double log_determinant(const GridDensity& g, double n);

struct QmcResult {
    std::vector<double> points;
    bool remonotonized = false;
};

// Van der Corput radical inverse in base 2 of i (i >= 1 gives 1/2, 1/4, 3/4, ...).
double van_der_corput(std::uint64_t i);

// Inverse-CDF transform of the first `count` van der Corput points. A shift
// seed applies a Cranley-Patterson rotation.
QmcResult qmc_sample(const GridDensity& g, std::size_t count, std::optional<std::uint64_t> shift_seed = {});

// sup |F_emp - F| for a sorted sample.
double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf);

// Histogram density of a sample on the cells of `x` (values at cell midpoints interpolated to nodes).
GridDensity histogram_density(const std::vector<double>& sample, const std::vector<double>& x);

struct DensityComparison {
    double tv = 0.0;
    double js = 0.0;
    double mu1_rel_err = 0.0;
    double mu2_rel_err = 0.0;
    double logdet_a = 0.0, logdet_b = 0.0;  // NaN when a support reaches 0
    std::size_t grid_points = 0;
};

// Both densities resampled to a shared 4096-point grid over the union of their ranges.
DensityComparison compare_densities(const GridDensity& a, const GridDensity& b, double n,
                                    std::size_t points = 4096);

std::string comparison_json(const DensityComparison& c);
std::string comparison_table(const DensityComparison& c);

}  // namespace freedec
