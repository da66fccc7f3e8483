#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace wb {

/// Monotone grid-sampled cdf on [0, x_max] with an exponential tail
/// extrapolation beyond x_max:
///   1 - F(x) = (1 - F(x_max)) * exp(-tail_rate * (x - x_max)).
/// values[i] = F(i * dx) for dx = x_max / n, so there are n+1 samples and
/// values[0] = 0.
class GridCdf {
public:
    GridCdf(double x_max, Eigen::VectorXd values, double tail_rate);

    double x_max() const { return x_max_; }
    int n() const { return static_cast<int>(values_.size()) - 1; }
    double dx() const { return x_max_ / n(); }
    double tail_rate() const { return tail_rate_; }
    const Eigen::VectorXd& values() const { return values_; }

    /// F(x) for any x >= 0: linear interpolation on the grid, exponential
    /// tail beyond x_max.
    double at(double x) const;

    /// Survival 1 - F(x).
    double survival(double x) const { return 1.0 - at(x); }

    /// Mean: trapezoid integral of 1 - F over the grid plus the closed-form
    /// tail (1 - F(x_max)) / tail_rate. Throws InfiniteMean when the tail
    /// mass is positive but tail_rate is 0.
    double mean() const;

    /// Quantile via bisection on the grid, tail formula above F(x_max).
    double quantile(double u) const;

    static GridCdf exponential(double rate, double x_max = 30.0, int n = 30000);
    static GridCdf uniform01(double x_max = 30.0, int n = 30000);
    /// Steep linear ramp from a - width/2 to a + width/2 (point mass as width -> 0).
    static GridCdf ramp(double a, double width, double x_max = 30.0, int n = 30000);
    static GridCdf weibull(double shape, double scale = 1.0, double x_max = 30.0,
                           int n = 30000);
    /// Lognormal-shaped cdf (mu, sigma of the underlying normal).
    static GridCdf lognormal(double mu, double sigma, double x_max = 30.0, int n = 30000);

private:
    double x_max_;
    Eigen::VectorXd values_;
    double tail_rate_;
};

/// Stationary residual-life (equilibrium) distribution
///   G(x) = (1/mu) * integral_0^x (1 - F(t)) dt.
GridCdf residual_cdf(const GridCdf& f);

/// Length-biased distribution G(x) = (1/mu) * integral_0^x t dF(t).
GridCdf length_biased_cdf(const GridCdf& f);

/// sup_x | residual_cdf(F)(x) - F(q x) | over the grid.
double scaling_defect(const GridCdf& f, double q);

struct ScalingReport {
    double q = 0.0;
    double defect = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct SolveCqConfig {
    double damping = 0.5;
    int max_iters = 2000;
    double change_tol = 1e-8;
    double defect_tol = 1e-3;
};

/// Damped fixed-point iteration F <- (1-d) F + d T(F) with
/// T(F)(y) = residual_cdf(F)(y / q), renormalized to a valid cdf each
/// sweep. Constructs a member of the scaling class for 0 < q <= 1; rejects
/// q > 1 (the class is empty there).
std::pair<GridCdf, ScalingReport> solve_cq(double q, const GridCdf& init,
                                           const SolveCqConfig& cfg = {});

enum class BiasMode { Plain, LengthBiased };

struct BiasSimResult {
    double mean = 0.0;
    long count = 0;
    std::vector<long> histogram;  // counts per grid decile of [0, x_max]
};

/// Draws n lifetimes by inverse cdf, either from F itself or from its
/// length-biased version (the inspection-bias sampling of long-lived items).
BiasSimResult bias_sim(const GridCdf& f, long n, BiasMode mode, std::uint64_t seed);

/// Largest fitted-vs-actual sup gap when F is matched to an exponential
/// with the same mean; small values mean F is exponential-shaped.
double sup_distance_to_fitted_exponential(const GridCdf& f);

/// sup over the common grid of |F1 - F2|.
double sup_distance(const GridCdf& f1, const GridCdf& f2);

/// Pointwise convex combination (grids must agree).
GridCdf mix(const GridCdf& f1, const GridCdf& f2, double w1);

}  // namespace wb
