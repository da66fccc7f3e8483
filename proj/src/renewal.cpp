#include "workbench/renewal.hpp"

#include "workbench/common.hpp"
#include "workbench/prng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wb {

GridCdf::GridCdf(double x_max, Eigen::VectorXd values, double tail_rate)
    : x_max_(x_max), values_(std::move(values)), tail_rate_(tail_rate) {
    if (!(x_max_ > 0.0) || values_.size() < 2) {
        throw Error("GridCdf: need x_max > 0 and at least 2 grid values");
    }
    if (!(tail_rate_ >= 0.0)) {
        throw Error("GridCdf: tail_rate must be >= 0");
    }
    if (std::abs(values_[0]) > 1e-12) {
        throw Error("GridCdf: F(0) must be 0");
    }
    values_[0] = 0.0;
    double prev = 0.0;
    for (Eigen::Index i = 1; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < prev - 1e-12 ||
            values_[i] > 1.0 + 1e-12) {
            throw Error("GridCdf: values must be nondecreasing in [0, 1]");
        }
        values_[i] = std::min(1.0, std::max(prev, values_[i]));
        prev = values_[i];
    }
}

double GridCdf::at(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= x_max_) {
        const double s = 1.0 - values_[values_.size() - 1];
        if (s <= 0.0) return 1.0;
        return 1.0 - s * std::exp(-tail_rate_ * (x - x_max_));
    }
    const double fi = x / dx();
    const auto i = static_cast<Eigen::Index>(std::floor(fi));
    const double f = fi - static_cast<double>(i);
    return values_[i] * (1.0 - f) + values_[i + 1] * f;
}

double GridCdf::mean() const {
    const double h = dx();
    double m = 0.0;
    for (Eigen::Index i = 0; i + 1 < values_.size(); ++i) {
        m += 0.5 * ((1.0 - values_[i]) + (1.0 - values_[i + 1])) * h;
    }
    const double tail_mass = 1.0 - values_[values_.size() - 1];
    if (tail_mass > 0.0) {
        if (tail_rate_ <= 0.0) {
            throw InfiniteMean("GridCdf::mean: positive tail mass with zero tail rate");
        }
        m += tail_mass / tail_rate_;
    }
    if (!(m > 0.0) || !std::isfinite(m)) {
        throw Error("GridCdf::mean: mean must be finite and > 0");
    }
    return m;
}

double GridCdf::quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) {
        throw Error("GridCdf::quantile: u must be in [0, 1)");
    }
    const double f_end = values_[values_.size() - 1];
    if (u > f_end) {
        const double s = 1.0 - f_end;
        if (tail_rate_ <= 0.0) {
            throw InfiniteMean("GridCdf::quantile: quantile in an unextrapolated tail");
        }
        return x_max_ + std::log(s / (1.0 - u)) / tail_rate_;
    }
    // First grid index with F >= u.
    Eigen::Index lo = 0, hi = values_.size() - 1;
    while (lo < hi) {
        const Eigen::Index mid = (lo + hi) / 2;
        if (values_[mid] < u) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo == 0) return 0.0;
    const double f0 = values_[lo - 1];
    const double f1 = values_[lo];
    const double frac = f1 > f0 ? (u - f0) / (f1 - f0) : 1.0;
    return (static_cast<double>(lo - 1) + frac) * dx();
}

GridCdf GridCdf::exponential(double rate, double x_max, int n) {
    Eigen::VectorXd v(n + 1);
    const double h = x_max / n;
    for (int i = 0; i <= n; ++i) v[i] = 1.0 - std::exp(-rate * i * h);
    return GridCdf(x_max, std::move(v), rate);
}

GridCdf GridCdf::uniform01(double x_max, int n) {
    Eigen::VectorXd v(n + 1);
    const double h = x_max / n;
    for (int i = 0; i <= n; ++i) v[i] = std::min(1.0, i * h);
    return GridCdf(x_max, std::move(v), 1.0);
}

GridCdf GridCdf::ramp(double a, double width, double x_max, int n) {
    Eigen::VectorXd v(n + 1);
    const double h = x_max / n;
    for (int i = 0; i <= n; ++i) {
        const double x = i * h;
        v[i] = std::clamp((x - a + width / 2.0) / width, 0.0, 1.0);
    }
    return GridCdf(x_max, std::move(v), 1.0);
}

GridCdf GridCdf::weibull(double shape, double scale, double x_max, int n) {
    Eigen::VectorXd v(n + 1);
    const double h = x_max / n;
    for (int i = 0; i <= n; ++i) {
        const double x = i * h;
        v[i] = 1.0 - std::exp(-std::pow(x / scale, shape));
    }
    // Hazard at x_max as the tail rate.
    const double rate = shape * std::pow(x_max / scale, shape - 1.0) / scale;
    return GridCdf(x_max, std::move(v), rate);
}

GridCdf GridCdf::lognormal(double mu, double sigma, double x_max, int n) {
    Eigen::VectorXd v(n + 1);
    const double h = x_max / n;
    v[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double x = i * h;
        v[i] = 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0)));
    }
    // Tail rate from the survival slope over the last decade of the grid.
    const double s1 = 1.0 - v[n];
    const double s0 = 1.0 - v[n - n / 10];
    double rate = 1.0;
    if (s1 > 0.0 && s0 > s1) {
        rate = std::log(s0 / s1) / (h * (n / 10));
    }
    return GridCdf(x_max, std::move(v), rate);
}

GridCdf residual_cdf(const GridCdf& f) {
    const double mu = f.mean();
    const int n = f.n();
    const double h = f.dx();
    const auto& v = f.values();
    Eigen::VectorXd g(n + 1);
    g[0] = 0.0;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += 0.5 * ((1.0 - v[i]) + (1.0 - v[i + 1])) * h;
        g[i + 1] = std::min(1.0, acc / mu);
    }
    // The exponential tail of F carries over exactly: the integrated
    // survival beyond x_max decays at the same rate.
    return GridCdf(f.x_max(), std::move(g), f.tail_rate());
}

GridCdf length_biased_cdf(const GridCdf& f) {
    const int n = f.n();
    const double h = f.dx();
    const auto& v = f.values();
    Eigen::VectorXd partial(n + 1);
    partial[0] = 0.0;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t_mid = (i + 0.5) * h;
        acc += t_mid * (v[i + 1] - v[i]);
        partial[i + 1] = acc;
    }
    const double tail_mass = 1.0 - v[n];
    double total = acc;
    if (tail_mass > 0.0) {
        if (f.tail_rate() <= 0.0) {
            throw InfiniteMean("length_biased_cdf: positive tail mass with zero tail rate");
        }
        total += tail_mass * (f.x_max() + 1.0 / f.tail_rate());
    }
    if (!(total > 0.0)) {
        throw Error("length_biased_cdf: degenerate distribution at 0");
    }
    Eigen::VectorXd g = partial / total;
    for (int i = 0; i <= n; ++i) g[i] = std::min(1.0, g[i]);
    return GridCdf(f.x_max(), std::move(g), f.tail_rate());
}

double scaling_defect(const GridCdf& f, double q) {
    if (!(q > 0.0)) {
        throw QOutOfRange("scaling_defect: q must be > 0");
    }
    const GridCdf g = residual_cdf(f);
    const int n = f.n();
    const double h = f.dx();
    double defect = 0.0;
    for (int i = 0; i <= n; ++i) {
        defect = std::max(defect, std::abs(g.values()[i] - f.at(q * i * h)));
    }
    return defect;
}

std::pair<GridCdf, ScalingReport> solve_cq(double q, const GridCdf& init,
                                           const SolveCqConfig& cfg) {
    if (!(q > 0.0) || q > 1.0) {
        throw QOutOfRange("solve_cq: construction requires 0 < q <= 1");
    }
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
        throw Error("solve_cq: damping must be in (0, 1]");
    }
    const int n = init.n();
    const double h = init.dx();

    auto refit_tail = [&](const Eigen::VectorXd& v, double fallback) {
        const double s1 = 1.0 - v[n];
        const double s0 = 1.0 - v[n - n / 10];
        if (s1 > 0.0 && s0 > s1) {
            return std::log(s0 / s1) / (h * (n / 10));
        }
        return fallback;
    };
    // The functional equation is scale-invariant (F(cx) satisfies it
    // whenever F does), so iterates are pinned to mean 1; otherwise
    // different starts drift to differently scaled members of the class.
    auto normalize_mean = [&](const GridCdf& c) {
        const double mu = c.mean();
        Eigen::VectorXd v(n + 1);
        v[0] = 0.0;
        for (int i = 1; i <= n; ++i) v[i] = c.at(mu * i * h);
        for (int i = 1; i <= n; ++i) v[i] = std::max(v[i], v[i - 1]);
        return GridCdf(c.x_max(), std::move(v), c.tail_rate() * mu);
    };

    GridCdf f = normalize_mean(init);
    ScalingReport report;
    report.q = q;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const GridCdf g = residual_cdf(f);
        Eigen::VectorXd next(n + 1);
        next[0] = 0.0;
        for (int i = 1; i <= n; ++i) {
            const double t = (1.0 - cfg.damping) * f.values()[i] +
                             cfg.damping * g.at(i * h / q);
            next[i] = std::clamp(t, 0.0, 1.0);
        }
        // Keep the iterate a valid cdf: monotone by running max.
        for (int i = 1; i <= n; ++i) next[i] = std::max(next[i], next[i - 1]);
        const GridCdf candidate(f.x_max(), next, refit_tail(next, f.tail_rate()));
        const GridCdf rescaled = normalize_mean(candidate);
        const double change = (rescaled.values() - f.values()).cwiseAbs().maxCoeff();
        f = rescaled;
        report.iterations = it + 1;
        if (change < cfg.change_tol) {
            report.defect = scaling_defect(f, q);
            report.converged = report.defect <= cfg.defect_tol;
            return {f, report};
        }
    }
    report.defect = scaling_defect(f, q);
    report.converged = false;
    return {f, report};
}

BiasSimResult bias_sim(const GridCdf& f, long n, BiasMode mode, std::uint64_t seed) {
    if (n < 1) {
        throw Error("bias_sim: n must be >= 1");
    }
    const GridCdf sampler = mode == BiasMode::Plain ? f : length_biased_cdf(f);
    SplitMix64Stream rng(seed, mode == BiasMode::Plain ? 0 : 1);
    BiasSimResult result;
    result.count = n;
    result.histogram.assign(10, 0);
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
        const double x = sampler.quantile(rng.uniform01());
        sum += x;
        const int bin = std::min(9, static_cast<int>(std::floor(10.0 * x / f.x_max())));
        ++result.histogram[static_cast<size_t>(std::max(0, bin))];
    }
    result.mean = sum / static_cast<double>(n);
    return result;
}

double sup_distance_to_fitted_exponential(const GridCdf& f) {
    const double rate = 1.0 / f.mean();
    double d = 0.0;
    const double h = f.dx();
    for (int i = 0; i <= f.n(); ++i) {
        d = std::max(d, std::abs(f.values()[i] - (1.0 - std::exp(-rate * i * h))));
    }
    return d;
}

double sup_distance(const GridCdf& f1, const GridCdf& f2) {
    if (f1.n() != f2.n() || f1.x_max() != f2.x_max()) {
        throw DimensionMismatch("sup_distance: grids must agree");
    }
    return (f1.values() - f2.values()).cwiseAbs().maxCoeff();
}

GridCdf mix(const GridCdf& f1, const GridCdf& f2, double w1) {
    if (f1.n() != f2.n() || f1.x_max() != f2.x_max()) {
        throw DimensionMismatch("mix: grids must agree");
    }
    if (!(w1 >= 0.0 && w1 <= 1.0)) {
        throw Error("mix: weight must be in [0, 1]");
    }
    Eigen::VectorXd v = w1 * f1.values() + (1.0 - w1) * f2.values();
    // The slower tail dominates the mixture's tail decay.
    return GridCdf(f1.x_max(), std::move(v), std::min(f1.tail_rate(), f2.tail_rate()));
}

}  // namespace wb
