#include "workbench/pet.hpp"

#include "workbench/common.hpp"
#include "workbench/prng.hpp"

#include <algorithm>
#include <cmath>

namespace wb {

Vec Phantom::flatten() const {
    Vec v(grid.size());
    for (int j = 0; j < height(); ++j) {
        for (int i = 0; i < width(); ++i) {
            v[j * width() + i] = grid(j, i);
        }
    }
    return v;
}

Phantom make_phantom(const std::vector<Ellipse>& ellipses, int width, int height,
                     double pixel_size) {
    if (width < 1 || height < 1) {
        throw EmptyGrid("make_phantom: grid must be at least 1x1");
    }
    Phantom p;
    p.pixel_size = pixel_size;
    p.ellipses = ellipses;
    p.grid = Eigen::MatrixXd::Zero(height, width);
    for (int j = 0; j < height; ++j) {
        const double y = (j - (height - 1) / 2.0) * pixel_size;
        for (int i = 0; i < width; ++i) {
            const double x = (i - (width - 1) / 2.0) * pixel_size;
            double v = 0.0;
            for (const auto& e : ellipses) {
                const double dx = x - e.cx;
                const double dy = y - e.cy;
                const double c = std::cos(e.theta);
                const double s = std::sin(e.theta);
                const double u = (dx * c + dy * s) / e.a;
                const double w = (-dx * s + dy * c) / e.b;
                if (u * u + w * w <= 1.0) {
                    v += e.intensity;
                }
            }
            p.grid(j, i) = std::max(0.0, v);
        }
    }
    return p;
}

namespace {

struct GridBox {
    double x0, y0;  // lower-left corner
    double h;       // pixel size
    int w, hgt;
};

// Siddon-style traversal: appends (pixel, length) for the chord of the ray
// p(u) = origin + u*dir (|dir| = 1) through each pixel it crosses.
void trace_ray(const GridBox& g, double ox, double oy, double dx, double dy,
               std::vector<std::pair<int, double>>& out) {
    const double x1 = g.x0 + g.w * g.h;
    const double y1 = g.y0 + g.hgt * g.h;
    double umin = -1e300, umax = 1e300;
    const double eps = 1e-12;
    if (std::abs(dx) < eps) {
        if (ox <= g.x0 || ox >= x1) return;
    } else {
        const double a = (g.x0 - ox) / dx;
        const double b = (x1 - ox) / dx;
        umin = std::max(umin, std::min(a, b));
        umax = std::min(umax, std::max(a, b));
    }
    if (std::abs(dy) < eps) {
        if (oy <= g.y0 || oy >= y1) return;
    } else {
        const double a = (g.y0 - oy) / dy;
        const double b = (y1 - oy) / dy;
        umin = std::max(umin, std::min(a, b));
        umax = std::min(umax, std::max(a, b));
    }
    if (umax <= umin) return;

    double u = umin;
    // Cell of the segment midpoint; robust at corner crossings.
    auto cell_of = [&](double uu) {
        const double px = ox + uu * dx;
        const double py = oy + uu * dy;
        int i = static_cast<int>(std::floor((px - g.x0) / g.h));
        int j = static_cast<int>(std::floor((py - g.y0) / g.h));
        i = std::clamp(i, 0, g.w - 1);
        j = std::clamp(j, 0, g.hgt - 1);
        return std::pair<int, int>(i, j);
    };
    while (u < umax - eps) {
        // Next crossing of a pixel boundary after u.
        double unext = umax;
        if (std::abs(dx) >= eps) {
            const double px = ox + u * dx;
            const double fi = (px - g.x0) / g.h;
            const double target = dx > 0 ? std::floor(fi + 1e-9) + 1 : std::ceil(fi - 1e-9) - 1;
            const double ux = (g.x0 + target * g.h - ox) / dx;
            if (ux > u + eps) unext = std::min(unext, ux);
        }
        if (std::abs(dy) >= eps) {
            const double py = oy + u * dy;
            const double fj = (py - g.y0) / g.h;
            const double target = dy > 0 ? std::floor(fj + 1e-9) + 1 : std::ceil(fj - 1e-9) - 1;
            const double uy = (g.y0 + target * g.h - oy) / dy;
            if (uy > u + eps) unext = std::min(unext, uy);
        }
        if (unext <= u + eps) break;
        unext = std::min(unext, umax);
        const auto [ci, cj] = cell_of(0.5 * (u + unext));
        out.emplace_back(cj * g.w + ci, unext - u);
        u = unext;
    }
}

}  // namespace

SystemMatrix build_system_matrix(const DetectorGeometry& geom, int width, int height,
                                 double pixel_size) {
    if (geom.n_angles < 1 || geom.n_bins < 1 || width < 1 || height < 1 ||
        !(pixel_size > 0.0)) {
        throw Error("build_system_matrix: invalid geometry");
    }
    const double h = pixel_size;
    const GridBox box{-width * h / 2.0, -height * h / 2.0, h, width, height};
    const double radius = h * std::sqrt(double(width) * width + double(height) * height) / 2.0;
    const double bin_width = 2.0 * radius / geom.n_bins;

    std::vector<SystemMatrix::Entry> entries;
    std::vector<std::pair<int, double>> chord;
    for (int a = 0; a < geom.n_angles; ++a) {
        const double theta = M_PI * a / geom.n_angles;
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        if (geom.weighting == TubeWeighting::LineLength) {
            for (int t = 0; t < geom.n_bins; ++t) {
                const double s = -radius + (t + 0.5) * bin_width;
                chord.clear();
                // Ray along (ct, st) offset s along the perpendicular (-st, ct).
                trace_ray(box, -s * st, s * ct, ct, st, chord);
                const int d = geom.detector_index(a, t);
                for (const auto& [b, len] : chord) {
                    entries.push_back({b, d, len});
                }
            }
        } else {
            // 4x4 supersampled points per pixel; each point lands in exactly
            // one strip, weight is the covered pixel area over the bin width.
            std::vector<int> hits(static_cast<size_t>(geom.n_bins));
            for (int j = 0; j < height; ++j) {
                for (int i = 0; i < width; ++i) {
                    std::fill(hits.begin(), hits.end(), 0);
                    for (int sj = 0; sj < 4; ++sj) {
                        for (int si = 0; si < 4; ++si) {
                            const double x = box.x0 + (i + (si + 0.5) / 4.0) * h;
                            const double y = box.y0 + (j + (sj + 0.5) / 4.0) * h;
                            const double sp = -x * st + y * ct;
                            const int t = static_cast<int>(std::floor((sp + radius) / bin_width));
                            if (t >= 0 && t < geom.n_bins) ++hits[t];
                        }
                    }
                    for (int t = 0; t < geom.n_bins; ++t) {
                        if (hits[t] > 0) {
                            const double w = hits[t] / 16.0 * h * h / bin_width;
                            entries.push_back({j * width + i, geom.detector_index(a, t), w});
                        }
                    }
                }
            }
        }
    }

    std::vector<double> per_source(static_cast<size_t>(width) * height, 0.0);
    for (const auto& e : entries) per_source[e.source] += e.weight;
    for (size_t b = 0; b < per_source.size(); ++b) {
        if (!(per_source[b] > 0.0)) {
            throw PixelOutsideFOV("build_system_matrix: pixel " + std::to_string(b) +
                                  " is missed by every tube");
        }
    }
    return SystemMatrix(width * height, geom.n_angles * geom.n_bins, entries);
}

Vec forward_project(const Phantom& phantom, const SystemMatrix& A) {
    return A.forward(phantom.flatten());
}

Vec sample_counts(const Vec& expected, std::uint64_t seed) {
    Vec counts(expected.size());
    for (Eigen::Index d = 0; d < expected.size(); ++d) {
        if (!std::isfinite(expected[d]) || expected[d] < 0.0) {
            throw NegativeMean("sample_counts: means must be finite and >= 0");
        }
        SplitMix64Stream rng(seed, static_cast<std::uint64_t>(d));
        counts[d] = static_cast<double>(rng.poisson(expected[d]));
    }
    return counts;
}

Sinogram simulate_sinogram(const Phantom& phantom, const SystemMatrix& A,
                           const DetectorGeometry& geom, std::uint64_t seed) {
    Sinogram sino;
    sino.n_angles = geom.n_angles;
    sino.n_bins = geom.n_bins;
    sino.expected = forward_project(phantom, A);
    sino.counts = sample_counts(sino.expected, seed);
    return sino;
}

PetReconstruction reconstruct_pet(const Sinogram& sino, const SystemMatrix& A,
                                  const EmConfig& cfg) {
    if (sino.counts.size() != A.n_detectors()) {
        throw DimensionMismatch("reconstruct_pet: sinogram does not match system matrix");
    }
    EmResult r = run_em(A, sino.counts, cfg);
    return PetReconstruction{std::move(r.rates), std::move(r.trace), r.iterations};
}

}  // namespace wb
