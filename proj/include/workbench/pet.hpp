#pragma once

#include "workbench/em.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace wb {

struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 1.0;
    double b = 1.0;
    double theta = 0.0;  // radians
    double intensity = 0.0;
};

/// Gridded emission density rasterized from an ellipse list.
/// Pixel (i,j) = column i, row j; physical coordinates are centered on the
/// grid with +x to the right and +y up.
struct Phantom {
    Eigen::MatrixXd grid;  // H rows x W cols, grid(j, i)
    double pixel_size = 1.0;
    std::vector<Ellipse> ellipses;

    int width() const { return static_cast<int>(grid.cols()); }
    int height() const { return static_cast<int>(grid.rows()); }

    /// Row-major flattening: source index b = j*W + i.
    Vec flatten() const;
};

enum class TubeWeighting { LineLength, StripArea };

struct DetectorGeometry {
    int n_angles = 1;  // uniform in [0, pi)
    int n_bins = 1;    // parallel bins spanning the circumscribed circle
    TubeWeighting weighting = TubeWeighting::LineLength;

    int detector_index(int angle, int bin) const { return angle * n_bins + bin; }
};

struct Sinogram {
    int n_angles = 0;
    int n_bins = 0;
    Vec counts;           // length n_angles*n_bins, detector-major
    Vec expected;         // empty unless simulated
};

/// Rasterizes by pixel-center inclusion, summing ellipse intensities and
/// clipping the result below at 0.
Phantom make_phantom(const std::vector<Ellipse>& ellipses, int width, int height,
                     double pixel_size = 1.0);

/// Parallel-beam system matrix. Line-length mode uses exact ray/pixel
/// intersection lengths (Siddon traversal); strip-area mode supersamples
/// 4x4 points per pixel and counts those inside the bin's strip.
SystemMatrix build_system_matrix(const DetectorGeometry& geom, int width, int height,
                                 double pixel_size);

Vec forward_project(const Phantom& phantom, const SystemMatrix& A);

/// Independent Poisson draws, one per detector, from substream
/// (seed, detector index) so results do not depend on evaluation order.
Vec sample_counts(const Vec& expected, std::uint64_t seed);

Sinogram simulate_sinogram(const Phantom& phantom, const SystemMatrix& A,
                           const DetectorGeometry& geom, std::uint64_t seed);

struct PetReconstruction {
    Vec intensities;  // source-major, reshape to H x W
    std::vector<double> trace;
    int iterations = 0;
};

PetReconstruction reconstruct_pet(const Sinogram& sino, const SystemMatrix& A,
                                  const EmConfig& cfg);

}  // namespace wb
