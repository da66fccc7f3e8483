#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace wb {

inline constexpr int kGlyphSide = 16;
inline constexpr int kGlyphDim = kGlyphSide * kGlyphSide;

/// 16x16 real-valued character image, row-major, values clipped to [0,1].
struct GlyphImage {
    Eigen::Matrix<double, kGlyphDim, 1> pixels = Eigen::Matrix<double, kGlyphDim, 1>::Zero();

    double& at(int row, int col) { return pixels[row * kGlyphSide + col]; }
    double at(int row, int col) const { return pixels[row * kGlyphSide + col]; }

    void clip();
};

enum class TransformId {
    Thicken,
    Rotate,
    TranslateX,
    TranslateY,
    Scale,
    ShearX,
    ShearY,
};

inline constexpr TransformId kAllTransforms[7] = {
    TransformId::Thicken,   TransformId::Rotate, TransformId::TranslateX,
    TransformId::TranslateY, TransformId::Scale,  TransformId::ShearX,
    TransformId::ShearY,
};

/// Small deformation of a glyph. Thicken blends in a 3x3 grayscale
/// dilation; geometric transforms resample bilinearly about the image
/// center with clamp-to-edge padding. Output is clipped to [0,1];
/// epsilon = 0 returns the input exactly. Translation epsilon is in
/// pixels, the rest are unitless.
GlyphImage apply_transform(const GlyphImage& img, TransformId which, double epsilon);

TransformId transform_from_name(const std::string& name);

/// Affine tangent subspace attached to a test image: origin plus an
/// orthonormal basis of the secant directions t_i(img) - img.
struct TangentBasis {
    Eigen::Matrix<double, kGlyphDim, 1> origin;
    Eigen::MatrixXd directions;  // kGlyphDim x k, orthonormal columns
    int rank() const { return static_cast<int>(directions.cols()); }
};

struct TangentConfig {
    double epsilon = 0.1;        // unitless transforms
    double translate_px = 1.0;   // translation step in pixels
    double drop_tol = 1e-8;      // relative norm below which a direction is dropped
};

/// Gram-Schmidt orthonormalization of the 7 secant directions; directions
/// that are (numerically) in the span of earlier ones are dropped, so a
/// constant image yields rank 0 and classification degrades to plain L2.
TangentBasis build_tangent_subspace(const GlyphImage& img, const TangentConfig& cfg = {});

/// Length of the perpendicular from x onto the affine subspace.
double distance_to_subspace(const GlyphImage& x, const TangentBasis& basis);

struct LabeledCorpus {
    std::vector<GlyphImage> images;
    std::vector<int> labels;  // 0..9

    size_t size() const { return images.size(); }
};

struct Classification {
    int label = -1;
    double distance = 0.0;
    int index = -1;
};

/// Builds the test image's basis once and takes the training point with the
/// shortest perpendicular; ties go to the lowest corpus index.
Classification classify_tangent(const GlyphImage& test, const LabeledCorpus& corpus,
                                const TangentConfig& cfg = {});

/// Same as classify_tangent but solves an unorthogonalized least-squares
/// problem per training item. Kept as the slow comparator the fast path is
/// benchmarked against; answers agree to 1e-9.
Classification classify_tangent_naive(const GlyphImage& test, const LabeledCorpus& corpus,
                                      const TangentConfig& cfg = {});

/// Plain nearest neighbor under Euclidean distance.
Classification classify_l2_baseline(const GlyphImage& test, const LabeledCorpus& corpus);

struct JitterSpec {
    double rotation_deg = 10.0;
    double shift_px = 2.0;
    double thicken = 0.2;
};

/// Renders digits 0-9 from fixed stroke templates and jitters each copy
/// with per-item substreams; deterministic given the seed.
LabeledCorpus gen_synthetic_glyphs(int n_per_class, const JitterSpec& jitter,
                                   std::uint64_t seed);

/// The clean 16x16 template for one digit.
GlyphImage digit_template(int digit);

}  // namespace wb
