#include "workbench/tangent.hpp"

#include "workbench/common.hpp"
#include "workbench/prng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace wb {

void GlyphImage::clip() {
    pixels = pixels.cwiseMax(0.0).cwiseMin(1.0);
}

namespace {

// Clamp-to-edge padding: a constant image is then fixed by every warp, so
// degenerate inputs fall back to plain L2 classification as intended.
double bilinear(const GlyphImage& img, double row, double col) {
    const int r0 = static_cast<int>(std::floor(row));
    const int c0 = static_cast<int>(std::floor(col));
    const double fr = row - r0;
    const double fc = col - c0;
    auto px = [&](int r, int c) -> double {
        r = std::clamp(r, 0, kGlyphSide - 1);
        c = std::clamp(c, 0, kGlyphSide - 1);
        return img.at(r, c);
    };
    return (1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
           fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
}

GlyphImage thicken(const GlyphImage& img, double epsilon) {
    GlyphImage out;
    for (int r = 0; r < kGlyphSide; ++r) {
        for (int c = 0; c < kGlyphSide; ++c) {
            double m = 0.0;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr >= 0 && rr < kGlyphSide && cc >= 0 && cc < kGlyphSide) {
                        m = std::max(m, img.at(rr, cc));
                    }
                }
            }
            out.at(r, c) = img.at(r, c) + epsilon * (m - img.at(r, c));
        }
    }
    out.clip();
    return out;
}

// Resamples with the inverse of the requested forward map about the image
// center; zero padding outside the frame.
template <typename InverseMap>
GlyphImage warp(const GlyphImage& img, InverseMap inv) {
    constexpr double kCenter = (kGlyphSide - 1) / 2.0;
    GlyphImage out;
    for (int r = 0; r < kGlyphSide; ++r) {
        for (int c = 0; c < kGlyphSide; ++c) {
            const double x = c - kCenter;
            const double y = r - kCenter;
            double sx = x, sy = y;
            inv(x, y, sx, sy);
            out.at(r, c) = bilinear(img, sy + kCenter, sx + kCenter);
        }
    }
    out.clip();
    return out;
}

}  // namespace

GlyphImage apply_transform(const GlyphImage& img, TransformId which, double epsilon) {
    const double limit = (which == TransformId::TranslateX || which == TransformId::TranslateY)
                             ? kGlyphSide / 2.0
                             : 1.0;
    if (!(std::abs(epsilon) <= limit)) {
        throw Error("apply_transform: epsilon out of range");
    }
    if (epsilon == 0.0) {
        return img;
    }
    switch (which) {
        case TransformId::Thicken:
            return thicken(img, epsilon);
        case TransformId::Rotate: {
            const double c = std::cos(epsilon), s = std::sin(epsilon);
            return warp(img, [&](double x, double y, double& sx, double& sy) {
                sx = c * x + s * y;
                sy = -s * x + c * y;
            });
        }
        case TransformId::TranslateX:
            return warp(img, [&](double x, double y, double& sx, double& sy) {
                sx = x - epsilon;
                sy = y;
            });
        case TransformId::TranslateY:
            return warp(img, [&](double x, double y, double& sx, double& sy) {
                sx = x;
                sy = y - epsilon;
            });
        case TransformId::Scale: {
            const double f = 1.0 + epsilon;
            return warp(img, [&](double x, double y, double& sx, double& sy) {
                sx = x / f;
                sy = y / f;
            });
        }
        case TransformId::ShearX:
            return warp(img, [&](double x, double y, double& sx, double& sy) {
                sx = x - epsilon * y;
                sy = y;
            });
        case TransformId::ShearY:
            return warp(img, [&](double x, double y, double& sx, double& sy) {
                sx = x;
                sy = y - epsilon * x;
            });
    }
    throw UnknownTransform("apply_transform: unknown transform id");
}

TransformId transform_from_name(const std::string& name) {
    if (name == "thicken") return TransformId::Thicken;
    if (name == "rotate") return TransformId::Rotate;
    if (name == "translate_x") return TransformId::TranslateX;
    if (name == "translate_y") return TransformId::TranslateY;
    if (name == "scale") return TransformId::Scale;
    if (name == "shear_x") return TransformId::ShearX;
    if (name == "shear_y") return TransformId::ShearY;
    throw UnknownTransform("unknown transform: " + name);
}

namespace {

Eigen::MatrixXd secant_directions(const GlyphImage& img, const TangentConfig& cfg) {
    Eigen::MatrixXd dirs(kGlyphDim, 7);
    for (int t = 0; t < 7; ++t) {
        const TransformId id = kAllTransforms[t];
        const double eps = (id == TransformId::TranslateX || id == TransformId::TranslateY)
                               ? cfg.translate_px
                               : cfg.epsilon;
        dirs.col(t) = apply_transform(img, id, eps).pixels - img.pixels;
    }
    return dirs;
}

}  // namespace

TangentBasis build_tangent_subspace(const GlyphImage& img, const TangentConfig& cfg) {
    if (!img.pixels.allFinite()) {
        throw DegenerateImage("build_tangent_subspace: non-finite image");
    }
    if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 0.5)) {
        throw Error("build_tangent_subspace: epsilon must be in (0, 0.5]");
    }
    const Eigen::MatrixXd dirs = secant_directions(img, cfg);
    const double max_norm = dirs.colwise().norm().maxCoeff();

    TangentBasis basis;
    basis.origin = img.pixels;
    basis.directions.resize(kGlyphDim, 0);
    if (max_norm == 0.0) {
        return basis;  // constant image: every transform fixes it
    }
    // Modified Gram-Schmidt, dropping near-degenerate directions.
    Eigen::MatrixXd q(kGlyphDim, 7);
    int k = 0;
    for (int t = 0; t < 7; ++t) {
        Eigen::VectorXd v = dirs.col(t);
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < k; ++j) {
                v -= q.col(j).dot(v) * q.col(j);
            }
        }
        const double nrm = v.norm();
        if (nrm >= cfg.drop_tol * max_norm) {
            q.col(k) = v / nrm;
            ++k;
        }
    }
    basis.directions = q.leftCols(k);
    return basis;
}

double distance_to_subspace(const GlyphImage& x, const TangentBasis& basis) {
    if (!x.pixels.allFinite()) {
        throw Error("distance_to_subspace: non-finite input");
    }
    Eigen::VectorXd r = x.pixels - basis.origin;
    if (basis.rank() > 0) {
        r -= basis.directions * (basis.directions.transpose() * r);
    }
    return r.norm();
}

Classification classify_tangent(const GlyphImage& test, const LabeledCorpus& corpus,
                                const TangentConfig& cfg) {
    if (corpus.size() == 0) {
        throw Error("classify_tangent: empty corpus");
    }
    const TangentBasis basis = build_tangent_subspace(test, cfg);
    const auto n = static_cast<Eigen::Index>(corpus.size());
    Eigen::MatrixXd x(n, kGlyphDim);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = corpus.images[static_cast<size_t>(i)].pixels.transpose();
    }
    // d_i^2 = ||x_i - o||^2 - ||Q^T (x_i - o)||^2, batched as two GEMMs.
    const Eigen::VectorXd r2 = x.rowwise().squaredNorm().array() -
                               2.0 * (x * basis.origin).array() +
                               basis.origin.squaredNorm();
    Eigen::VectorXd d2 = r2;
    if (basis.rank() > 0) {
        const Eigen::MatrixXd p = x * basis.directions;  // n x k
        const Eigen::VectorXd q = basis.directions.transpose() * basis.origin;
        d2.array() -= p.rowwise().squaredNorm().array() - 2.0 * (p * q).array() +
                      q.squaredNorm();
    }
    // The batched squared distances carry cancellation noise, so re-evaluate
    // every near-minimal candidate with the exact residual before deciding.
    const double d2_min = d2.minCoeff();
    const double d_min = std::sqrt(std::max(0.0, d2_min));
    const double cutoff = (d_min + 1e-6) * (d_min + 1e-6);
    Classification best;
    best.distance = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (d2[i] > cutoff) continue;
        const double d = distance_to_subspace(corpus.images[static_cast<size_t>(i)], basis);
        if (d < best.distance) {
            best.distance = d;
            best.index = static_cast<int>(i);
            best.label = corpus.labels[static_cast<size_t>(i)];
        }
    }
    return best;
}

Classification classify_tangent_naive(const GlyphImage& test, const LabeledCorpus& corpus,
                                      const TangentConfig& cfg) {
    if (corpus.size() == 0) {
        throw Error("classify_tangent_naive: empty corpus");
    }
    const Eigen::MatrixXd dirs = secant_directions(test, cfg);
    Classification best;
    best.distance = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < corpus.size(); ++i) {
        // Full least-squares solve per training point; this is the slow
        // path the precomputed basis replaces.
        const Eigen::VectorXd r = corpus.images[i].pixels - test.pixels;
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dirs);
        const Eigen::VectorXd coeffs = qr.solve(r);
        const double d = (r - dirs * coeffs).norm();
        if (d < best.distance) {
            best.distance = d;
            best.index = static_cast<int>(i);
            best.label = corpus.labels[i];
        }
    }
    return best;
}

Classification classify_l2_baseline(const GlyphImage& test, const LabeledCorpus& corpus) {
    if (corpus.size() == 0) {
        throw Error("classify_l2_baseline: empty corpus");
    }
    Classification best;
    best.distance = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < corpus.size(); ++i) {
        const double d = (corpus.images[i].pixels - test.pixels).norm();
        if (d < best.distance) {
            best.distance = d;
            best.index = static_cast<int>(i);
            best.label = corpus.labels[i];
        }
    }
    return best;
}

namespace {

// 7-segment style stroke templates; '#' is full ink.
// clang-format off
const char* const kDigitRows[10][16] = {
    {  // 0
        "................",
        "................",
        "....########....",
        "....########....",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "....########....",
        "....########....",
        "................",
        "................",
    },
    {  // 1
        "................",
        "................",
        "......###.......",
        ".....####.......",
        "....##.##.......",
        ".......##.......",
        ".......##.......",
        ".......##.......",
        ".......##.......",
        ".......##.......",
        ".......##.......",
        ".......##.......",
        "....########....",
        "....########....",
        "................",
        "................",
    },
    {  // 2
        "................",
        "................",
        "....########....",
        "....########....",
        "...........##...",
        "...........##...",
        "...........##...",
        "....########....",
        "....########....",
        "...##...........",
        "...##...........",
        "...##...........",
        "...##########...",
        "...##########...",
        "................",
        "................",
    },
    {  // 3
        "................",
        "................",
        "....########....",
        "....########....",
        "...........##...",
        "...........##...",
        "...........##...",
        "....########....",
        "....########....",
        "...........##...",
        "...........##...",
        "...........##...",
        "....########....",
        "....########....",
        "................",
        "................",
    },
    {  // 4
        "................",
        "................",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "...##########...",
        "...##########...",
        "...........##...",
        "...........##...",
        "...........##...",
        "...........##...",
        "...........##...",
        "................",
        "................",
    },
    {  // 5
        "................",
        "................",
        "...##########...",
        "...##########...",
        "...##...........",
        "...##...........",
        "...##...........",
        "....########....",
        "....########....",
        "...........##...",
        "...........##...",
        "...........##...",
        "....########....",
        "....########....",
        "................",
        "................",
    },
    {  // 6
        "................",
        "................",
        "....########....",
        "....########....",
        "...##...........",
        "...##...........",
        "...##...........",
        "...#########....",
        "...#########....",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "....########....",
        "....########....",
        "................",
        "................",
    },
    {  // 7
        "................",
        "................",
        "...##########...",
        "...##########...",
        "...........##...",
        "..........##....",
        "..........##....",
        ".........##.....",
        ".........##.....",
        "........##......",
        "........##......",
        ".......##.......",
        ".......##.......",
        "......##........",
        "................",
        "................",
    },
    {  // 8
        "................",
        "................",
        "....########....",
        "....########....",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "....########....",
        "....########....",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "....########....",
        "....########....",
        "................",
        "................",
    },
    {  // 9
        "................",
        "................",
        "....########....",
        "....########....",
        "...##......##...",
        "...##......##...",
        "...##......##...",
        "....#########...",
        "....#########...",
        "...........##...",
        "...........##...",
        "...........##...",
        "....########....",
        "....########....",
        "................",
        "................",
    },
};
// clang-format on

}  // namespace

GlyphImage digit_template(int digit) {
    if (digit < 0 || digit > 9) {
        throw Error("digit_template: digit must be 0..9");
    }
    GlyphImage img;
    for (int r = 0; r < kGlyphSide; ++r) {
        for (int c = 0; c < kGlyphSide; ++c) {
            img.at(r, c) = kDigitRows[digit][r][c] == '#' ? 1.0 : 0.0;
        }
    }
    return img;
}

LabeledCorpus gen_synthetic_glyphs(int n_per_class, const JitterSpec& jitter,
                                   std::uint64_t seed) {
    if (n_per_class < 1) {
        throw Error("gen_synthetic_glyphs: n_per_class must be >= 1");
    }
    LabeledCorpus corpus;
    corpus.images.reserve(static_cast<size_t>(n_per_class) * 10);
    corpus.labels.reserve(static_cast<size_t>(n_per_class) * 10);
    for (int digit = 0; digit < 10; ++digit) {
        const GlyphImage base = digit_template(digit);
        for (int i = 0; i < n_per_class; ++i) {
            SplitMix64Stream rng(seed, static_cast<std::uint64_t>(digit) * 1000003ULL +
                                           static_cast<std::uint64_t>(i));
            auto uniform_pm = [&](double half_range) {
                return half_range == 0.0 ? 0.0 : (2.0 * rng.uniform01() - 1.0) * half_range;
            };
            GlyphImage g = base;
            const double rot = uniform_pm(jitter.rotation_deg) * M_PI / 180.0;
            g = apply_transform(g, TransformId::Rotate, rot);
            g = apply_transform(g, TransformId::TranslateX, uniform_pm(jitter.shift_px));
            g = apply_transform(g, TransformId::TranslateY, uniform_pm(jitter.shift_px));
            const double th = jitter.thicken == 0.0 ? 0.0 : rng.uniform01() * jitter.thicken;
            g = apply_transform(g, TransformId::Thicken, th);
            corpus.images.push_back(std::move(g));
            corpus.labels.push_back(digit);
        }
    }
    return corpus;
}

}  // namespace wb
