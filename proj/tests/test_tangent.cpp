#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "workbench/common.hpp"
#include "workbench/prng.hpp"
#include "workbench/tangent.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

using namespace wb;

namespace {

GlyphImage gaussian_blob(double cx, double cy, double sigma) {
    GlyphImage img;
    for (int r = 0; r < kGlyphSide; ++r) {
        for (int c = 0; c < kGlyphSide; ++c) {
            const double d2 = (c - cx) * (c - cx) + (r - cy) * (r - cy);
            img.at(r, c) = std::exp(-d2 / (2.0 * sigma * sigma));
        }
    }
    return img;
}

}  // namespace

TEST_CASE("epsilon zero is the identity for every transform") {
    const GlyphImage img = gaussian_blob(6.0, 9.0, 2.0);
    for (TransformId id : kAllTransforms) {
        const GlyphImage out = apply_transform(img, id, 0.0);
        CHECK((out.pixels - img.pixels).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("integer translation moves a one-hot pixel exactly") {
    GlyphImage img;
    img.at(5, 8) = 1.0;
    const GlyphImage out = apply_transform(img, TransformId::TranslateX, 1.0);
    CHECK(out.at(5, 9) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out.pixels.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rotation round trip on a smooth image") {
    const GlyphImage img = gaussian_blob(7.5, 7.5, 3.0);
    const GlyphImage fwd = apply_transform(img, TransformId::Rotate, 0.3);
    const GlyphImage back = apply_transform(fwd, TransformId::Rotate, -0.3);
    CHECK((back.pixels - img.pixels).cwiseAbs().maxCoeff() <= 0.08);
}

TEST_CASE("constant image yields an empty basis") {
    GlyphImage img;
    img.pixels.setConstant(0.5);
    const TangentBasis basis = build_tangent_subspace(img);
    CHECK(basis.rank() == 0);
    // k = 0 reduces tangent distance to plain L2.
    GlyphImage other;
    other.pixels.setConstant(0.25);
    CHECK(distance_to_subspace(other, basis) ==
          doctest::Approx((other.pixels - img.pixels).norm()).epsilon(1e-12));
}

TEST_CASE("centered blob keeps at least 4 directions; rank oracle agrees") {
    const GlyphImage img = gaussian_blob(7.5, 7.5, 2.0);
    const TangentBasis basis = build_tangent_subspace(img);
    CHECK(basis.rank() >= 4);
    CHECK(basis.rank() <= 7);

    // Oracle: numerical rank of the raw 7-direction matrix by SVD.
    TangentConfig cfg;
    Eigen::MatrixXd dirs(kGlyphDim, 7);
    for (int t = 0; t < 7; ++t) {
        const TransformId id = kAllTransforms[t];
        const double eps = (id == TransformId::TranslateX || id == TransformId::TranslateY)
                               ? cfg.translate_px
                               : cfg.epsilon;
        dirs.col(t) = apply_transform(img, id, eps).pixels - img.pixels;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dirs);
    const double tol = 1e-8 * svd.singularValues()[0];
    int svd_rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()[i] > tol) ++svd_rank;
    }
    CHECK(basis.rank() == svd_rank);
}

TEST_CASE("basis columns are orthonormal") {
    const GlyphImage img = gaussian_blob(6.0, 8.0, 2.5);
    const TangentBasis basis = build_tangent_subspace(img);
    REQUIRE(basis.rank() > 0);
    const Eigen::MatrixXd gram =
        basis.directions.transpose() * basis.directions;
    CHECK((gram - Eigen::MatrixXd::Identity(basis.rank(), basis.rank()))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
}

TEST_CASE("distance to subspace: trivial cases") {
    const GlyphImage img = gaussian_blob(7.0, 7.0, 2.0);
    const TangentBasis basis = build_tangent_subspace(img);
    REQUIRE(basis.rank() >= 1);
    CHECK(distance_to_subspace(img, basis) == doctest::Approx(0.0).epsilon(1e-12));

    GlyphImage on_plane;
    on_plane.pixels = basis.origin + basis.directions.col(0);
    CHECK(distance_to_subspace(on_plane, basis) <= 1e-9);
}

TEST_CASE("distance matches a dense least-squares oracle in a toy space") {
    // Random 3-direction basis in an 8-dim slice of the glyph space.
    SplitMix64Stream rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(kGlyphDim, 3);
        for (int c = 0; c < 3; ++c) {
            for (int r = 0; r < 8; ++r) raw(r, c) = 2.0 * rng.uniform01() - 1.0;
        }
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
        TangentBasis basis;
        basis.origin.setZero();
        for (int r = 0; r < 8; ++r) basis.origin[r] = rng.uniform01();
        basis.directions =
            qr.householderQ() * Eigen::MatrixXd::Identity(kGlyphDim, 3);

        GlyphImage x;
        for (int r = 0; r < 8; ++r) x.pixels[r] = rng.uniform01();

        const double dist = distance_to_subspace(x, basis);
        // Oracle: minimize ||x - origin - raw c|| over c.
        const Eigen::VectorXd resid = x.pixels - basis.origin;
        const Eigen::VectorXd coef =
            raw.colPivHouseholderQr().solve(resid);
        const double oracle = (resid - raw * coef).norm();
        CHECK(dist == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(dist <= resid.norm() + 1e-12);
    }
}

TEST_CASE("distance shrinks as basis directions are added") {
    const GlyphImage img = gaussian_blob(7.5, 7.5, 2.0);
    const TangentBasis basis = build_tangent_subspace(img);
    const GlyphImage x = gaussian_blob(9.0, 6.0, 2.5);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= basis.rank(); ++k) {
        TangentBasis truncated;
        truncated.origin = basis.origin;
        truncated.directions = basis.directions.leftCols(k);
        const double d = distance_to_subspace(x, truncated);
        CHECK(d <= prev + 1e-12);
        prev = d;
    }
}

TEST_CASE("span invariance: permuting the transform order keeps distances") {
    const GlyphImage img = gaussian_blob(8.0, 7.0, 2.2);
    const TangentBasis basis = build_tangent_subspace(img);

    // Rebuild with the direction columns reversed before orthonormalization.
    TangentConfig cfg;
    Eigen::MatrixXd dirs(kGlyphDim, 7);
    for (int t = 0; t < 7; ++t) {
        const TransformId id = kAllTransforms[6 - t];
        const double eps = (id == TransformId::TranslateX || id == TransformId::TranslateY)
                               ? cfg.translate_px
                               : cfg.epsilon;
        dirs.col(t) = apply_transform(img, id, eps).pixels - img.pixels;
    }
    Eigen::MatrixXd q(kGlyphDim, 7);
    int k = 0;
    for (int t = 0; t < 7; ++t) {
        Eigen::VectorXd v = dirs.col(t);
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < k; ++j) v -= q.col(j).dot(v) * q.col(j);
        }
        if (v.norm() >= 1e-8 * dirs.colwise().norm().maxCoeff()) {
            q.col(k++) = v / v.norm();
        }
    }
    TangentBasis permuted;
    permuted.origin = img.pixels;
    permuted.directions = q.leftCols(k);
    REQUIRE(permuted.rank() == basis.rank());

    SplitMix64Stream rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        GlyphImage x;
        for (int p = 0; p < kGlyphDim; ++p) x.pixels[p] = rng.uniform01();
        CHECK(distance_to_subspace(x, basis) ==
              doctest::Approx(distance_to_subspace(x, permuted)).epsilon(1e-9));
    }
}

TEST_CASE("classifiers: training-image hit, single class, L2 bound") {
    const LabeledCorpus corpus = gen_synthetic_glyphs(5, {5.0, 1.0, 0.1}, 3);
    const GlyphImage test = corpus.images[17];

    const Classification tc = classify_tangent(test, corpus);
    CHECK(tc.index == 17);
    CHECK(tc.label == corpus.labels[17]);
    CHECK(tc.distance <= 1e-9);

    const Classification l2 = classify_l2_baseline(test, corpus);
    CHECK(l2.index == 17);
    CHECK(l2.distance == doctest::Approx(0.0).epsilon(1e-12));

    LabeledCorpus one_class;
    one_class.images = {corpus.images[0], corpus.images[1]};
    one_class.labels = {4, 4};
    CHECK(classify_tangent(gaussian_blob(7, 7, 2), one_class).label == 4);

    // Tangent distance never exceeds the L2 distance to the same item.
    const TangentBasis basis = build_tangent_subspace(corpus.images[40]);
    for (size_t i = 0; i < corpus.size(); ++i) {
        const double td = distance_to_subspace(corpus.images[i], basis);
        const double l2d = (corpus.images[i].pixels - corpus.images[40].pixels).norm();
        CHECK(td <= l2d + 1e-12);
    }
}

TEST_CASE("naive least-squares path agrees with the fast path") {
    const LabeledCorpus corpus = gen_synthetic_glyphs(10, {8.0, 1.5, 0.15}, 5);
    const GlyphImage test = gaussian_blob(7.0, 8.0, 2.0);
    const Classification fast = classify_tangent(test, corpus);
    const Classification naive = classify_tangent_naive(test, corpus);
    CHECK(fast.index == naive.index);
    CHECK(fast.distance == doctest::Approx(naive.distance).epsilon(1e-9));
}

TEST_CASE("L2 baseline agrees with an exhaustive scan oracle") {
    const LabeledCorpus corpus = gen_synthetic_glyphs(10, {10.0, 2.0, 0.2}, 9);
    SplitMix64Stream rng(13);
    GlyphImage test;
    for (int p = 0; p < kGlyphDim; ++p) test.pixels[p] = rng.uniform01();
    const Classification got = classify_l2_baseline(test, corpus);

    int best_idx = -1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < corpus.size(); ++i) {
        const double d = (corpus.images[i].pixels - test.pixels).norm();
        if (d < best) {
            best = d;
            best_idx = static_cast<int>(i);
        }
    }
    CHECK(got.index == best_idx);
    CHECK(got.distance == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("synthetic corpus: zero jitter copies, determinism, distinct class means") {
    const LabeledCorpus plain = gen_synthetic_glyphs(3, {0.0, 0.0, 0.0}, 1);
    for (size_t i = 0; i < plain.size(); ++i) {
        const GlyphImage tmpl = digit_template(plain.labels[i]);
        CHECK((plain.images[i].pixels - tmpl.pixels).cwiseAbs().maxCoeff() == 0.0);
    }

    const LabeledCorpus a = gen_synthetic_glyphs(4, {10.0, 2.0, 0.2}, 77);
    const LabeledCorpus b = gen_synthetic_glyphs(4, {10.0, 2.0, 0.2}, 77);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK((a.images[i].pixels - b.images[i].pixels).cwiseAbs().maxCoeff() == 0.0);
    }

    // Class-conditional means stay pairwise separated at default jitter.
    const LabeledCorpus big = gen_synthetic_glyphs(50, {10.0, 2.0, 0.2}, 2024);
    std::vector<Eigen::VectorXd> means(10, Eigen::VectorXd::Zero(kGlyphDim));
    std::vector<int> counts(10, 0);
    for (size_t i = 0; i < big.size(); ++i) {
        means[static_cast<size_t>(big.labels[i])] += big.images[i].pixels;
        ++counts[static_cast<size_t>(big.labels[i])];
    }
    double min_gap = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 10; ++c) {
        means[static_cast<size_t>(c)] /= counts[static_cast<size_t>(c)];
    }
    for (int c1 = 0; c1 < 10; ++c1) {
        for (int c2 = c1 + 1; c2 < 10; ++c2) {
            min_gap = std::min(min_gap, (means[static_cast<size_t>(c1)] -
                                         means[static_cast<size_t>(c2)])
                                            .norm());
        }
    }
    CHECK(min_gap > 0.5);
}

TEST_CASE("transform name parsing") {
    CHECK(transform_from_name("thicken") == TransformId::Thicken);
    CHECK(transform_from_name("shear_y") == TransformId::ShearY);
    CHECK_THROWS_AS(transform_from_name("bogus"), UnknownTransform);
}
