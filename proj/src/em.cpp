#include "workbench/em.hpp"

#include "workbench/common.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace wb {

SystemMatrix::SystemMatrix(int n_sources, int n_detectors,
                           const std::vector<Entry>& entries) {
    if (n_sources < 1 || n_detectors < 1) {
        throw DimensionMismatch("SystemMatrix: need at least one source and detector");
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(entries.size());
    for (const auto& e : entries) {
        if (e.source < 0 || e.source >= n_sources || e.detector < 0 ||
            e.detector >= n_detectors) {
            throw DimensionMismatch("SystemMatrix: entry index out of range");
        }
        if (!std::isfinite(e.weight) || e.weight < 0.0) {
            throw Error("SystemMatrix: weights must be finite and >= 0");
        }
        if (e.weight > 0.0) {
            trips.emplace_back(e.detector, e.source, e.weight);
        }
    }
    mat_.resize(n_detectors, n_sources);
    mat_.setFromTriplets(trips.begin(), trips.end());
    mat_.makeCompressed();
    col_sums_ = Vec::Zero(n_sources);
    for (int b = 0; b < n_sources; ++b) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, b); it; ++it) {
            col_sums_[b] += it.value();
        }
    }
    for (int b = 0; b < n_sources; ++b) {
        if (!(col_sums_[b] > 0.0)) {
            throw Error("SystemMatrix: source " + std::to_string(b) +
                        " is invisible to every detector");
        }
    }
}

Vec SystemMatrix::forward(const Vec& x) const {
    if (x.size() != mat_.cols()) {
        throw DimensionMismatch("forward: vector length != n_sources");
    }
    return mat_ * x;
}

Vec SystemMatrix::back(const Vec& y) const {
    if (y.size() != mat_.rows()) {
        throw DimensionMismatch("back: vector length != n_detectors");
    }
    return mat_.transpose() * y;
}

void SystemMatrix::write(std::ostream& os) const {
    os << n_sources() << ' ' << n_detectors() << ' ' << mat_.nonZeros() << '\n';
    for (int b = 0; b < n_sources(); ++b) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, b); it; ++it) {
            os << b << ' ' << it.row() << ' ';
            os.precision(17);
            os << it.value() << '\n';
        }
    }
}

SystemMatrix SystemMatrix::read(std::istream& is) {
    int n_sources = 0, n_detectors = 0;
    long nnz = 0;
    if (!(is >> n_sources >> n_detectors >> nnz)) {
        throw MalformedFile("SystemMatrix: bad header line");
    }
    std::vector<Entry> entries;
    entries.reserve(static_cast<size_t>(nnz));
    for (long i = 0; i < nnz; ++i) {
        Entry e;
        if (!(is >> e.source >> e.detector >> e.weight)) {
            throw MalformedFile("SystemMatrix: truncated at entry " + std::to_string(i));
        }
        entries.push_back(e);
    }
    return SystemMatrix(n_sources, n_detectors, entries);
}

void validate_counts(const Vec& counts) {
    for (Eigen::Index d = 0; d < counts.size(); ++d) {
        const double v = counts[d];
        if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
            throw Error("counts must be nonnegative integers");
        }
    }
}

Vec em_step(const Vec& lambda, const SystemMatrix& A, const Vec& counts) {
    if (lambda.size() != A.n_sources() || counts.size() != A.n_detectors()) {
        throw DimensionMismatch("em_step: dimension mismatch");
    }
    const Vec m = A.forward(lambda);
    Vec ratio = Vec::Zero(m.size());
    for (Eigen::Index d = 0; d < m.size(); ++d) {
        if (counts[d] > 0.0) {
            if (m[d] <= 0.0) {
                throw ZeroForwardProjection(
                    "em_step: detector " + std::to_string(d) +
                    " has counts but zero forward projection");
            }
            ratio[d] = counts[d] / m[d];
        }
    }
    const Vec backproj = A.back(ratio);
    return lambda.cwiseProduct(backproj).cwiseQuotient(A.col_sums());
}

double log_likelihood(const Vec& lambda, const SystemMatrix& A, const Vec& counts) {
    if (lambda.size() != A.n_sources() || counts.size() != A.n_detectors()) {
        throw DimensionMismatch("log_likelihood: dimension mismatch");
    }
    const Vec m = A.forward(lambda);
    double ll = 0.0;
    for (Eigen::Index d = 0; d < m.size(); ++d) {
        if (counts[d] > 0.0) {
            if (m[d] <= 0.0) {
                return -std::numeric_limits<double>::infinity();
            }
            ll += counts[d] * std::log(m[d]);
        }
        ll -= m[d];
    }
    return ll;
}

double kl_divergence(const Vec& counts, const Vec& expected) {
    if (counts.size() != expected.size()) {
        throw DimensionMismatch("kl_divergence: dimension mismatch");
    }
    double kl = 0.0;
    for (Eigen::Index d = 0; d < counts.size(); ++d) {
        const double n = counts[d];
        const double m = expected[d];
        if (n > 0.0) {
            if (m <= 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            kl += n * std::log(n / m) - n + m;
        } else {
            kl += m;
        }
    }
    return kl;
}

EmResult run_em(const SystemMatrix& A, const Vec& counts, const EmConfig& cfg) {
    if (cfg.max_iters < 1 || cfg.rel_ll_tol < 0.0) {
        throw Error("run_em: invalid config");
    }
    if (counts.size() != A.n_detectors()) {
        throw DimensionMismatch("run_em: counts length != n_detectors");
    }
    Vec lambda;
    if (cfg.init) {
        if (cfg.init->size() != A.n_sources()) {
            throw DimensionMismatch("run_em: init length != n_sources");
        }
        lambda = *cfg.init;
    } else {
        // Uniform start scaled so total expected counts match total observed.
        const double total_counts = counts.sum();
        const double total_weight = A.col_sums().sum();
        lambda = Vec::Constant(A.n_sources(), total_counts / total_weight);
    }
    EmResult result;
    double prev_ll = log_likelihood(lambda, A, counts);
    for (int it = 0; it < cfg.max_iters; ++it) {
        lambda = em_step(lambda, A, counts);
        const double ll = log_likelihood(lambda, A, counts);
        result.trace.push_back(ll);
        ++result.iterations;
        if (std::isfinite(ll) && std::isfinite(prev_ll)) {
            const double rel = std::abs(ll - prev_ll) / std::max(1.0, std::abs(prev_ll));
            if (rel < cfg.rel_ll_tol) {
                prev_ll = ll;
                break;
            }
        }
        prev_ll = ll;
    }
    result.rates = std::move(lambda);
    return result;
}

}  // namespace wb
