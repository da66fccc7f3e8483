#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <optional>
#include <vector>

namespace wb {

using Vec = Eigen::VectorXd;

/// Sparse nonnegative coupling between sources (pixels, routes) and
/// detectors (tubes, links). Stored detector-major: row d, column b.
class SystemMatrix {
public:
    struct Entry {
        int source;
        int detector;
        double weight;
    };

    /// Validates weights (finite, >= 0) and rejects sources with zero
    /// total weight: a source no detector can see has no identifiable rate.
    SystemMatrix(int n_sources, int n_detectors, const std::vector<Entry>& entries);

    int n_sources() const { return static_cast<int>(mat_.cols()); }
    int n_detectors() const { return static_cast<int>(mat_.rows()); }

    const Eigen::SparseMatrix<double>& matrix() const { return mat_; }

    /// Per-source totals A_b = sum_d a_bd.
    const Vec& col_sums() const { return col_sums_; }

    /// Forward projection m = A x (expected detector means).
    Vec forward(const Vec& x) const;

    /// Back projection A^T y.
    Vec back(const Vec& y) const;

    void write(std::ostream& os) const;
    static SystemMatrix read(std::istream& is);

private:
    Eigen::SparseMatrix<double> mat_;  // n_detectors x n_sources
    Vec col_sums_;
};

struct EmConfig {
    int max_iters = 200;
    double rel_ll_tol = 1e-8;
    std::optional<Vec> init;  // uniform when absent
};

/// One multiplicative EM update for the Poisson model n_d ~ Poisson((A lambda)_d):
///   lambda'_b = (lambda_b / A_b) * sum_d a_bd * n_d / (A lambda)_d,
/// where detectors with n_d = 0 contribute 0 even if (A lambda)_d = 0.
Vec em_step(const Vec& lambda, const SystemMatrix& A, const Vec& counts);

/// Poisson log-likelihood sum_d [ n_d log (A lambda)_d - (A lambda)_d ],
/// dropping the -log n_d! constant, with 0 log 0 := 0. Returns -inf when
/// some n_d > 0 has zero forward projection.
double log_likelihood(const Vec& lambda, const SystemMatrix& A, const Vec& counts);

/// KL(n || m) = sum_d [ n_d log(n_d/m_d) - n_d + m_d ], n_d = 0 terms
/// contributing m_d.
double kl_divergence(const Vec& counts, const Vec& expected);

struct EmResult {
    Vec rates;
    std::vector<double> trace;  // log-likelihood after each iteration
    int iterations = 0;
};

/// Iterates em_step from a uniform (count-matched) or supplied start until
/// the relative log-likelihood improvement drops below cfg.rel_ll_tol or
/// max_iters is reached.
EmResult run_em(const SystemMatrix& A, const Vec& counts, const EmConfig& cfg);

/// Throws unless every entry is a finite nonnegative integer.
void validate_counts(const Vec& counts);

}  // namespace wb
