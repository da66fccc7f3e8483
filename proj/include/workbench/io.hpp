#pragma once

#include "workbench/nettomo.hpp"
#include "workbench/pet.hpp"
#include "workbench/renewal.hpp"
#include "workbench/tangent.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace wb::io {

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples). The grid is
/// scaled so its maximum maps to 65535; the scale is recorded in a sidecar
/// `<path>.scale.txt` so values are recoverable.
void write_pgm16(const Eigen::MatrixXd& grid, const std::filesystem::path& path);

/// Reads a P5 PGM (8- or 16-bit) back into raw sample values.
Eigen::MatrixXd read_pgm(const std::filesystem::path& path);

void write_vector(const Vec& v, const std::filesystem::path& path);
Vec read_vector(const std::filesystem::path& path);

void write_system_matrix(const SystemMatrix& a, const std::filesystem::path& path);
SystemMatrix read_system_matrix(const std::filesystem::path& path);

/// CSV with header `angle,bin,count`.
void write_sinogram_csv(const Sinogram& sino, const std::filesystem::path& path);
Sinogram read_sinogram_csv(const std::filesystem::path& path);

/// CSV `cx,cy,a,b,theta,intensity`.
void write_ellipses_csv(const std::vector<Ellipse>& ellipses,
                        const std::filesystem::path& path);
std::vector<Ellipse> read_ellipses_csv(const std::filesystem::path& path);

/// Text graph: first line `n_nodes n_edges`, then `u v weight` per line.
void write_graph(const Graph& g, const std::filesystem::path& path);
Graph read_graph(const std::filesystem::path& path);

/// CSV `origin,destination`.
std::vector<std::pair<int, int>> read_od_pairs(const std::filesystem::path& path);
void write_od_pairs(const std::vector<std::pair<int, int>>& pairs,
                    const std::filesystem::path& path);

/// CSV, one row of link counts per epoch.
void write_link_counts(const LinkCounts& counts, const std::filesystem::path& path);
LinkCounts read_link_counts(const std::filesystem::path& path);

/// CSV `label,p0,...,p255`.
void write_corpus_csv(const LabeledCorpus& corpus, const std::filesystem::path& path);
LabeledCorpus read_corpus_csv(const std::filesystem::path& path);

/// CSV `x,F` with `# x_max=` and `# tail_rate=` comment lines.
void write_grid_cdf(const GridCdf& f, const std::filesystem::path& path);
GridCdf read_grid_cdf(const std::filesystem::path& path);

void write_trace_csv(const std::vector<double>& trace, const std::filesystem::path& path);

}  // namespace wb::io
