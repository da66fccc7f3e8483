#include "workbench/io.hpp"

#include "workbench/common.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace wb::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
    std::ofstream os(path, mode);
    if (!os) {
        throw MalformedFile("cannot open for writing: " + path.string());
    }
    os.precision(17);
    return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
    std::ifstream is(path, mode);
    if (!is) {
        throw MalformedFile("cannot open for reading: " + path.string());
    }
    return is;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, int line_no) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw MalformedFile("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

int parse_int(const std::string& s, int line_no) {
    try {
        size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw MalformedFile("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    }
}

}  // namespace

void write_pgm16(const Eigen::MatrixXd& grid, const std::filesystem::path& path) {
    const double maxval = grid.maxCoeff();
    const double scale = maxval > 0.0 ? 65535.0 / maxval : 1.0;
    auto os = open_out(path, std::ios::binary);
    os << "P5\n" << grid.cols() << ' ' << grid.rows() << "\n65535\n";
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
        for (Eigen::Index c = 0; c < grid.cols(); ++c) {
            const auto v = static_cast<std::uint16_t>(
                std::lround(std::clamp(grid(r, c) * scale, 0.0, 65535.0)));
            const unsigned char bytes[2] = {static_cast<unsigned char>(v >> 8),
                                            static_cast<unsigned char>(v & 0xFF)};
            os.write(reinterpret_cast<const char*>(bytes), 2);
        }
    }
    auto sidecar = open_out(path.string() + ".scale.txt");
    sidecar << "scale=" << scale << "\n";
}

Eigen::MatrixXd read_pgm(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    std::string magic;
    is >> magic;
    if (magic != "P5") {
        throw MalformedFile(path.string() + ": not a P5 PGM");
    }
    long w = 0, h = 0, maxval = 0;
    is >> w >> h >> maxval;
    if (!is || w < 1 || h < 1 || maxval < 1 || maxval > 65535) {
        throw MalformedFile(path.string() + ": bad PGM header");
    }
    is.get();  // single whitespace after maxval
    const int bytes_per = maxval > 255 ? 2 : 1;
    Eigen::MatrixXd grid(h, w);
    for (long r = 0; r < h; ++r) {
        for (long c = 0; c < w; ++c) {
            unsigned char buf[2] = {0, 0};
            is.read(reinterpret_cast<char*>(buf), bytes_per);
            if (!is) {
                const auto offset = static_cast<long>(is.tellg());
                throw MalformedFile(path.string() + ": truncated at byte offset " +
                                    std::to_string(offset < 0 ? (r * w + c) * bytes_per : offset));
            }
            grid(r, c) = bytes_per == 2 ? (buf[0] << 8 | buf[1]) : buf[0];
        }
    }
    return grid;
}

void write_vector(const Vec& v, const std::filesystem::path& path) {
    auto os = open_out(path);
    for (Eigen::Index i = 0; i < v.size(); ++i) os << v[i] << '\n';
}

Vec read_vector(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::vector<double> vals;
    double x = 0.0;
    while (is >> x) vals.push_back(x);
    Vec v(static_cast<Eigen::Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    return v;
}

void write_system_matrix(const SystemMatrix& a, const std::filesystem::path& path) {
    auto os = open_out(path);
    a.write(os);
}

SystemMatrix read_system_matrix(const std::filesystem::path& path) {
    auto is = open_in(path);
    return SystemMatrix::read(is);
}

void write_sinogram_csv(const Sinogram& sino, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "angle,bin,count\n";
    for (int a = 0; a < sino.n_angles; ++a) {
        for (int b = 0; b < sino.n_bins; ++b) {
            os << a << ',' << b << ',' << static_cast<long>(sino.counts[a * sino.n_bins + b])
               << '\n';
        }
    }
}

Sinogram read_sinogram_csv(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line) || split_csv_line(line) !=
                                       std::vector<std::string>{"angle", "bin", "count"}) {
        throw MalformedFile(path.string() + ": expected header angle,bin,count");
    }
    struct Row {
        int angle, bin;
        double count;
    };
    std::vector<Row> rows;
    int max_angle = -1, max_bin = -1;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) {
            throw MalformedFile(path.string() + ": line " + std::to_string(line_no) +
                                ": expected 3 fields");
        }
        Row r{parse_int(f[0], line_no), parse_int(f[1], line_no),
              parse_double(f[2], line_no)};
        max_angle = std::max(max_angle, r.angle);
        max_bin = std::max(max_bin, r.bin);
        rows.push_back(r);
    }
    if (rows.empty()) {
        throw MalformedFile(path.string() + ": no data rows");
    }
    Sinogram sino;
    sino.n_angles = max_angle + 1;
    sino.n_bins = max_bin + 1;
    sino.counts = Vec::Zero(static_cast<Eigen::Index>(sino.n_angles) * sino.n_bins);
    for (const auto& r : rows) {
        sino.counts[r.angle * sino.n_bins + r.bin] = r.count;
    }
    validate_counts(sino.counts);
    return sino;
}

void write_ellipses_csv(const std::vector<Ellipse>& ellipses,
                        const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "cx,cy,a,b,theta,intensity\n";
    for (const auto& e : ellipses) {
        os << e.cx << ',' << e.cy << ',' << e.a << ',' << e.b << ',' << e.theta << ','
           << e.intensity << '\n';
    }
}

std::vector<Ellipse> read_ellipses_csv(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) {
        throw MalformedFile(path.string() + ": empty file");
    }
    std::vector<Ellipse> out;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) {
            throw MalformedFile(path.string() + ": line " + std::to_string(line_no) +
                                ": expected 6 fields");
        }
        out.push_back({parse_double(f[0], line_no), parse_double(f[1], line_no),
                       parse_double(f[2], line_no), parse_double(f[3], line_no),
                       parse_double(f[4], line_no), parse_double(f[5], line_no)});
    }
    return out;
}

void write_graph(const Graph& g, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << g.n_nodes() << ' ' << g.n_edges() << '\n';
    for (const auto& e : g.edges()) {
        os << e.u << ' ' << e.v << ' ' << e.weight << '\n';
    }
}

Graph read_graph(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) {
        throw MalformedFile(path.string() + ": empty graph file");
    }
    std::istringstream head(line);
    int n_nodes = 0, n_edges = 0;
    if (!(head >> n_nodes >> n_edges)) {
        throw MalformedFile(path.string() + ": line 1: expected 'n_nodes n_edges'");
    }
    std::vector<Graph::Edge> edges;
    for (int i = 0; i < n_edges; ++i) {
        if (!std::getline(is, line)) {
            throw MalformedFile(path.string() + ": line " + std::to_string(i + 2) +
                                ": missing edge");
        }
        std::istringstream es(line);
        Graph::Edge e{};
        if (!(es >> e.u >> e.v >> e.weight)) {
            throw MalformedFile(path.string() + ": line " + std::to_string(i + 2) +
                                ": expected 'u v weight'");
        }
        if (e.u == e.v) {
            throw MalformedFile(path.string() + ": line " + std::to_string(i + 2) +
                                ": self-loop rejected");
        }
        edges.push_back(e);
    }
    return Graph(n_nodes, std::move(edges));
}

std::vector<std::pair<int, int>> read_od_pairs(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) {
        throw MalformedFile(path.string() + ": empty OD file");
    }
    std::vector<std::pair<int, int>> out;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2) {
            throw MalformedFile(path.string() + ": line " + std::to_string(line_no) +
                                ": expected 2 fields");
        }
        out.emplace_back(parse_int(f[0], line_no), parse_int(f[1], line_no));
    }
    return out;
}

void write_od_pairs(const std::vector<std::pair<int, int>>& pairs,
                    const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "origin,destination\n";
    for (const auto& [o, d] : pairs) os << o << ',' << d << '\n';
}

void write_link_counts(const LinkCounts& counts, const std::filesystem::path& path) {
    auto os = open_out(path);
    for (const auto& epoch : counts) {
        for (Eigen::Index l = 0; l < epoch.size(); ++l) {
            os << (l ? "," : "") << static_cast<long>(epoch[l]);
        }
        os << '\n';
    }
}

LinkCounts read_link_counts(const std::filesystem::path& path) {
    auto is = open_in(path);
    LinkCounts out;
    std::string line;
    int line_no = 0;
    Eigen::Index dim = -1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        Vec epoch(static_cast<Eigen::Index>(f.size()));
        for (size_t i = 0; i < f.size(); ++i) {
            epoch[static_cast<Eigen::Index>(i)] = parse_double(f[i], line_no);
        }
        if (dim >= 0 && epoch.size() != dim) {
            throw MalformedFile(path.string() + ": line " + std::to_string(line_no) +
                                ": inconsistent link dimension");
        }
        dim = epoch.size();
        validate_counts(epoch);
        out.push_back(std::move(epoch));
    }
    return out;
}

void write_corpus_csv(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "label";
    for (int i = 0; i < kGlyphDim; ++i) os << ",p" << i;
    os << '\n';
    for (size_t i = 0; i < corpus.size(); ++i) {
        os << corpus.labels[i];
        for (int p = 0; p < kGlyphDim; ++p) os << ',' << corpus.images[i].pixels[p];
        os << '\n';
    }
}

LabeledCorpus read_corpus_csv(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) {
        throw MalformedFile(path.string() + ": empty corpus file");
    }
    LabeledCorpus corpus;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != kGlyphDim + 1) {
            throw MalformedFile(path.string() + ": line " + std::to_string(line_no) +
                                ": expected " + std::to_string(kGlyphDim + 1) + " fields");
        }
        const int label = parse_int(f[0], line_no);
        if (label < 0 || label > 9) {
            throw MalformedFile(path.string() + ": line " + std::to_string(line_no) +
                                ": label out of range");
        }
        GlyphImage img;
        for (int p = 0; p < kGlyphDim; ++p) {
            img.pixels[p] = parse_double(f[static_cast<size_t>(p) + 1], line_no);
        }
        img.clip();
        corpus.images.push_back(std::move(img));
        corpus.labels.push_back(label);
    }
    if (corpus.size() == 0) {
        throw MalformedFile(path.string() + ": no corpus rows");
    }
    return corpus;
}

void write_grid_cdf(const GridCdf& f, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "# x_max=" << f.x_max() << '\n';
    os << "# tail_rate=" << f.tail_rate() << '\n';
    os << "x,F\n";
    const double h = f.dx();
    for (int i = 0; i <= f.n(); ++i) {
        os << i * h << ',' << f.values()[i] << '\n';
    }
}

GridCdf read_grid_cdf(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string line;
    double x_max = 0.0, tail_rate = -1.0;
    std::vector<double> values;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            const auto eq = body.find('=');
            if (eq != std::string::npos) {
                std::string key = body.substr(0, eq);
                key.erase(0, key.find_first_not_of(' '));
                key.erase(key.find_last_not_of(' ') + 1);
                if (key == "x_max") x_max = parse_double(body.substr(eq + 1), line_no);
                if (key == "tail_rate") tail_rate = parse_double(body.substr(eq + 1), line_no);
            }
            continue;
        }
        if (line == "x,F") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2) {
            throw MalformedFile(path.string() + ": line " + std::to_string(line_no) +
                                ": expected 2 fields");
        }
        values.push_back(parse_double(f[1], line_no));
    }
    if (!(x_max > 0.0) || tail_rate < 0.0 || values.size() < 2) {
        throw MalformedFile(path.string() + ": missing x_max/tail_rate headers or data");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
    return GridCdf(x_max, std::move(v), tail_rate);
}

void write_trace_csv(const std::vector<double>& trace, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "iteration,log_likelihood\n";
    for (size_t i = 0; i < trace.size(); ++i) {
        os << (i + 1) << ',' << trace[i] << '\n';
    }
}

}  // namespace wb::io
