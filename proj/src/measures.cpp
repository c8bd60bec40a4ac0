#include "fot/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fot/kernels.hpp"

namespace fot {

DiscreteMeasure::DiscreteMeasure(std::vector<double> points,
                                 std::vector<double> weights, std::size_t dim)
    : points_(std::move(points)), weights_(std::move(weights)), dim_(dim) {
    if (dim_ == 0) throw FormatError("measure dimension must be positive");
    if (weights_.empty()) throw FormatError("measure must contain at least one point");
    if (points_.size() != weights_.size() * dim_)
        throw FormatError("point data does not match n*dim");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw FormatError("negative or NaN weight");
        sum += w;
    }
    if (sum <= 0.0) throw FormatError("weights sum to zero");
    for (double& w : weights_) w /= sum;
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<double> points, std::size_t dim) {
    if (dim == 0 || points.size() % dim != 0)
        throw FormatError("point data does not match dim");
    const std::size_t n = points.size() / dim;
    return DiscreteMeasure(std::move(points), std::vector<double>(n, 1.0), dim);
}

std::vector<double> TransportPlan::row_sums() const {
    std::vector<double> s(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        double acc = 0.0;
        for (double v : matrix.row(i)) acc += v;
        s[i] = acc;
    }
    return s;
}

std::vector<double> TransportPlan::col_sums() const {
    std::vector<double> s(matrix.cols(), 0.0);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        auto row = matrix.row(i);
        for (std::size_t j = 0; j < matrix.cols(); ++j) s[j] += row[j];
    }
    return s;
}

FeasibilityReport validate_plan(const TransportPlan& plan, double) {
    FeasibilityReport rep;
    const auto rs = plan.row_sums();
    const auto cs = plan.col_sums();
    for (std::size_t i = 0; i < rs.size(); ++i)
        rep.row_violation += std::abs(rs[i] - plan.row_marginal[i]);
    for (std::size_t j = 0; j < cs.size(); ++j)
        rep.col_violation += std::abs(cs[j] - plan.col_marginal[j]);
    return rep;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& tok, std::size_t row) {
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    double value{};
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw FormatError("row " + std::to_string(row) + ": cannot parse '" + tok +
                          "' as a number");
    return value;
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, bool has_labels,
                        bool skip_header) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());

    std::vector<double> points;
    std::vector<std::string> labels;
    std::size_t dim = 0;
    std::size_t row = 0;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        ++row;
        if (first && skip_header) {
            first = false;
            continue;
        }
        first = false;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        std::size_t ncoord = fields.size() - (has_labels ? 1 : 0);
        if (ncoord == 0)
            throw FormatError("row " + std::to_string(row) + ": no coordinates");
        if (dim == 0) {
            dim = ncoord;
        } else if (ncoord != dim) {
            throw FormatError("row " + std::to_string(row) + ": expected " +
                              std::to_string(dim) + " coordinates, got " +
                              std::to_string(ncoord));
        }
        for (std::size_t t = 0; t < dim; ++t)
            points.push_back(parse_double(fields[t], row));
        if (has_labels) {
            std::string lbl = fields.back();
            if (lbl.empty())
                throw FormatError("row " + std::to_string(row) + ": empty label");
            labels.push_back(std::move(lbl));
        }
    }
    if (points.empty()) throw FormatError("empty input: " + path.string());
    return LabeledDataset{DiscreteMeasure::uniform(std::move(points), dim),
                          std::move(labels)};
}

void save_csv(const std::filesystem::path& path, const LabeledDataset& data) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out.precision(17);
    const auto& m = data.measure;
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto p = m.point(i);
        for (std::size_t t = 0; t < m.dim(); ++t) {
            if (t) out << ',';
            out << p[t];
        }
        if (data.has_labels()) out << ',' << data.labels[i];
        out << '\n';
    }
}

Matrix squared_cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.dim() != b.dim())
        throw DimensionError("dimension mismatch: " + std::to_string(a.dim()) +
                             " vs " + std::to_string(b.dim()));
    Matrix out(a.size(), b.size());
    kernels::pairwise_sqdist(a.points().data(), a.size(), b.points().data(),
                             b.size(), a.dim(), out.data());
    return out;
}

}  // namespace fot
