#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fot/matrix.hpp"

namespace fot {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Weighted point cloud in R^d. Immutable after construction; weights are
// renormalized to sum exactly to 1 so that downstream marginal checks never
// see input rounding.
class DiscreteMeasure {
public:
    // points: n*d row-major. Throws if empty, ragged, or a weight is negative.
    DiscreteMeasure(std::vector<double> points, std::vector<double> weights,
                    std::size_t dim);

    static DiscreteMeasure uniform(std::vector<double> points, std::size_t dim);

    std::size_t size() const { return weights_.size(); }
    std::size_t dim() const { return dim_; }
    std::span<const double> point(std::size_t i) const {
        return {points_.data() + i * dim_, dim_};
    }
    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<double> points_;
    std::vector<double> weights_;
    std::size_t dim_ = 0;
};

struct TransportPlan {
    Matrix matrix;                      // n_rows x n_cols, entries >= 0
    std::vector<double> row_marginal;
    std::vector<double> col_marginal;

    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
};

struct FeasibilityReport {
    double row_violation = 0.0;  // L1 deviation of row sums from row_marginal
    double col_violation = 0.0;
    bool passes(double tol) const { return row_violation <= tol && col_violation <= tol; }
};

FeasibilityReport validate_plan(const TransportPlan& plan, double tol = 1e-6);

struct LabeledDataset {
    DiscreteMeasure measure;
    std::vector<std::string> labels;  // empty, or one per point

    bool has_labels() const { return !labels.empty(); }
};

// CSV point cloud: one point per line, d comma-separated floats, optional
// trailing label token. Uniform weights 1/n; dim inferred from first row.
LabeledDataset load_csv(const std::filesystem::path& path, bool has_labels,
                        bool skip_header = false);

void save_csv(const std::filesystem::path& path, const LabeledDataset& data);

// Entry (i,j) = ||a_i - b_j||^2.
Matrix squared_cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b);

}  // namespace fot
