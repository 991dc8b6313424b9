#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace duet {

/// Row-major dense matrix; rows are spots (or edges), columns are cell types.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Raised for malformed or inconsistent user inputs.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// UMI counts, genes x spots, with one coordinate pair per spot.
/// Counts are stored as doubles holding integral values.
struct ExpressionMatrix {
    Eigen::MatrixXd counts;
    std::vector<std::string> gene_ids;
    std::vector<std::string> spot_ids;
    std::vector<Point2> coords;

    [[nodiscard]] Eigen::Index n_genes() const { return counts.rows(); }
    [[nodiscard]] Eigen::Index n_spots() const { return counts.cols(); }
};

/// Mean per-cell expression, genes x cell types.
struct ReferenceMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> gene_ids;
    std::vector<std::string> celltype_ids;

    [[nodiscard]] Eigen::Index n_genes() const { return values.rows(); }
    [[nodiscard]] Eigen::Index n_types() const { return values.cols(); }
};

/// n x K; every row lies on the unit simplex.
using CompositionMatrix = RowMatrix;

/// One nonnegative scale per spot.
using SizeFactors = Vector;

struct ClusterAssignment {
    std::vector<int> labels;  // 1-based, one per spot
    RowMatrix centroids;      // C x K

    [[nodiscard]] int n_clusters() const { return static_cast<int>(centroids.rows()); }
};

struct FitResult {
    CompositionMatrix theta_hat;
    SizeFactors s_hat;
    ClusterAssignment clusters;
    double lambda = 0.0;
    std::vector<double> objective_trace;
    bool converged = false;
    int iterations = 0;

    std::vector<std::string> spot_ids;
    std::vector<std::string> celltype_ids;
};

}  // namespace duet
