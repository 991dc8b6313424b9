#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "duet/evaluation.hpp"
#include "duet/types.hpp"

namespace duet::io {

namespace fs = std::filesystem;

/// Counts without coordinates, genes x spots.
struct CountTable {
    Eigen::MatrixXd counts;
    std::vector<std::string> gene_ids;
    std::vector<std::string> spot_ids;
};

/// Dense CSV: header `gene,<spot ids>`, one gene per row.
CountTable read_counts_dense(std::istream& is);
/// Triplet text: `%%triplet G n nnz` then `gene_idx,spot_idx,count` (0-based).
/// Gene and spot ids are the decimal indices.
CountTable read_counts_triplet(std::istream& is);
/// Picks the format from the first line.
CountTable read_counts(std::istream& is);

void write_counts_dense(std::ostream& os, const CountTable& t);
void write_counts_triplet(std::ostream& os, const CountTable& t);

/// `spot_id,x,y`.
std::vector<std::pair<std::string, Point2>> read_coords(std::istream& is);
void write_coords(std::ostream& os, const std::vector<std::string>& spot_ids, const std::vector<Point2>& coords);

/// Joins coordinates by spot id. Throws InputError for spots without one.
ExpressionMatrix attach_coords(CountTable t, const std::vector<std::pair<std::string, Point2>>& coords);
ExpressionMatrix read_expression(const fs::path& counts, const fs::path& coords);
void write_expression(const fs::path& counts, const fs::path& coords, const ExpressionMatrix& expr,
                      bool triplet = false);

/// `gene,<cell types>`.
ReferenceMatrix read_reference(std::istream& is);
void write_reference(std::ostream& os, const ReferenceMatrix& ref);

/// Per-type mean of raw counts, optionally restricted to marker genes, then
/// pseudocounted. Types are listed in `types` order, or sorted when empty.
ReferenceMatrix build_reference(const CountTable& sc_counts, const std::vector<std::string>& cell_labels,
                                const std::optional<std::vector<std::string>>& marker_genes,
                                std::vector<std::string> types = {});

/// `cell_id,label`; the labels are returned in the order of `cell_ids`.
std::vector<std::string> read_cell_labels(std::istream& is, const std::vector<std::string>& cell_ids);
/// One gene id per line.
std::vector<std::string> read_gene_list(std::istream& is);

void write_fit(const FitResult& fit, const fs::path& dir);
FitResult read_fit(const fs::path& dir);

/// `spot_id,<types>` rows.
void write_composition(std::ostream& os, const std::vector<std::string>& spot_ids,
                       const std::vector<std::string>& type_ids, const RowMatrix& theta);
RowMatrix read_composition(std::istream& is, std::vector<std::string>* spot_ids = nullptr,
                           std::vector<std::string>* type_ids = nullptr);

/// `spot_id,label`.
void write_labels(std::ostream& os, const std::vector<std::string>& spot_ids, const std::vector<int>& labels);
std::vector<int> read_labels(std::istream& is, std::vector<std::string>* spot_ids = nullptr);

/// `spot_id,s`.
void write_size_factors(std::ostream& os, const std::vector<std::string>& spot_ids, const SizeFactors& s);
SizeFactors read_size_factors(std::istream& is, std::vector<std::string>* spot_ids = nullptr);

struct MetricRow {
    std::string method;
    std::string scenario;
    std::uint64_t seed = 0;
    MetricReport report;
};

/// `method,scenario,seed,ari,frob_sq,max_row`.
void write_metric_rows(std::ostream& os, const std::vector<MetricRow>& rows, bool header = true);

/// Cluster map: one square per spot in its cluster colour, a legend and a
/// pie glyph of each cluster centroid. Output depends only on the inputs.
void render_map(std::ostream& os, const FitResult& fit, const std::vector<Point2>& coords);

/// Opens with an InputError naming the path on failure.
std::ifstream open_in(const fs::path& p);
std::ofstream open_out(const fs::path& p);

}  // namespace duet::io
