#include "duet/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "duet/model_core.hpp"
#include "duet/text.hpp"

namespace duet::io {

namespace {

using text::format_double;
using text::parse_double;
using text::split_csv;

std::string at(const char* what, std::size_t row, std::size_t col) {
    return std::string(what) + " line " + std::to_string(row) + ", column " + std::to_string(col);
}

bool next_line(std::istream& is, std::string& line, std::size_t& lineno) {
    while (std::getline(is, line)) {
        ++lineno;
        if (!text::trim(line).empty()) return true;
    }
    return false;
}

double parse_count(std::string_view field, const std::string& ctx) {
    const double v = parse_double(field, ctx);
    if (!std::isfinite(v) || v < 0.0 || v != std::floor(v))
        throw InputError("count '" + std::string(text::trim(field)) + "' at " + ctx +
                         " is not a nonnegative integer");
    return v;
}

std::vector<std::string> index_ids(Eigen::Index n) {
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    return ids;
}

std::vector<std::string> ids_or_index(const std::vector<std::string>& ids, Eigen::Index n) {
    return ids.empty() ? index_ids(n) : ids;
}

std::vector<std::string> type_ids_or_default(const std::vector<std::string>& ids, Eigen::Index k) {
    if (!ids.empty()) return ids;
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < k; ++j) out.push_back("type" + std::to_string(j + 1));
    return out;
}

std::vector<std::string> header_fields(std::istream& is, const char* what, std::size_t& lineno) {
    std::string line;
    if (!next_line(is, line, lineno)) throw InputError(std::string(what) + ": empty input");
    std::vector<std::string> out;
    for (auto f : split_csv(line)) out.emplace_back(text::trim(f));
    return out;
}

}  // namespace

std::ifstream open_in(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw InputError("cannot open " + p.string() + " for reading");
    return is;
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw InputError("cannot open " + p.string() + " for writing");
    return os;
}

CountTable read_counts_dense(std::istream& is) {
    std::size_t lineno = 0;
    const auto head = header_fields(is, "counts", lineno);
    if (head.size() < 2) throw InputError("counts: header needs a gene column and at least one spot");
    CountTable t;
    t.spot_ids.assign(head.begin() + 1, head.end());
    const auto n = t.spot_ids.size();

    std::vector<double> values;
    std::string line;
    while (next_line(is, line, lineno)) {
        const auto fields = split_csv(line);
        if (fields.size() != n + 1)
            throw InputError("counts line " + std::to_string(lineno) + ": expected " + std::to_string(n + 1) +
                             " fields, found " + std::to_string(fields.size()));
        t.gene_ids.emplace_back(text::trim(fields[0]));
        for (std::size_t c = 1; c <= n; ++c) values.push_back(parse_count(fields[c], at("counts", lineno, c + 1)));
    }
    const auto g = static_cast<Eigen::Index>(t.gene_ids.size());
    t.counts.resize(g, static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < g; ++r)
        for (std::size_t c = 0; c < n; ++c)
            t.counts(r, static_cast<Eigen::Index>(c)) = values[static_cast<std::size_t>(r) * n + c];
    return t;
}

CountTable read_counts_triplet(std::istream& is) {
    std::size_t lineno = 0;
    std::string line;
    if (!next_line(is, line, lineno)) throw InputError("triplet: empty input");
    std::istringstream head(line);
    std::string tag;
    long long g = -1, n = -1, nnz = -1;
    head >> tag >> g >> n >> nnz;
    if (tag != "%%triplet" || head.fail() || g < 0 || n < 0 || nnz < 0)
        throw InputError("triplet: malformed header, expected '%%triplet G n nnz'");

    CountTable t;
    t.counts = Eigen::MatrixXd::Zero(g, n);
    t.gene_ids = index_ids(g);
    t.spot_ids = index_ids(n);
    std::set<std::pair<long long, long long>> seen;
    for (long long e = 0; e < nnz; ++e) {
        if (!next_line(is, line, lineno))
            throw InputError("triplet: header promises " + std::to_string(nnz) + " entries, found " +
                             std::to_string(e));
        const auto f = split_csv(line);
        if (f.size() != 3) throw InputError("triplet line " + std::to_string(lineno) + ": expected 3 fields");
        const auto gi = text::parse_int(f[0], at("triplet", lineno, 1));
        const auto si = text::parse_int(f[1], at("triplet", lineno, 2));
        const double v = parse_count(f[2], at("triplet", lineno, 3));
        if (gi < 0 || gi >= g || si < 0 || si >= n)
            throw InputError("triplet line " + std::to_string(lineno) + ": index out of range");
        if (!seen.insert({gi, si}).second)
            throw InputError("triplet line " + std::to_string(lineno) + ": duplicate entry");
        t.counts(gi, si) = v;
    }
    if (next_line(is, line, lineno)) throw InputError("triplet: more entries than the header declares");
    return t;
}

CountTable read_counts(std::istream& is) {
    const auto pos = is.tellg();
    std::string first;
    std::getline(is, first);
    is.clear();
    is.seekg(pos);
    if (first.rfind("%%triplet", 0) == 0) return read_counts_triplet(is);
    return read_counts_dense(is);
}

void write_counts_dense(std::ostream& os, const CountTable& t) {
    os << "gene";
    for (const auto& s : ids_or_index(t.spot_ids, t.counts.cols())) os << ',' << s;
    os << '\n';
    const auto genes = ids_or_index(t.gene_ids, t.counts.rows());
    for (Eigen::Index g = 0; g < t.counts.rows(); ++g) {
        os << genes[static_cast<std::size_t>(g)];
        for (Eigen::Index i = 0; i < t.counts.cols(); ++i) os << ',' << format_double(t.counts(g, i));
        os << '\n';
    }
}

void write_counts_triplet(std::ostream& os, const CountTable& t) {
    const auto nnz = (t.counts.array() != 0.0).count();
    os << "%%triplet " << t.counts.rows() << ' ' << t.counts.cols() << ' ' << nnz << '\n';
    for (Eigen::Index i = 0; i < t.counts.cols(); ++i)
        for (Eigen::Index g = 0; g < t.counts.rows(); ++g)
            if (t.counts(g, i) != 0.0) os << g << ',' << i << ',' << format_double(t.counts(g, i)) << '\n';
}

std::vector<std::pair<std::string, Point2>> read_coords(std::istream& is) {
    std::vector<std::pair<std::string, Point2>> out;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    std::string line;
    while (next_line(is, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != 3) throw InputError("coords line " + std::to_string(lineno) + ": expected spot_id,x,y");
        if (lineno == 1 && text::trim(f[0]) == "spot_id") continue;
        const std::string id(text::trim(f[0]));
        const Point2 p{parse_double(f[1], at("coords", lineno, 2)), parse_double(f[2], at("coords", lineno, 3))};
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InputError("coords line " + std::to_string(lineno) + ": non-finite coordinate");
        if (!seen.insert(id).second) throw InputError("coords: duplicate spot id '" + id + "'");
        out.emplace_back(id, p);
    }
    return out;
}

void write_coords(std::ostream& os, const std::vector<std::string>& spot_ids, const std::vector<Point2>& coords) {
    const auto ids = ids_or_index(spot_ids, static_cast<Eigen::Index>(coords.size()));
    os << "spot_id,x,y\n";
    for (std::size_t i = 0; i < coords.size(); ++i)
        os << ids[i] << ',' << format_double(coords[i].x) << ',' << format_double(coords[i].y) << '\n';
}

ExpressionMatrix attach_coords(CountTable t, const std::vector<std::pair<std::string, Point2>>& coords) {
    std::unordered_map<std::string, Point2> by_id(coords.begin(), coords.end());
    ExpressionMatrix expr;
    for (const auto& id : t.spot_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw InputError("spot '" + id + "' has no coordinates");
        expr.coords.push_back(it->second);
    }
    expr.counts = std::move(t.counts);
    expr.gene_ids = std::move(t.gene_ids);
    expr.spot_ids = std::move(t.spot_ids);
    return expr;
}

ExpressionMatrix read_expression(const fs::path& counts, const fs::path& coords) {
    auto cs = open_in(counts);
    auto table = read_counts(cs);
    auto xy = open_in(coords);
    return attach_coords(std::move(table), read_coords(xy));
}

void write_expression(const fs::path& counts, const fs::path& coords, const ExpressionMatrix& expr,
                      bool triplet) {
    CountTable t{expr.counts, expr.gene_ids, expr.spot_ids};
    auto os = open_out(counts);
    if (triplet) {
        write_counts_triplet(os, t);
        auto xy = open_out(coords);
        write_coords(xy, {}, expr.coords);
    } else {
        write_counts_dense(os, t);
        auto xy = open_out(coords);
        write_coords(xy, expr.spot_ids, expr.coords);
    }
}

ReferenceMatrix read_reference(std::istream& is) {
    std::size_t lineno = 0;
    const auto head = header_fields(is, "reference", lineno);
    if (head.size() < 2) throw InputError("reference: header needs a gene column and at least one cell type");
    ReferenceMatrix ref;
    ref.celltype_ids.assign(head.begin() + 1, head.end());
    const auto k = ref.celltype_ids.size();
    std::vector<double> values;
    std::string line;
    while (next_line(is, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != k + 1)
            throw InputError("reference line " + std::to_string(lineno) + ": expected " + std::to_string(k + 1) +
                             " fields");
        ref.gene_ids.emplace_back(text::trim(f[0]));
        for (std::size_t c = 1; c <= k; ++c) {
            const double v = parse_double(f[c], at("reference", lineno, c + 1));
            if (!std::isfinite(v) || v < 0.0)
                throw InputError("reference " + at("", lineno, c + 1) + ": entries must be finite and >= 0");
            values.push_back(v);
        }
    }
    ref.values.resize(static_cast<Eigen::Index>(ref.gene_ids.size()), static_cast<Eigen::Index>(k));
    for (Eigen::Index g = 0; g < ref.values.rows(); ++g)
        for (std::size_t c = 0; c < k; ++c)
            ref.values(g, static_cast<Eigen::Index>(c)) = values[static_cast<std::size_t>(g) * k + c];
    return ref;
}

void write_reference(std::ostream& os, const ReferenceMatrix& ref) {
    os << "gene";
    for (const auto& t : type_ids_or_default(ref.celltype_ids, ref.values.cols())) os << ',' << t;
    os << '\n';
    const auto genes = ids_or_index(ref.gene_ids, ref.values.rows());
    for (Eigen::Index g = 0; g < ref.values.rows(); ++g) {
        os << genes[static_cast<std::size_t>(g)];
        for (Eigen::Index k = 0; k < ref.values.cols(); ++k) os << ',' << format_double(ref.values(g, k));
        os << '\n';
    }
}

ReferenceMatrix build_reference(const CountTable& sc, const std::vector<std::string>& cell_labels,
                                const std::optional<std::vector<std::string>>& marker_genes,
                                std::vector<std::string> types) {
    const auto m = sc.counts.cols();
    if (static_cast<Eigen::Index>(cell_labels.size()) != m)
        throw InputError("build_reference: one label per cell required");
    if (types.empty()) {
        types = cell_labels;
        std::sort(types.begin(), types.end());
        types.erase(std::unique(types.begin(), types.end()), types.end());
    }
    std::map<std::string, Eigen::Index> type_index;
    for (std::size_t k = 0; k < types.size(); ++k) type_index[types[k]] = static_cast<Eigen::Index>(k);

    std::vector<Eigen::Index> rows;
    if (marker_genes) {
        const std::set<std::string> wanted(marker_genes->begin(), marker_genes->end());
        for (std::size_t g = 0; g < sc.gene_ids.size(); ++g)
            if (wanted.count(sc.gene_ids[g])) rows.push_back(static_cast<Eigen::Index>(g));
        if (rows.empty()) throw InputError("build_reference: no marker gene found in the single-cell data");
    } else {
        for (Eigen::Index g = 0; g < sc.counts.rows(); ++g) rows.push_back(g);
    }

    const auto k = static_cast<Eigen::Index>(types.size());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), k);
    std::vector<long long> members(types.size(), 0);
    for (Eigen::Index c = 0; c < m; ++c) {
        const auto it = type_index.find(cell_labels[static_cast<std::size_t>(c)]);
        if (it == type_index.end())
            throw InputError("build_reference: cell label '" + cell_labels[static_cast<std::size_t>(c)] +
                             "' is not a listed type");
        ++members[static_cast<std::size_t>(it->second)];
        for (std::size_t r = 0; r < rows.size(); ++r)
            sums(static_cast<Eigen::Index>(r), it->second) += sc.counts(rows[r], c);
    }
    ReferenceMatrix ref;
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto cnt = members[static_cast<std::size_t>(j)];
        if (cnt == 0) throw InputError("build_reference: cell type '" + types[static_cast<std::size_t>(j)] +
                                       "' has no cells");
        sums.col(j) /= static_cast<double>(cnt);
    }
    ref.values = std::move(sums);
    for (auto r : rows) ref.gene_ids.push_back(sc.gene_ids[static_cast<std::size_t>(r)]);
    ref.celltype_ids = std::move(types);
    return apply_pseudocount(std::move(ref));
}

std::vector<std::string> read_cell_labels(std::istream& is, const std::vector<std::string>& cell_ids) {
    std::unordered_map<std::string, std::string> by_id;
    std::size_t lineno = 0;
    std::string line;
    while (next_line(is, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != 2) throw InputError("labels line " + std::to_string(lineno) + ": expected cell_id,label");
        if (lineno == 1 && text::trim(f[0]) == "cell_id") continue;
        if (!by_id.emplace(std::string(text::trim(f[0])), std::string(text::trim(f[1]))).second)
            throw InputError("labels: duplicate cell id '" + std::string(text::trim(f[0])) + "'");
    }
    std::vector<std::string> out;
    for (const auto& id : cell_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw InputError("labels: cell '" + id + "' has no label");
        out.push_back(it->second);
    }
    return out;
}

std::vector<std::string> read_gene_list(std::istream& is) {
    std::vector<std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (next_line(is, line, lineno)) out.emplace_back(text::trim(line));
    return out;
}

void write_composition(std::ostream& os, const std::vector<std::string>& spot_ids,
                       const std::vector<std::string>& type_ids, const RowMatrix& theta) {
    os << "spot_id";
    for (const auto& t : type_ids_or_default(type_ids, theta.cols())) os << ',' << t;
    os << '\n';
    const auto ids = ids_or_index(spot_ids, theta.rows());
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        os << ids[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < theta.cols(); ++k) os << ',' << format_double(theta(i, k));
        os << '\n';
    }
}

RowMatrix read_composition(std::istream& is, std::vector<std::string>* spot_ids,
                           std::vector<std::string>* type_ids) {
    std::size_t lineno = 0;
    const auto head = header_fields(is, "composition", lineno);
    if (head.size() < 2) throw InputError("composition: header needs an id column and at least one type");
    const auto k = head.size() - 1;
    std::vector<std::string> ids;
    std::vector<double> values;
    std::string line;
    while (next_line(is, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != k + 1) throw InputError("composition line " + std::to_string(lineno) + ": wrong field count");
        ids.emplace_back(text::trim(f[0]));
        for (std::size_t c = 1; c <= k; ++c) values.push_back(parse_double(f[c], at("composition", lineno, c + 1)));
    }
    RowMatrix m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (std::size_t c = 0; c < k; ++c) m(i, static_cast<Eigen::Index>(c)) = values[static_cast<std::size_t>(i) * k + c];
    if (spot_ids) *spot_ids = std::move(ids);
    if (type_ids) type_ids->assign(head.begin() + 1, head.end());
    return m;
}

void write_labels(std::ostream& os, const std::vector<std::string>& spot_ids, const std::vector<int>& labels) {
    const auto ids = ids_or_index(spot_ids, static_cast<Eigen::Index>(labels.size()));
    os << "spot_id,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) os << ids[i] << ',' << labels[i] << '\n';
}

std::vector<int> read_labels(std::istream& is, std::vector<std::string>* spot_ids) {
    std::size_t lineno = 0;
    const auto head = header_fields(is, "labels", lineno);
    if (head.size() != 2) throw InputError("labels: expected header spot_id,label");
    std::vector<int> out;
    std::vector<std::string> ids;
    std::string line;
    while (next_line(is, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != 2) throw InputError("labels line " + std::to_string(lineno) + ": expected 2 fields");
        ids.emplace_back(text::trim(f[0]));
        out.push_back(static_cast<int>(text::parse_int(f[1], at("labels", lineno, 2))));
    }
    if (spot_ids) *spot_ids = std::move(ids);
    return out;
}

void write_size_factors(std::ostream& os, const std::vector<std::string>& spot_ids, const SizeFactors& s) {
    const auto ids = ids_or_index(spot_ids, s.size());
    os << "spot_id,s\n";
    for (Eigen::Index i = 0; i < s.size(); ++i) os << ids[static_cast<std::size_t>(i)] << ',' << format_double(s(i)) << '\n';
}

SizeFactors read_size_factors(std::istream& is, std::vector<std::string>* spot_ids) {
    std::size_t lineno = 0;
    const auto head = header_fields(is, "size factors", lineno);
    if (head.size() != 2) throw InputError("size factors: expected header spot_id,s");
    std::vector<double> vals;
    std::vector<std::string> ids;
    std::string line;
    while (next_line(is, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != 2) throw InputError("size factors line " + std::to_string(lineno) + ": expected 2 fields");
        ids.emplace_back(text::trim(f[0]));
        vals.push_back(parse_double(f[1], at("size factors", lineno, 2)));
    }
    if (spot_ids) *spot_ids = std::move(ids);
    return Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

void write_fit(const FitResult& fit, const fs::path& dir) {
    fs::create_directories(dir);
    const auto types = type_ids_or_default(fit.celltype_ids, fit.theta_hat.cols());
    {
        auto os = open_out(dir / "theta.csv");
        write_composition(os, fit.spot_ids, types, fit.theta_hat);
    }
    {
        auto os = open_out(dir / "s.csv");
        write_size_factors(os, fit.spot_ids, fit.s_hat);
    }
    {
        auto os = open_out(dir / "labels.csv");
        write_labels(os, fit.spot_ids, fit.clusters.labels);
    }
    {
        auto os = open_out(dir / "centroids.csv");
        std::vector<std::string> names;
        for (int c = 1; c <= fit.clusters.n_clusters(); ++c) names.push_back(std::to_string(c));
        std::ostringstream body;
        write_composition(body, names, types, fit.clusters.centroids);
        auto s = body.str();
        s.replace(0, std::string("spot_id").size(), "cluster");
        os << s;
    }
    nlohmann::ordered_json meta;
    meta["lambda"] = fit.lambda;
    meta["iterations"] = fit.iterations;
    meta["converged"] = fit.converged;
    meta["n_clusters"] = fit.clusters.n_clusters();
    meta["objective_trace"] = fit.objective_trace;
    auto os = open_out(dir / "meta.json");
    os << meta.dump(2) << '\n';
    if (!os) throw InputError("failed writing " + (dir / "meta.json").string());
}

FitResult read_fit(const fs::path& dir) {
    FitResult fit;
    {
        auto is = open_in(dir / "theta.csv");
        fit.theta_hat = read_composition(is, &fit.spot_ids, &fit.celltype_ids);
    }
    {
        auto is = open_in(dir / "s.csv");
        std::vector<std::string> ids;
        fit.s_hat = read_size_factors(is, &ids);
        if (ids != fit.spot_ids) throw InputError(dir.string() + ": s.csv spot ids differ from theta.csv");
    }
    {
        auto is = open_in(dir / "labels.csv");
        std::vector<std::string> ids;
        fit.clusters.labels = read_labels(is, &ids);
        if (ids != fit.spot_ids) throw InputError(dir.string() + ": labels.csv spot ids differ from theta.csv");
    }
    {
        auto is = open_in(dir / "centroids.csv");
        fit.clusters.centroids = read_composition(is);
    }
    auto is = open_in(dir / "meta.json");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(is);
        fit.lambda = meta.at("lambda").get<double>();
        fit.iterations = meta.at("iterations").get<int>();
        fit.converged = meta.at("converged").get<bool>();
        fit.objective_trace = meta.at("objective_trace").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError((dir / "meta.json").string() + ": " + e.what());
    }
    return fit;
}

void write_metric_rows(std::ostream& os, const std::vector<MetricRow>& rows, bool header) {
    if (header) os << "method,scenario,seed,ari,frob_sq,max_row\n";
    for (const auto& r : rows)
        os << r.method << ',' << r.scenario << ',' << r.seed << ',' << format_double(r.report.ari) << ','
           << format_double(r.report.frob_sq_error) << ',' << format_double(r.report.max_row_error) << '\n';
}

namespace {

constexpr const char* kClusterPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};
constexpr const char* kTypePalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                        "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string xml_escape(std::string_view in) {
    std::string out;
    for (char ch : in) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string cluster_colour(int c) {
    constexpr int base = static_cast<int>(std::size(kClusterPalette));
    if (c < base) return kClusterPalette[c];
    // golden-angle hues beyond the fixed palette
    const int hue = static_cast<int>(std::fmod(c * 137.508, 360.0));
    return "hsl(" + std::to_string(hue) + ",55%,55%)";
}

std::string type_colour(Eigen::Index k) {
    constexpr auto base = static_cast<Eigen::Index>(std::size(kTypePalette));
    if (k < base) return kTypePalette[k];
    const int hue = static_cast<int>(std::fmod(static_cast<double>(k) * 137.508 + 60.0, 360.0));
    return "hsl(" + std::to_string(hue) + ",45%,45%)";
}

void pie(std::ostream& os, double cx, double cy, double r, const Eigen::Ref<const Vector>& parts) {
    double start = 0.0;
    for (Eigen::Index k = 0; k < parts.size(); ++k) {
        const double frac = std::clamp(parts(k), 0.0, 1.0);
        if (frac <= 1e-6) continue;
        if (frac >= 1.0 - 1e-6) {
            os << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r) << "\" fill=\""
               << type_colour(k) << "\"/>\n";
            return;
        }
        const double a0 = 2.0 * std::numbers::pi * start - std::numbers::pi / 2.0;
        const double a1 = 2.0 * std::numbers::pi * (start + frac) - std::numbers::pi / 2.0;
        os << "<path d=\"M" << num(cx) << ',' << num(cy) << " L" << num(cx + r * std::cos(a0)) << ','
           << num(cy + r * std::sin(a0)) << " A" << num(r) << ',' << num(r) << " 0 " << (frac > 0.5 ? 1 : 0)
           << ",1 " << num(cx + r * std::cos(a1)) << ',' << num(cy + r * std::sin(a1)) << " Z\" fill=\""
           << type_colour(k) << "\"/>\n";
        start += frac;
    }
}

}  // namespace

void render_map(std::ostream& os, const FitResult& fit, const std::vector<Point2>& coords) {
    const auto n = coords.size();
    if (fit.clusters.labels.size() != n) throw std::invalid_argument("render_map: one coordinate per spot required");
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    double spacing = 1.0;
    if (n > 0) {
        xmin = xmax = coords[0].x;
        ymin = ymax = coords[0].y;
        for (const auto& p : coords) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                best = std::min(best, std::hypot(coords[i].x - coords[j].x, coords[i].y - coords[j].y));
        if (std::isfinite(best) && best > 0.0) spacing = best;
    }
    const double map_px = 600.0;
    const double span = std::max({xmax - xmin, ymax - ymin, spacing});
    const double scale = map_px / (span + spacing);
    const double cell = 0.9 * spacing * scale;
    const double margin = 20.0;
    const int c_count = fit.clusters.n_clusters();
    const double legend_x = margin + map_px + 40.0;
    const double row_h = 44.0;
    const double width = legend_x + 260.0;
    const double height = std::max(map_px + 2 * margin, margin + row_h * (c_count + 1) + 60.0);

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g id=\"spots\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double px = margin + (coords[i].x - xmin + spacing / 2) * scale - cell / 2;
        const double py = margin + (coords[i].y - ymin + spacing / 2) * scale - cell / 2;
        os << "<rect x=\"" << num(px) << "\" y=\"" << num(py) << "\" width=\"" << num(cell) << "\" height=\""
           << num(cell) << "\" fill=\"" << cluster_colour(fit.clusters.labels[i] - 1) << "\"/>\n";
    }
    os << "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"13\">\n";
    std::vector<int> sizes(static_cast<std::size_t>(c_count), 0);
    for (int l : fit.clusters.labels)
        if (l >= 1 && l <= c_count) ++sizes[static_cast<std::size_t>(l - 1)];
    for (int c = 0; c < c_count; ++c) {
        const double y = margin + row_h * c;
        os << "<rect x=\"" << num(legend_x) << "\" y=\"" << num(y + 8) << "\" width=\"18\" height=\"18\" fill=\""
           << cluster_colour(c) << "\"/>\n";
        pie(os, legend_x + 48, y + 17, 16, fit.clusters.centroids.row(c).transpose());
        os << "<text x=\"" << num(legend_x + 74) << "\" y=\"" << num(y + 22) << "\">cluster " << (c + 1) << " ("
           << sizes[static_cast<std::size_t>(c)] << " spots)</text>\n";
    }
    const auto types = type_ids_or_default(fit.celltype_ids, fit.theta_hat.cols());
    double ty = margin + row_h * c_count + 20;
    for (std::size_t k = 0; k < types.size(); ++k) {
        os << "<rect x=\"" << num(legend_x) << "\" y=\"" << num(ty) << "\" width=\"12\" height=\"12\" fill=\""
           << type_colour(static_cast<Eigen::Index>(k)) << "\"/>\n";
        os << "<text x=\"" << num(legend_x + 18) << "\" y=\"" << num(ty + 11) << "\">" << xml_escape(types[k]) << "</text>\n";
        ty += 18;
    }
    os << "</g>\n</svg>\n";
}

}  // namespace duet::io
