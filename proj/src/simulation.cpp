#include "duet/simulation.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include "duet/parallel.hpp"
#include "duet/random.hpp"

namespace duet::sim {

namespace {

// Marker-gene reference: genes 0-59 are twelve markers per type, 60-65 are
// broadly expressed. Per-cell means on a raw-count scale.
constexpr double kReference[66][5] = {
    {1.722, 0.104, 0.181, 0.054, 0.133},
    {4.782, 0.066, 0.232, 0.154, 0.278},
    {2.771, 0.109, 0.172, 0.283, 0.169},
    {4.286, 0.150, 0.430, 0.221, 0.231},
    {5.490, 0.218, 0.385, 0.158, 0.074},
    {2.694, 0.083, 0.431, 0.121, 0.054},
    {1.789, 0.131, 0.100, 0.111, 0.233},
    {1.345, 0.256, 0.376, 0.217, 0.201},
    {2.673, 0.099, 0.124, 0.157, 0.138},
    {1.679, 0.301, 0.914, 0.055, 0.100},
    {3.740, 0.100, 0.050, 0.110, 0.137},
    {1.512, 0.110, 0.173, 0.085, 0.162},
    {0.158, 3.982, 0.142, 0.182, 0.262},
    {0.229, 1.601, 0.071, 0.137, 0.144},
    {0.116, 3.638, 0.061, 0.111, 0.208},
    {0.189, 1.744, 0.038, 0.239, 0.589},
    {0.373, 2.162, 0.104, 0.084, 0.188},
    {0.230, 5.824, 0.101, 0.106, 0.148},
    {0.102, 3.802, 0.157, 0.079, 0.195},
    {0.263, 1.138, 0.165, 0.096, 0.119},
    {0.110, 3.283, 0.198, 0.096, 0.370},
    {0.164, 6.741, 0.055, 0.093, 0.119},
    {0.248, 10.855, 0.066, 0.109, 0.226},
    {0.127, 2.738, 0.203, 0.263, 0.101},
    {0.643, 0.062, 5.762, 0.054, 0.092},
    {0.157, 0.031, 3.121, 0.218, 0.143},
    {0.069, 0.212, 2.471, 0.084, 0.194},
    {0.099, 0.315, 4.064, 0.297, 0.067},
    {0.182, 0.055, 6.980, 0.184, 0.181},
    {0.219, 0.058, 0.947, 0.080, 0.055},
    {0.094, 0.155, 3.244, 0.073, 0.254},
    {0.204, 0.061, 3.516, 0.346, 0.196},
    {0.378, 0.164, 6.489, 0.114, 0.328},
    {0.201, 0.060, 3.826, 0.126, 0.093},
    {0.244, 0.136, 2.380, 0.280, 0.098},
    {0.073, 0.165, 3.353, 0.133, 0.165},
    {0.153, 0.209, 0.106, 1.616, 0.052},
    {0.330, 0.078, 0.155, 2.164, 0.094},
    {0.255, 0.391, 0.088, 1.507, 0.117},
    {0.368, 0.117, 0.499, 4.506, 0.150},
    {0.264, 0.081, 0.235, 1.691, 0.214},
    {0.093, 0.137, 0.122, 2.588, 0.131},
    {0.047, 0.222, 0.150, 3.643, 0.105},
    {0.392, 0.139, 0.077, 8.250, 0.354},
    {0.317, 0.093, 0.125, 1.886, 0.163},
    {0.080, 0.255, 0.071, 3.420, 0.196},
    {0.156, 0.226, 0.032, 2.884, 0.232},
    {0.251, 0.156, 0.059, 2.346, 0.141},
    {0.479, 0.147, 0.097, 0.120, 2.763},
    {0.156, 0.096, 0.092, 0.603, 2.857},
    {0.267, 0.089, 0.203, 0.217, 2.277},
    {0.180, 0.127, 0.470, 0.231, 1.872},
    {0.179, 0.231, 0.316, 0.160, 2.107},
    {0.238, 0.088, 0.118, 0.167, 4.924},
    {0.129, 0.087, 0.069, 0.097, 4.163},
    {0.118, 0.072, 0.170, 0.261, 4.154},
    {0.156, 0.089, 0.188, 0.326, 8.276},
    {0.106, 0.110, 0.100, 0.135, 1.198},
    {0.073, 0.210, 0.082, 0.215, 3.375},
    {0.100, 0.576, 0.182, 0.127, 2.080},
    {1.784, 1.333, 0.784, 0.794, 0.836},
    {0.784, 1.130, 0.924, 1.683, 1.069},
    {1.189, 1.284, 1.179, 2.488, 2.221},
    {1.279, 0.674, 1.166, 1.216, 0.946},
    {1.305, 1.781, 0.771, 2.182, 0.659},
    {1.015, 1.984, 1.289, 1.946, 1.714},
};

constexpr double kDagger5[3][5][5] = {
    {{0.05, 0.05, 0.05, 0.00, 0.85},
     {0.05, 0.05, 0.00, 0.85, 0.05},
     {0.05, 0.00, 0.85, 0.05, 0.05},
     {0.00, 0.85, 0.05, 0.05, 0.05},
     {0.85, 0.05, 0.05, 0.05, 0.00}},
    {{0.8, 0.1, 0.1, 0.0, 0.0},
     {0.1, 0.6, 0.3, 0.0, 0.0},
     {0.2, 0.2, 0.3, 0.2, 0.1},
     {0.0, 0.0, 0.1, 0.1, 0.8},
     {0.2, 0.4, 0.0, 0.1, 0.3}},
    {{0.70, 0.15, 0.10, 0.03, 0.02},
     {0.20, 0.40, 0.10, 0.10, 0.20},
     {0.02, 0.08, 0.85, 0.03, 0.02},
     {0.10, 0.25, 0.25, 0.30, 0.10},
     {0.15, 0.05, 0.30, 0.20, 0.30}},
};

// Rows appended for C = 7 (first two) and C = 10 (all five).
constexpr double kDaggerExtra[3][5][5] = {
    {{0.45, 0.45, 0.05, 0.05, 0.00},
     {0.00, 0.05, 0.05, 0.45, 0.45},
     {0.00, 0.45, 0.45, 0.05, 0.05},
     {0.05, 0.00, 0.45, 0.45, 0.05},
     {0.45, 0.05, 0.05, 0.00, 0.45}},
    {{0.3, 0.3, 0.2, 0.1, 0.1},
     {0.1, 0.1, 0.2, 0.3, 0.3},
     {0.5, 0.0, 0.2, 0.3, 0.0},
     {0.0, 0.3, 0.0, 0.2, 0.5},
     {0.3, 0.0, 0.4, 0.0, 0.3}},
    {{0.30, 0.20, 0.20, 0.15, 0.15},
     {0.15, 0.15, 0.20, 0.20, 0.30},
     {0.40, 0.10, 0.30, 0.10, 0.10},
     {0.10, 0.30, 0.10, 0.40, 0.10},
     {0.25, 0.25, 0.15, 0.15, 0.20}},
};

void check_keys(int n_clusters, int smoothness) {
    if (n_clusters != 5 && n_clusters != 7 && n_clusters != 10)
        throw std::invalid_argument("simulation: n_clusters must be 5, 7 or 10");
    if (smoothness < 1 || smoothness > 3) throw std::invalid_argument("simulation: smoothness must be 1, 2 or 3");
}

}  // namespace

RowMatrix theta_dagger(int n_clusters, int smoothness) {
    check_keys(n_clusters, smoothness);
    const int m = smoothness - 1;
    RowMatrix out(n_clusters, 5);
    for (int r = 0; r < n_clusters; ++r)
        for (int k = 0; k < 5; ++k) out(r, k) = r < 5 ? kDagger5[m][r][k] : kDaggerExtra[m][r - 5][k];
    return out;
}

std::vector<int> make_partition(int grid_side, int n_clusters) {
    check_keys(n_clusters, 1);
    if (grid_side < n_clusters) throw std::invalid_argument("make_partition: grid_side < n_clusters");
    const int side = grid_side;
    std::vector<int> labels(static_cast<std::size_t>(side * side));
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            int label = 0;
            if (n_clusters == 5) {
                // Central square surrounded by four L-shaped quadrant regions.
                const int lo = side / 4, hi = side - side / 4;
                if (r >= lo && r < hi && c >= lo && c < hi)
                    label = 1;
                else
                    label = 2 + (r >= side / 2 ? 2 : 0) + (c >= side / 2 ? 1 : 0);
            } else if (n_clusters == 7) {
                // Three horizontal bands cut into 2, 3 and 2 blocks.
                const int band = r * 3 / side;
                if (band == 1)
                    label = 3 + c * 3 / side;
                else
                    label = (band == 0 ? 1 : 6) + c * 2 / side;
            } else {
                // Two rows of five blocks.
                label = 1 + (r * 2 / side) * 5 + c * 5 / side;
            }
            labels[static_cast<std::size_t>(r * side + c)] = label;
        }
    return labels;
}

std::vector<Point2> grid_coords(int grid_side) {
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(grid_side * grid_side));
    for (int r = 0; r < grid_side; ++r)
        for (int c = 0; c < grid_side; ++c) pts.push_back({static_cast<double>(c), static_cast<double>(r)});
    return pts;
}

ReferenceMatrix default_reference() {
    ReferenceMatrix ref;
    ref.values.resize(66, 5);
    for (int g = 0; g < 66; ++g) {
        for (int k = 0; k < 5; ++k) ref.values(g, k) = kReference[g][k];
        ref.gene_ids.push_back("gene" + std::to_string(g + 1));
    }
    ref.celltype_ids = {"type1", "type2", "type3", "type4", "type5"};
    return ref;
}

GroundTruth gen_ground_truth(const SimulationScenario& sc) {
    check_keys(sc.n_clusters, sc.smoothness);
    if (sc.size_factor_max < 1) throw std::invalid_argument("simulation: size_factor_max must be >= 1");
    const auto dagger = theta_dagger(sc.n_clusters, sc.smoothness);
    const auto part = make_partition(sc.grid_side, sc.n_clusters);
    const auto n = static_cast<Eigen::Index>(part.size());
    const auto k = dagger.cols();

    GroundTruth t;
    t.grid_side = sc.grid_side;
    t.seed = sc.seed;
    t.theta_star.resize(n, k);
    t.v_star.resize(n, k);
    t.s_star.resize(n);
    t.labels.labels = part;
    t.labels.centroids = dagger;

    parallel_for(n, [&](Eigen::Index i) {
        const auto idx = static_cast<std::uint64_t>(i);
        const auto c = part[static_cast<std::size_t>(i)] - 1;
        t.theta_star.row(i) = dagger.row(c);

        auto eng_s = entry_engine(sc.seed, kStreamSizeFactor, idx);
        const int s = std::uniform_int_distribution<int>(1, sc.size_factor_max)(eng_s);
        t.s_star(i) = s;

        // Multinomial via sequential conditional binomials.
        auto eng_u = entry_engine(sc.seed, kStreamMultinomial, idx);
        Eigen::Index last = k - 1;
        while (last > 0 && dagger(c, last) == 0.0) --last;
        int remaining = s;
        double mass = 1.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double p = dagger(c, j);
            int draw = 0;
            if (j == last) {
                draw = remaining;
            } else if (remaining > 0 && p > 0.0) {
                const double q = std::min(1.0, p / mass);
                draw = std::binomial_distribution<int>(remaining, q)(eng_u);
            }
            t.v_star(i, j) = static_cast<double>(draw) / s;
            remaining -= draw;
            mass -= p;
        }
    });
    return t;
}

ExpressionMatrix gen_counts(const GroundTruth& truth, const ReferenceMatrix& ref) {
    const auto n = truth.v_star.rows();
    if (ref.n_types() != truth.v_star.cols()) throw std::invalid_argument("gen_counts: type count mismatch");
    const auto g_count = ref.n_genes();
    ExpressionMatrix x;
    x.counts.resize(g_count, n);
    x.gene_ids = ref.gene_ids;
    x.coords = grid_coords(truth.grid_side);
    if (static_cast<Eigen::Index>(x.coords.size()) != n)
        throw std::invalid_argument("gen_counts: grid does not match spot count");
    for (Eigen::Index i = 0; i < n; ++i) x.spot_ids.push_back("s" + std::to_string(i));

    parallel_for(n, [&](Eigen::Index i) {
        const Vector mean = truth.s_star(i) * (ref.values * truth.v_star.row(i).transpose());
        for (Eigen::Index g = 0; g < g_count; ++g) {
            auto eng = entry_engine(truth.seed, kStreamCounts, static_cast<std::uint64_t>(g),
                                    static_cast<std::uint64_t>(i));
            x.counts(g, i) = mean(g) > 0.0
                                 ? static_cast<double>(std::poisson_distribution<long long>(mean(g))(eng))
                                 : 0.0;
        }
    });
    return x;
}

}  // namespace duet::sim
