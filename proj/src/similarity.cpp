#include "smartfilter/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <queue>

#include "smartfilter/error.hpp"
#include "smartfilter/parallel.hpp"
#include "smartfilter/random.hpp"

namespace smartfilter {

namespace detail {

double dot(std::span<const float> u, std::span<const float> v) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = u.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += static_cast<double>(u[i]) * v[i];
        s1 += static_cast<double>(u[i + 1]) * v[i + 1];
        s2 += static_cast<double>(u[i + 2]) * v[i + 2];
        s3 += static_cast<double>(u[i + 3]) * v[i + 3];
    }
    for (; i < n; ++i) s0 += static_cast<double>(u[i]) * v[i];
    return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

namespace {

double distance_from(double dot, double norm_u, double norm_v) {
    return std::clamp(1.0 - dot / (norm_u * norm_v), 0.0, 2.0);
}

double norm_of(std::span<const float> u) { return std::sqrt(detail::dot(u, u)); }

// Type-7 quantile of sorted data.
double quantile(std::span<const double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double cosine_distance(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size())
        throw Error("cosine_distance: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()) + ")");
    const double nu = norm_of(u), nv = norm_of(v);
    if (nu == 0.0 || nv == 0.0) throw Error("cosine_distance: zero-norm vector");
    return distance_from(detail::dot(u, v), nu, nv);
}

std::vector<NeighborPair> knn_pairs(const EmbeddingSet& embeddings, std::size_t k,
                                    unsigned threads) {
    if (k < 1) throw Error("knn_pairs: k must be at least 1");
    const std::size_t n = embeddings.size();
    if (n < 2) return {};

    // Work in id order so "smaller position" means "smaller id".
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        return embeddings.ids()[a] < embeddings.ids()[b];
    });
    std::vector<double> norms(n);
    for (std::size_t p = 0; p < n; ++p) norms[p] = norm_of(embeddings.row(rows[p]));

    const std::size_t keep = std::min(k, n - 1);
    using Candidate = std::pair<double, std::size_t>;  // (distance, position)
    std::vector<std::vector<Candidate>> neighbours(n);

    parallel_for(n, threads, [&](std::size_t p) {
        const auto u = embeddings.row(rows[p]);
        // Max-heap on (distance, position): the top is the worst kept candidate.
        std::priority_queue<Candidate> heap;
        for (std::size_t q = 0; q < n; ++q) {
            if (q == p) continue;
            Candidate c{distance_from(detail::dot(u, embeddings.row(rows[q])), norms[p], norms[q]), q};
            if (heap.size() < keep) {
                heap.push(c);
            } else if (c < heap.top()) {
                heap.pop();
                heap.push(c);
            }
        }
        auto& out = neighbours[p];
        out.reserve(heap.size());
        while (!heap.empty()) {
            out.push_back(heap.top());
            heap.pop();
        }
    });

    struct Edge {
        std::size_t a, b;
        double d;
    };
    std::vector<Edge> edges;
    edges.reserve(n * keep);
    for (std::size_t p = 0; p < n; ++p)
        for (const auto& [d, q] : neighbours[p]) edges.push_back({std::min(p, q), std::max(p, q), d});
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& x, const Edge& y) { return x.a == y.a && x.b == y.b; }),
                edges.end());

    std::vector<NeighborPair> pairs;
    pairs.reserve(edges.size());
    for (const auto& e : edges)
        pairs.push_back({embeddings.ids()[rows[e.a]], embeddings.ids()[rows[e.b]], e.d});
    return pairs;
}

double silverman_bandwidth(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw Error("KDE needs at least 2 samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : sorted) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);

    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) throw Error("KDE bandwidth is zero: all distance samples are equal");
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

std::optional<std::size_t> first_local_maximum(std::span<const double> density) {
    if (density.size() < 2) return std::nullopt;
    if (density[0] > density[1]) return 0;
    for (std::size_t i = 1; i + 1 < density.size(); ++i)
        if (density[i - 1] < density[i] && density[i] >= density[i + 1]) return i;
    return std::nullopt;
}

KdeResult kde_threshold(std::span<const double> distances, const BandwidthRule& rule,
                        std::size_t grid_points, unsigned threads) {
    if (distances.size() < 2) throw Error("KDE needs at least 2 samples");
    if (grid_points < 3) throw Error("KDE grid needs at least 3 points");

    std::vector<double> sorted(distances.begin(), distances.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front(), hi = sorted.back();
    if (!(hi > lo)) throw Error("KDE bandwidth is zero: all distance samples are equal");

    KdeResult r;
    r.sample_count = sorted.size();
    r.bandwidth = rule.fixed ? *rule.fixed : silverman_bandwidth(sorted);
    if (!(r.bandwidth > 0.0)) throw Error("KDE bandwidth must be positive");

    const double h = r.bandwidth;
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    // Contributions beyond 10 bandwidths are below 1e-21 of the peak.
    const double reach = 10.0 * h;

    r.grid.resize(grid_points);
    r.density.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i)
        r.grid[i] = i + 1 == grid_points ? hi : lo + static_cast<double>(i) * step;

    parallel_for(grid_points, threads, [&](std::size_t i) {
        const double x = r.grid[i];
        auto first = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
        auto last = std::upper_bound(first, sorted.end(), x + reach);
        double sum = 0.0;
        for (auto it = first; it != last; ++it) {
            const double z = (x - *it) / h;
            sum += std::exp(-0.5 * z * z);
        }
        r.density[i] = sum * norm;
    });

    if (auto peak = first_local_maximum(r.density)) {
        r.peak_index = *peak;
    } else {
        r.peak_index = static_cast<std::size_t>(
            std::max_element(r.density.begin(), r.density.end()) - r.density.begin());
        r.fallback = true;
        r.warning = "distance density has no local maximum; using the global maximum as delta";
    }
    r.delta = r.grid[r.peak_index];
    return r;
}

DisjointSets::DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
}

std::vector<SimilarityCluster> build_clusters(std::span<const NeighborPair> pairs, double delta) {
    std::vector<std::string> nodes;
    for (const auto& p : pairs) {
        if (!(p.distance < delta)) continue;
        nodes.push_back(p.id_a);
        nodes.push_back(p.id_b);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    auto index_of = [&](const std::string& id) {
        return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), id) - nodes.begin());
    };

    DisjointSets sets(nodes.size());
    for (const auto& p : pairs)
        if (p.distance < delta) sets.unite(index_of(p.id_a), index_of(p.id_b));

    // Nodes are sorted, so the first node seen of each root is its smallest id.
    std::map<std::size_t, std::size_t> root_to_cluster;
    std::vector<SimilarityCluster> clusters;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto root = sets.find(i);
        auto [it, inserted] = root_to_cluster.emplace(root, clusters.size());
        if (inserted) {
            SimilarityCluster c;
            c.cluster_id = static_cast<std::int64_t>(clusters.size());
            clusters.push_back(std::move(c));
        }
        clusters[it->second].member_ids.push_back(nodes[i]);
    }
    return clusters;
}

std::vector<SimilarityCluster> sample_cluster_removals(std::vector<SimilarityCluster> clusters,
                                                       std::uint64_t seed) {
    std::sort(clusters.begin(), clusters.end(),
              [](const SimilarityCluster& a, const SimilarityCluster& b) {
                  return a.cluster_id < b.cluster_id;
              });
    auto rng = Rng::stream(seed, "similarity");
    for (auto& c : clusters) {
        std::vector<std::string> order = c.member_ids;
        std::sort(order.begin(), order.end());
        rng.shuffle(std::span<std::string>(order));
        order.resize(order.size() / 2);
        std::sort(order.begin(), order.end());
        c.removed_ids = std::move(order);
    }
    return clusters;
}

}  // namespace smartfilter
