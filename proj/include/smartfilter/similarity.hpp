#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smartfilter/types.hpp"

namespace smartfilter {

/// 1 - cos(u, v), clamped to [0, 2]. Throws Error on a dimension mismatch
/// or a zero-norm argument.
double cosine_distance(std::span<const float> u, std::span<const float> v);

namespace detail {
/// Dot product accumulated in double with a fixed summation order, so
/// dot(u, v) and dot(v, u) are bit-identical.
double dot(std::span<const float> u, std::span<const float> v);
}  // namespace detail

struct NeighborPair {
    std::string id_a;  // id_a < id_b
    std::string id_b;
    double distance = 0.0;

    bool operator==(const NeighborPair&) const = default;
};

/// Exact k-nearest neighbours of every row by cosine distance, merged into
/// unordered pairs sorted by (id_a, id_b). Ties at the k-th distance go to
/// the lexicographically smaller neighbour id.
std::vector<NeighborPair> knn_pairs(const EmbeddingSet& embeddings, std::size_t k,
                                    unsigned threads = 1);

struct KdeResult {
    double delta = 0.0;
    double bandwidth = 0.0;
    std::size_t peak_index = 0;
    std::vector<double> grid;
    std::vector<double> density;
    /// No local maximum was found; delta is the global maximum instead.
    bool fallback = false;
    std::optional<std::string> warning;
    std::size_t sample_count = 0;
};

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5). When the IQR is zero the standard
/// deviation is used alone; throws Error if that is zero too.
double silverman_bandwidth(std::span<const double> samples);

/// Index of the first local maximum: i = 0 when density[0] > density[1],
/// otherwise the first interior i with density[i-1] < density[i] >= density[i+1].
std::optional<std::size_t> first_local_maximum(std::span<const double> density);

/// Gaussian KDE of `distances` on `grid_points` evenly spaced points over
/// [min, max]; delta is the abscissa of the first local maximum.
KdeResult kde_threshold(std::span<const double> distances, const BandwidthRule& rule,
                        std::size_t grid_points, unsigned threads = 1);

struct SimilarityCluster {
    std::int64_t cluster_id = 0;
    std::vector<std::string> member_ids;   // sorted
    std::vector<std::string> removed_ids;  // sorted subset of member_ids

    bool operator==(const SimilarityCluster&) const = default;
};

/// Connected components over pairs with distance < delta. Cluster ids
/// follow the order of each cluster's smallest member id.
std::vector<SimilarityCluster> build_clusters(std::span<const NeighborPair> pairs, double delta);

/// Removes floor(n/2) members per cluster: the first ones of a seeded
/// shuffle of the sorted member ids.
std::vector<SimilarityCluster> sample_cluster_removals(std::vector<SimilarityCluster> clusters,
                                                       std::uint64_t seed);

/// Union-find with path halving and union by size.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n);

    std::size_t find(std::size_t x);
    bool unite(std::size_t a, std::size_t b);
    std::size_t size_of(std::size_t x) { return size_[find(x)]; }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

}  // namespace smartfilter
