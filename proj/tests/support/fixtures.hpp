#pragma once

// Synthetic inputs with known ground truth for integration tests.

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "smartfilter/random.hpp"
#include "smartfilter/types.hpp"

namespace smartfilter::testing {

namespace fs = std::filesystem;

double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
double normal(Rng& rng);

std::vector<float> random_unit_vector(Rng& rng, std::size_t dim);

struct PlantSpec {
    std::size_t examples = 2000;
    std::size_t duplicates = 20;     // extra records repeating another record
    std::size_t anomalous = 100;     // subset "moral_scenarios", no predictions
    std::size_t easy = 600;
    std::size_t contaminated = 100;
    std::size_t clusters = 32;
    std::size_t cluster_size = 5;
    std::size_t models = 7;
    std::size_t dim = 64;
    /// Cosine distance between a cluster centre and each of its members.
    double star_distance = 0.004;
    std::uint64_t seed = 1;
};

struct Planted {
    PlantSpec spec;
    Dataset dataset;
    std::vector<PredictionSet> predictions;
    EmbeddingSet embeddings;
    RunConfig config;

    std::set<std::string> duplicates;  // non-kept members
    std::set<std::string> anomalous;
    std::set<std::string> easy;
    std::set<std::string> contaminated;
    std::set<std::string> clustered;
    std::vector<std::vector<std::string>> clusters;
};

/// Disjoint planted classes: every example is exactly one of duplicate,
/// anomalous, easy, contaminated, clustered or plain. Plain and clustered
/// examples always have one model below threshold in both modes.
Planted make_planted(const PlantSpec& spec);

/// dataset.jsonl, predictions/<model>_<mode>.jsonl, embeddings.emb1,
/// manifest.txt and config.json under `dir`.
void write_fixture(const Planted& planted, const fs::path& dir);

/// Fresh empty directory under the system temp dir.
fs::path scratch_dir(const std::string& name);

}  // namespace smartfilter::testing
