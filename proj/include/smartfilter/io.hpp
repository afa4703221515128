#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "smartfilter/types.hpp"

namespace smartfilter {

namespace fs = std::filesystem;

// Dataset: one JSON object per line with keys
//   id, question, options, answer_index, subset (string or null).
Dataset load_dataset(const fs::path& path);
void write_dataset(const Dataset& dataset, const fs::path& path);
void write_examples(const std::vector<Example>& examples, const fs::path& path);

// Predictions: header line {"model": ..., "mode": "full"|"choices_only"},
// then {"example_id": ..., "probs": [...]} per line.
PredictionSet load_predictions(const fs::path& path);
void write_predictions(const PredictionSet& set, const fs::path& path);

/// Every *.jsonl file in `dir`, in filename order. Rejects two files that
/// declare the same (model, mode).
std::vector<PredictionSet> load_prediction_dir(const fs::path& dir);

// Embeddings: EMB1 binary ("SMEB1\n", u32le count, u32le dim, count*dim
// f32le row-major) or one JSON float array per line. Row i is bound to
// line i of the manifest.
inline constexpr char kEmb1Magic[] = "SMEB1\n";

EmbeddingSet load_embeddings(const fs::path& path, const fs::path& manifest_path);
void write_embeddings(const EmbeddingSet& embeddings, const fs::path& path,
                      const fs::path& manifest_path);

/// "model,elo" per line; a non-numeric first row is treated as a header.
EloTable load_elo(const fs::path& path);

/// JSON document; absent keys keep their RunConfig defaults.
RunConfig load_config(const fs::path& path);

void write_ledger(const Ledger& ledger, const fs::path& path);
Ledger load_ledger(const fs::path& path);

/// Writes `text` exactly, replacing any existing file.
void write_text_file(const fs::path& path, const std::string& text);
std::string read_text_file(const fs::path& path);

}  // namespace smartfilter
