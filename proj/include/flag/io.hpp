#pragma once

#include "flag/admm.hpp"
#include "flag/types.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace flag {

/// One subject per line, J comma-separated 0/1 fields. A first row that is
/// not numeric is taken as a header and skipped.
BinaryDataset read_dataset_csv(std::istream& in);
BinaryDataset read_dataset_csv(const std::string& path);

/// Writes a header item1..itemJ and one 0/1 row per subject.
void write_dataset_csv(std::ostream& os, const BinaryDataset& data);
void write_dataset_csv(const std::string& path, const BinaryDataset& data);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// Fitted model document. Edge lists use 1-based item indices.
struct ModelFile {
    Matrix l;
    Matrix s;
    Matrix a;
    Index k_hat = 0;
    EdgeList edges;
    nlohmann::json provenance = nlohmann::json::object();
};

nlohmann::json model_to_json(const ModelFile& model);
ModelFile model_from_json(const nlohmann::json& j);
void write_model(const std::string& path, const ModelFile& model);
ModelFile read_model(const std::string& path);

/// Reads a whole file; throws InputError if it cannot be opened.
std::string read_text_file(const std::string& path);
/// Writes a whole file; throws std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& text);

/// CSV: iteration,objective,primal,dual.
void write_trace_csv(std::ostream& os, const std::vector<AdmmTraceRow>& trace);

}  // namespace flag
