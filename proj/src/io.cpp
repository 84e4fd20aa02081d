#include "flag/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace flag {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(trim(f));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    std::istringstream in(s);
    double v = 0.0;
    in >> v;
    return !in.fail() && in.eof();
}

}  // namespace

BinaryDataset read_dataset_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t width = 0;
    int line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (first) {
            first = false;
            if (!std::all_of(fields.begin(), fields.end(), is_number)) {
                width = fields.size();
                continue;
            }
        }
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields, found " +
                             std::to_string(fields.size()));
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            if (fields[c] == "0")
                row[c] = 0.0;
            else if (fields[c] == "1")
                row[c] = 1.0;
            else
                throw InputError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) + ": '" + fields[c] +
                                 "' is not 0 or 1");
        }
        rows.push_back(std::move(row));
    }
    if (width == 0) throw InputError("dataset is empty");
    Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c) x(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return BinaryDataset(std::move(x));
}

BinaryDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset '" + path + "'");
    try {
        return read_dataset_csv(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_dataset_csv(std::ostream& os, const BinaryDataset& data) {
    const Matrix& x = data.responses();
    for (Index c = 0; c < x.cols(); ++c) os << (c ? "," : "") << "item" << c + 1;
    os << '\n';
    std::string row;
    for (Index r = 0; r < x.rows(); ++r) {
        row.clear();
        for (Index c = 0; c < x.cols(); ++c) {
            if (c) row += ',';
            row += x(r, c) != 0.0 ? '1' : '0';
        }
        os << row << '\n';
    }
}

void write_dataset_csv(const std::string& path, const BinaryDataset& data) {
    std::ostringstream os;
    write_dataset_csv(os, data);
    write_text_file(path, os.str());
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw InputError("matrix must be an array of rows");
    const auto n_rows = static_cast<Index>(j.size());
    const Index n_cols = n_rows == 0 ? 0 : static_cast<Index>(j[0].size());
    Matrix m(n_rows, n_cols);
    for (Index r = 0; r < n_rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != n_cols) throw InputError("matrix rows have unequal lengths");
        for (Index c = 0; c < n_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

nlohmann::json model_to_json(const ModelFile& model) {
    nlohmann::json j;
    j["n_items"] = model.l.rows();
    j["K_hat"] = model.k_hat;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [p, q] : model.edges) edges.push_back({p + 1, q + 1});
    j["edges"] = std::move(edges);
    j["L"] = matrix_to_json(model.l);
    j["S"] = matrix_to_json(model.s);
    j["A"] = matrix_to_json(model.a);
    j["provenance"] = model.provenance;
    return j;
}

ModelFile model_from_json(const nlohmann::json& j) {
    try {
        ModelFile m;
        m.l = matrix_from_json(j.at("L"));
        m.s = matrix_from_json(j.at("S"));
        if (j.contains("A")) m.a = matrix_from_json(j.at("A"));
        m.k_hat = j.value("K_hat", Index{0});
        if (j.contains("edges"))
            for (const auto& e : j.at("edges")) m.edges.emplace_back(e.at(0).get<Index>() - 1, e.at(1).get<Index>() - 1);
        if (j.contains("provenance")) m.provenance = j.at("provenance");
        if (m.l.rows() != m.s.rows() || m.l.cols() != m.s.cols()) throw InputError("L and S have different shapes");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    }
}

void write_model(const std::string& path, const ModelFile& model) {
    write_text_file(path, model_to_json(model).dump(2) + "\n");
}

ModelFile read_model(const std::string& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": not valid JSON (" + e.what() + ")");
    }
    return model_from_json(j);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("error while writing '" + path + "'");
}

void write_trace_csv(std::ostream& os, const std::vector<AdmmTraceRow>& trace) {
    os << "iteration,objective,primal,dual\n" << std::setprecision(12);
    for (const auto& r : trace)
        os << r.iteration << ',' << r.objective << ',' << r.primal_residual << ',' << r.dual_residual << '\n';
}

}  // namespace flag
