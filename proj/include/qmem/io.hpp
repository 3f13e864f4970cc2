#pragma once

#include "qmem/channels.hpp"
#include "qmem/dynamics.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qmem {

// Bad configuration or input file content.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Filesystem failure while writing results.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Complex entries are [re, im] pairs or plain real numbers; matrices are
// row-major arrays of rows.
std::complex<double> parse_complex(const nlohmann::json& j);
MatrixXc parse_complex_matrix(const nlohmann::json& j);
VectorXc parse_complex_vector(const nlohmann::json& j);
nlohmann::json complex_matrix_to_json(const MatrixXc& m);

// JSON array of Kraus operators.
std::vector<MatrixXc> parse_kraus(const nlohmann::json& j);
std::vector<MatrixXc> load_kraus_file(const std::filesystem::path& path);

HamiltonianSpec parse_hamiltonian(const nlohmann::json& j);

// Either an explicit list or {"start", "stop", "count"} (inclusive grid).
std::vector<double> parse_times(const nlohmann::json& j);

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

// 17 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double x);

std::string to_csv(const Table& table);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// Array of objects with keys in column order.
nlohmann::ordered_json to_json(const Table& table);
// Non-finite doubles become null.
nlohmann::ordered_json json_number(double x);

enum class Format { csv, json };
Format parse_format(const std::string& s);

// Writes to a temporary file in the same directory and renames it over path.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void emit(const Table& table, Format format, const std::filesystem::path& path);

} // namespace qmem
