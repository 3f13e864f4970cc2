#include "qmem/io.hpp"
#include "qmem/random.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace qmem {

using nlohmann::json;

std::complex<double> parse_complex(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError("expected a number or an [re, im] pair, got " + j.dump());
}

MatrixXc parse_complex_matrix(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
        throw ConfigError("matrix must be a nonempty array of rows");
    }
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    MatrixXc m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw ConfigError("matrix rows have unequal length");
        for (Index c = 0; c < cols; ++c) m(r, c) = parse_complex(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

VectorXc parse_complex_vector(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("vector must be a nonempty array");
    VectorXc v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = parse_complex(j[i]);
    return v;
}

json complex_matrix_to_json(const MatrixXc& m) {
    json out = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<MatrixXc> parse_kraus(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("Kraus list must be a nonempty array of matrices");
    std::vector<MatrixXc> out;
    for (const auto& k : j) out.push_back(parse_complex_matrix(k));
    return out;
}

std::vector<MatrixXc> load_kraus_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open Kraus file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("Kraus file " + path.string() + ": " + e.what());
    }
    return parse_kraus(j);
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field '") + key + "' has the wrong type");
    }
}

const json& require(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    return j.at(key);
}

// Columns given as a list of vectors.
MatrixXc parse_columns(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("subspace basis must be a nonempty list of column vectors");
    std::vector<VectorXc> cols;
    for (const auto& c : j) cols.push_back(parse_complex_vector(c));
    MatrixXc m(cols[0].size(), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i].size() != m.rows()) throw ConfigError("subspace basis columns have unequal length");
        m.col(static_cast<Index>(i)) = cols[i];
    }
    return m;
}

MatrixXc random_block(const json& r, const char* dim_key, std::uint64_t tag) {
    const auto d = get_or<long long>(r, dim_key, 0);
    if (d < 1) throw ConfigError(std::string("random.") + dim_key + " must be positive");
    Rng rng = make_rng(get_or<std::uint64_t>(r, "seed", 1), tag);
    return random_hermitian(static_cast<Index>(d), rng);
}

} // namespace

HamiltonianSpec parse_hamiltonian(const json& j) {
    if (!j.is_object()) throw ConfigError("hamiltonian must be an object");
    const std::string kind = get_or<std::string>(j, "kind", "");
    HamiltonianSpec spec;
    if (kind == "matrix") {
        const auto dims = get_or<std::vector<long long>>(j, "dims", {});
        if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1) throw ConfigError("hamiltonian.dims must be [d_S, d_E]");
        if (j.contains("random")) {
            const json& r = j.at("random");
            Rng rng = make_rng(get_or<std::uint64_t>(r, "seed", 1), 0);
            spec.kind = random_hermitian(static_cast<Index>(dims[0] * dims[1]), rng);
        } else {
            spec.kind = parse_complex_matrix(require(j, "matrix"));
        }
        spec.layout = SubsystemLayout{{"S", static_cast<Index>(dims[0])}, {"E", static_cast<Index>(dims[1])}};
    } else if (kind == "spin_chain") {
        SpinChain c;
        const std::string model = get_or<std::string>(j, "model", "ising");
        if (model == "ising") c.model = SpinChain::Model::ising;
        else if (model == "heisenberg") c.model = SpinChain::Model::heisenberg;
        else throw ConfigError("hamiltonian.model must be ising or heisenberg");
        c.n_sites = get_or<int>(j, "sites", 2);
        c.j = get_or<double>(j, "j", 1.0);
        c.bond_couplings = get_or<std::vector<double>>(j, "couplings", {});
        c.hx = get_or<double>(j, "hx", 0.0);
        c.hz = get_or<double>(j, "hz", 0.0);
        c.system_sites = get_or<std::vector<int>>(j, "system_sites", {});
        c.boundary_scale = get_or<double>(j, "boundary_scale", 1.0);
        spec.kind = std::move(c);
    } else if (kind == "coupled_product") {
        CoupledProduct cp;
        if (j.contains("random")) {
            const json& r = j.at("random");
            cp.h_s = random_block(r, "d_s", 0);
            cp.h_e = random_block(r, "d_e", 1);
            const Index d = cp.h_s.rows() * cp.h_e.rows();
            Rng rng = make_rng(get_or<std::uint64_t>(r, "seed", 1), 2);
            cp.h_int = random_hermitian(d, rng);
        } else {
            cp.h_s = parse_complex_matrix(require(j, "h_s"));
            cp.h_e = parse_complex_matrix(require(j, "h_e"));
            cp.h_int = parse_complex_matrix(require(j, "h_int"));
        }
        cp.g = get_or<double>(j, "g", 0.0);
        spec.kind = std::move(cp);
    } else {
        throw ConfigError("hamiltonian.kind must be matrix, spin_chain or coupled_product");
    }
    if (j.contains("omega_s")) spec.omega_s = parse_columns(j.at("omega_s"));
    if (j.contains("omega_e")) spec.omega_e = parse_columns(j.at("omega_e"));
    if (j.contains("psi_e")) spec.psi_e = parse_complex_vector(j.at("psi_e"));
    if (j.contains("phi_s")) spec.phi_s = parse_complex_vector(j.at("phi_s"));
    return normalized(std::move(spec));
}

std::vector<double> parse_times(const json& j) {
    std::vector<double> t;
    if (j.is_array()) {
        for (const auto& x : j) {
            if (!x.is_number()) throw ConfigError("times must be numbers");
            t.push_back(x.get<double>());
        }
    } else if (j.is_object()) {
        const double start = get_or<double>(j, "start", 0.0);
        const double stop = get_or<double>(j, "stop", 0.0);
        const auto count = get_or<long long>(j, "count", 0);
        if (count < 1) throw ConfigError("times.count must be positive");
        for (long long i = 0; i < count; ++i) {
            t.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
        }
    } else {
        throw ConfigError("times must be a list or {start, stop, count}");
    }
    if (t.empty()) throw ConfigError("times is empty");
    for (double x : t)
        if (!std::isfinite(x)) throw ConfigError("times must be finite");
    return t;
}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::invalid_argument("Table::add_row: wrong number of cells");
    rows.push_back(std::move(row));
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

} // namespace

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += quote(table.columns[i]);
    }
    out += "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += quote(cell_text(row[i]));
        }
        out += "\r\n";
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                field += ch;
            }
            continue;
        }
        if (ch == '"') {
            quoted = any = true;
        } else if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (ch == '\r' || ch == '\n') {
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += ch;
            any = true;
        }
    }
    if (quoted) throw ConfigError("parse_csv: unterminated quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::ordered_json json_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

nlohmann::ordered_json to_json(const Table& table) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            if (const auto* d = std::get_if<double>(&c)) obj[table.columns[i]] = json_number(*d);
            else if (const auto* n = std::get_if<long long>(&c)) obj[table.columns[i]] = *n;
            else obj[table.columns[i]] = std::get<std::string>(c);
        }
        out.push_back(std::move(obj));
    }
    return out;
}

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ConfigError("output format must be csv or json");
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

void emit(const Table& table, Format format, const std::filesystem::path& path) {
    if (table.rows.empty()) throw std::invalid_argument("emit: table is empty");
    if (format == Format::csv) write_atomic(path, to_csv(table));
    else write_atomic(path, to_json(table).dump(2) + "\n");
}

} // namespace qmem
