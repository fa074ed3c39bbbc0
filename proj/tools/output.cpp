#include "output.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace esk::cli {

void Table::add(std::vector<Cell> row)
{
    if (row.size() != columns.size()) throw std::logic_error("table row width does not match header");
    rows.push_back(std::move(row));
}

int digits_for_bits(int bits) { return static_cast<int>(std::ceil(bits * std::log10(2.0))); }

namespace {
std::string csv_cell(const Cell& c, int digits)
{
    if (auto p = std::get_if<long>(&c)) return std::to_string(*p);
    if (auto p = std::get_if<std::string>(&c)) return *p;
    return std::get<Real>(c).str(digits);
}

nlohmann::json json_cell(const Cell& c)
{
    if (auto p = std::get_if<long>(&c)) return *p;
    if (auto p = std::get_if<std::string>(&c)) return *p;
    // strings keep every bit; JSON doubles would not
    return std::get<Real>(c).exact_str();
}
} // namespace

void write_table(const Table& t, const OutputSpec& out, const nlohmann::json& meta)
{
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.path.empty() && out.path != "-") {
        file.open(out.path);
        if (!file) throw ArgumentError("cannot open output file " + out.path);
        os = &file;
    }
    if (out.format == Format::Csv) {
        *os << "# expsumkit-csv v1\n";
        for (std::size_t j = 0; j < t.columns.size(); ++j) *os << (j ? "," : "") << t.columns[j];
        *os << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t j = 0; j < row.size(); ++j) *os << (j ? "," : "") << csv_cell(row[j], out.digits);
            *os << "\n";
        }
    } else {
        nlohmann::json doc;
        doc["meta"] = meta;
        doc["meta"]["columns"] = t.columns;
        nlohmann::json data = nlohmann::json::array();
        for (const auto& row : t.rows) {
            nlohmann::json obj = nlohmann::json::object();
            for (std::size_t j = 0; j < row.size(); ++j) obj[t.columns[j]] = json_cell(row[j]);
            data.push_back(std::move(obj));
        }
        doc["data"] = std::move(data);
        *os << doc.dump(1) << "\n";
    }
    os->flush();
}

ExpSum load_expsum_json(const nlohmann::json& doc, int bits)
{
    PrecisionScope ps(bits);
    ExpSum es;
    for (const auto& row : doc.at("data")) {
        es.t.push_back(Real(row.at("t").get<std::string>()));
        es.c.push_back(Real(row.at("c").get<std::string>()));
    }
    return es;
}

} // namespace esk::cli
