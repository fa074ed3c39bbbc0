#pragma once

#include "expsumkit/expsum.hpp"

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace esk::cli {

enum class Format { Csv, Json };

using Cell = std::variant<long, std::string, Real>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

struct OutputSpec {
    Format format = Format::Csv;
    std::string path; // empty or "-" means stdout
    int digits = 17;  // significant digits for CSV reals
};

// ceil(bits log10 2)
int digits_for_bits(int bits);

void write_table(const Table& t, const OutputSpec& out, const nlohmann::json& meta);

// Reads t and c back from a JSON parameter file written by gauss-expsum or best-expsum.
ExpSum load_expsum_json(const nlohmann::json& doc, int bits);

} // namespace esk::cli
