#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace cpt::cli {

enum class Format { Csv, Json, Text };

/// Shortest decimal that reads back to the same double; "nan"/"inf" for non-finite.
std::string formatNumber(double v);

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Header {
  std::string generated_by;            // "cpt <version>: <flags>"
  std::vector<std::string> notes;      // extra "# key: value" lines
};

nlohmann::ordered_json cellToJson(const Cell& c);

/// CSV with comment header, or {"generated_by", notes..., "rows": [...]} in JSON.
void writeTable(std::ostream& out, const Table& t, Format f, const Header& h);

/// A single record: CSV header plus one row, or a flat JSON object.
void writeRecord(std::ostream& out, const Table& t, Format f, const Header& h);

}  // namespace cpt::cli
