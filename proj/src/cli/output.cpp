#include "output.hpp"

#include <charconv>
#include <cmath>

namespace cpt::cli {

std::string formatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v + 0.0);  // no "-0"
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

namespace {

std::string cellToCsv(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double v) const { return formatNumber(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
  };
  return std::visit(Visitor{}, c);
}

void writeCsvHeader(std::ostream& out, const Table& t, const Header& h) {
  out << "# generated-by " << h.generated_by << "\n";
  for (const auto& n : h.notes) out << "# " << n << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n";
}

void writeCsvRow(std::ostream& out, const std::vector<Cell>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cellToCsv(row[i]);
  out << "\n";
}

nlohmann::ordered_json rowObject(const Table& t, const std::vector<Cell>& row) {
  nlohmann::ordered_json o = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < t.columns.size() && i < row.size(); ++i)
    o[t.columns[i]] = cellToJson(row[i]);
  return o;
}

nlohmann::ordered_json notesObject(const Header& h) {
  nlohmann::ordered_json o = nlohmann::ordered_json::object();
  o["generated_by"] = h.generated_by;
  for (const auto& n : h.notes) {
    const auto colon = n.find(": ");
    if (colon == std::string::npos) continue;
    o[n.substr(0, colon)] = n.substr(colon + 2);
  }
  return o;
}

}  // namespace

nlohmann::ordered_json cellToJson(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return nullptr;
      return v + 0.0;
    }
    nlohmann::ordered_json operator()(long long v) const { return v; }
    nlohmann::ordered_json operator()(bool v) const { return v; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

void writeTable(std::ostream& out, const Table& t, Format f, const Header& h) {
  if (f == Format::Json) {
    nlohmann::ordered_json doc = notesObject(h);
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) doc["rows"].push_back(rowObject(t, r));
    out << doc.dump(2) << "\n";
    return;
  }
  writeCsvHeader(out, t, h);
  for (const auto& r : t.rows) writeCsvRow(out, r);
}

void writeRecord(std::ostream& out, const Table& t, Format f, const Header& h) {
  if (f == Format::Json) {
    nlohmann::ordered_json doc = notesObject(h);
    if (!t.rows.empty()) {
      const nlohmann::ordered_json row = rowObject(t, t.rows.front());
      for (const auto& [k, v] : row.items()) doc[k] = v;
    }
    out << doc.dump(2) << "\n";
    return;
  }
  writeCsvHeader(out, t, h);
  if (!t.rows.empty()) writeCsvRow(out, t.rows.front());
}

}  // namespace cpt::cli
