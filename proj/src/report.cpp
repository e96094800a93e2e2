#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "latticeborell/error.hpp"
#include "latticeborell/harness.hpp"

namespace latticeborell {

namespace {

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.12g}", v);
}

void write_json(std::string& out, const Row& j) {
  switch (j.type()) {
    case Row::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Row(key).dump();
        out += ':';
        write_json(out, value);
      }
      out += '}';
      break;
    }
    case Row::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write_json(out, j[i]);
      }
      out += ']';
      break;
    }
    case Row::value_t::number_float:
      out += format_number(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

std::string csv_cell(const Row& j) {
  if (j.is_null()) return "";
  if (j.is_number_float()) {
    const double v = j.get<double>();
    return std::isfinite(v) ? format_number(v) : fmt::format("{}", v);
  }
  std::string text;
  if (j.is_string()) {
    text = j.get<std::string>();
  } else {
    write_json(text, j);
  }
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

}  // namespace

ReportFormat parse_format(const std::string& name) {
  if (name == "jsonl" || name == "json-lines") return ReportFormat::JsonLines;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorKind::InvalidArgument, "unknown report format " + name);
}

std::string format_report(const std::vector<Row>& rows, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::JsonLines) {
    for (const auto& row : rows) {
      write_json(out, row);
      out += '\n';
    }
    return out;
  }
  // Columns in order of first appearance.
  std::vector<std::string> columns;
  for (const auto& row : rows) {
    for (const auto& [key, value] : row.items()) {
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
  }
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      if (row.contains(columns[c])) out += csv_cell(row.at(columns[c]));
    }
    out += '\n';
  }
  return out;
}

void emit_report(const std::vector<Row>& rows, ReportFormat format, const std::string& path) {
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "no rows to emit");
  const std::string text = format_report(rows, format);
  if (path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

std::vector<Row> parse_json_lines(const std::string& text) {
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      rows.push_back(Row::parse(line));
    } catch (const Row::parse_error& e) {
      throw Error(ErrorKind::ParseError, e.what());
    }
  }
  return rows;
}

}  // namespace latticeborell
