#include "navstack/trace.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "navstack/errors.hpp"

namespace navstack {

namespace {

std::vector<std::string> split_row(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur += c;
    }
  }
  if (quoted) throw SchemaError("line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

Trace parse_trace_csv(std::string_view text) {
  Trace tr;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t t_col = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_row(line, line_no);
    if (!have_header) {
      header = std::move(cells);
      bool found_t = false;
      std::set<std::string> seen;
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (!seen.insert(header[i]).second) throw SchemaError("duplicate column '" + header[i] + "'");
        if (header[i] == "t") {
          found_t = true;
          t_col = i;
        } else {
          tr.atoms.push_back(header[i]);
        }
      }
      if (!found_t) throw SchemaError("trace header has no 't' column");
      have_header = true;
      continue;
    }
    if (cells.size() != header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    }
    ltl::Valuation v;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == t_col) {
        double t = 0.0;
        const auto* end = cells[i].data() + cells[i].size();
        auto [ptr, ec] = std::from_chars(cells[i].data(), end, t);
        if (ec != std::errc() || ptr != end) {
          throw SchemaError("line " + std::to_string(line_no) + ": bad time '" + cells[i] + "'");
        }
        tr.t.push_back(t);
      } else if (cells[i] == "0" || cells[i] == "1") {
        v[header[i]] = cells[i] == "1";
      } else {
        throw SchemaError("line " + std::to_string(line_no) + ": '" + header[i] +
                          "' must be 0 or 1, got '" + cells[i] + "'");
      }
    }
    tr.rows.push_back(std::move(v));
  }
  if (!have_header) throw SchemaError("trace is empty (no header row)");
  return tr;
}

Trace load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open trace '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace_csv(ss.str());
}

std::string to_csv(const Trace& trace) {
  const auto quote = [](const std::string& s) {
    return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
  };
  std::ostringstream os;
  os << "t";
  for (const auto& a : trace.atoms) os << "," << quote(a);
  os << "\n";
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    os << (i < trace.t.size() ? trace.t[i] : static_cast<double>(i));
    for (const auto& a : trace.atoms) {
      auto it = trace.rows[i].find(a);
      os << "," << (it != trace.rows[i].end() && it->second ? 1 : 0);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace navstack
