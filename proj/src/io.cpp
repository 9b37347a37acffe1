#include "ihgp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ihgp/errors.hpp"

namespace ihgp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& raw, double* out) {
  const std::string s = strip(raw);
  if (s.empty() || s == "nan" || s == "NaN" || s == "NAN") {
    *out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  try {
    size_t pos = 0;
    *out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

TimeSeries read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("'" + path + "' is empty");

  std::vector<double> ts, ys;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (strip(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 2) {
      throw InputError("'" + path + "' row " + std::to_string(row) +
                       ": expected 't,y'");
    }
    double t, y;
    if (!parse_double(fields[0], &t) || std::isnan(t)) {
      throw InputError("'" + path + "' row " + std::to_string(row) +
                       ": bad time value");
    }
    if (!parse_double(fields[1], &y)) {
      throw InputError("'" + path + "' row " + std::to_string(row) +
                       ": bad observation value");
    }
    ts.push_back(t);
    ys.push_back(y);
  }
  if (ts.empty()) throw InputError("'" + path + "' contains no data rows");

  TimeSeries out;
  out.t = Eigen::Map<Vector>(ts.data(), ts.size());
  out.y = Eigen::Map<Vector>(ys.data(), ys.size());
  return out;
}

double check_equidistant(const Vector& t, double rel_tol) {
  if (t.size() < 2) throw InputError("need at least two samples");
  const double dt = (t(t.size() - 1) - t(0)) / (t.size() - 1);
  if (!(dt > 0.0)) throw InputError("time column must be increasing");
  for (Eigen::Index i = 1; i < t.size(); ++i) {
    const double step = t(i) - t(i - 1);
    if (std::abs(step - dt) > rel_tol * dt) {
      throw InputError("non-equidistant time at row " + std::to_string(i + 1) +
                       ": step " + format_double(step) + " vs mean " +
                       format_double(dt));
    }
  }
  return dt;
}

std::vector<double> read_timestamps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<double> out;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string s = strip(line);
    if (s.empty()) continue;
    const auto fields = split_csv_line(s);
    double t;
    if (!parse_double(fields[0], &t) || std::isnan(t)) {
      if (row == 1) continue;  // header
      throw InputError("'" + path + "' row " + std::to_string(row) +
                       ": bad timestamp");
    }
    out.push_back(t);
  }
  if (out.empty()) throw InputError("'" + path + "' contains no timestamps");
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vector>& columns) {
  if (columns.empty() || header.size() != columns.size()) {
    throw ParameterError("write_csv: header/column mismatch");
  }
  const Eigen::Index n = columns[0].size();
  for (const auto& col : columns) {
    if (col.size() != n) throw ParameterError("write_csv: ragged columns");
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  for (size_t j = 0; j < header.size(); ++j) {
    out << header[j] << (j + 1 < header.size() ? "," : "\n");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (size_t j = 0; j < columns.size(); ++j) {
      out << format_double(columns[j](i))
          << (j + 1 < columns.size() ? "," : "\n");
    }
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

}  // namespace ihgp
