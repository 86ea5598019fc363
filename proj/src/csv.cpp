#include "tpqi/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tpqi/errors.hpp"
#include "tpqi/stats.hpp"

namespace tpqi::io {

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(f, line)) throw InputError(path.string() + ": empty file");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  t.columns = split(line);
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

double to_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  if (!parse_scaled(s, 0, v)) throw InputError(path.string() + ": bad number '" + s + "'");
  return v;
}

// Rebuilds the bin grid from bin centers, assuming whole-picosecond geometry.
BinGrid grid_from_centers(const std::vector<double>& centers_ns, const std::filesystem::path& path) {
  const std::size_t n = centers_ns.size();
  if (n < 2 || n % 2 != 0) throw InputError(path.string() + ": a grid needs an even number of bins");
  const double bw_ps = std::round((centers_ns.back() - centers_ns.front()) / static_cast<double>(n - 1) * 1e3);
  if (!(bw_ps >= 1.0)) throw InputError(path.string() + ": bin centers must increase");
  const double offset_ps = std::round(0.5 * (centers_ns.front() + centers_ns.back()) * 1e3);
  const auto window_ps = static_cast<long long>(bw_ps) * static_cast<long long>(n / 2);
  double window = 0.0, bw = 0.0, offset = 0.0;
  parse_scaled(std::to_string(window_ps), -12, window);
  parse_scaled(std::to_string(static_cast<long long>(bw_ps)), -12, bw);
  parse_scaled(std::to_string(static_cast<long long>(offset_ps)), -12, offset);
  return BinGrid::make(window, bw, offset);
}

}  // namespace

bool parse_scaled(std::string_view text, int exponent, double& out) {
  std::string s(text);
  if (s.empty()) return false;
  if (s.front() == '+') s.erase(0, 1);
  if (exponent != 0) {
    const auto epos = s.find_first_of("eE");
    if (epos == std::string::npos) {
      s += "e" + std::to_string(exponent);
    } else {
      int e = 0;
      const auto* first = s.data() + epos + 1;
      const auto* last = s.data() + s.size();
      if (first != last && *first == '+') ++first;
      auto [p, ec] = std::from_chars(first, last, e);
      if (ec != std::errc() || p != last) return false;
      s = s.substr(0, epos) + "e" + std::to_string(e + exponent);
    }
  }
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return false;
  out = v;
  return true;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string render_csv(const Histogram& h) {
  std::string out = "tau_ns,value,sigma\n";
  const auto sigma = stats::poisson_errors(h);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += format_real(h.grid.center(i) * 1e9);
    out += ',';
    out += std::to_string(h.counts[i]);
    out += ',';
    out += format_real(sigma[i]);
    out += '\n';
  }
  return out;
}

std::string render_csv(const CoincidenceCurve& c) {
  std::string out = "tau_ns,value\n";
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    out += format_real(c.grid.center(i) * 1e9);
    out += ',';
    out += format_real(c.values[i]);
    out += '\n';
  }
  return out;
}

std::string render_csv(const CoincidenceCurve& c, const std::vector<double>& sigma) {
  if (sigma.size() != c.values.size()) throw GeometryError("sigma column length differs from curve");
  std::string out = "tau_ns,value,sigma\n";
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    out += format_real(c.grid.center(i) * 1e9);
    out += ',';
    out += format_real(c.values[i]);
    out += ',';
    out += format_real(sigma[i]);
    out += '\n';
  }
  return out;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

void write_csv(const Histogram& h, const std::filesystem::path& path) { write_text(render_csv(h), path); }

void write_csv(const CoincidenceCurve& c, const std::filesystem::path& path) {
  write_text(render_csv(c), path);
}

void write_csv(const CoincidenceCurve& c, const std::vector<double>& sigma,
               const std::filesystem::path& path) {
  write_text(render_csv(c, sigma), path);
}

Histogram read_histogram_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  if (t.columns.size() < 2 || t.columns[0] != "tau_ns" || t.columns[1] != "value") {
    throw InputError(path.string() + ": expected header tau_ns,value[,sigma]");
  }
  if (t.rows.empty()) return Histogram{};
  std::vector<double> centers;
  for (const auto& r : t.rows) centers.push_back(to_double(r[0], path));
  Histogram h(grid_from_centers(centers, path));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::uint64_t v = 0;
    const auto& s = t.rows[i][1];
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw InputError(path.string() + ": histogram counts must be non-negative integers");
    }
    h.counts[i] = v;
  }
  return h;
}

CoincidenceCurve read_curve_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  if (t.columns.size() < 2 || t.columns[0] != "tau_ns" || t.columns[1] != "value") {
    throw InputError(path.string() + ": expected header tau_ns,value[,sigma]");
  }
  if (t.rows.empty()) return CoincidenceCurve{};
  std::vector<double> centers;
  for (const auto& r : t.rows) centers.push_back(to_double(r[0], path));
  CoincidenceCurve c(grid_from_centers(centers, path));
  for (std::size_t i = 0; i < t.rows.size(); ++i) c.values[i] = to_double(t.rows[i][1], path);
  return c;
}

}  // namespace tpqi::io
