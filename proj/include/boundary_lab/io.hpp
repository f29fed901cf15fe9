#ifndef BOUNDARY_LAB_IO_HPP_
#define BOUNDARY_LAB_IO_HPP_

// Sample CSV with a JSON metadata sidecar, and the boundary mini-language:
//   const:<v>  powb  bumps:<bits>:<c>  grid:<path.csv>  shift:<v>:<spec>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "boundary_lab/harness.hpp"
#include "boundary_lab/model.hpp"
#include "boundary_lab/simulate.hpp"

namespace boundary_lab {

inline double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw std::invalid_argument(what + ": '" + text + "' is not a number");
  return v;
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

// Two numeric columns; a non-numeric first line is taken as the header.
inline std::pair<std::vector<double>, std::vector<double>> read_two_columns(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> a, b;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = split_csv_line(line);
    if (cells.empty() || (cells.size() == 1 && cells[0].empty())) continue;
    if (cells.size() != 2) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 2 columns");
    }
    try {
      a.push_back(parse_real(cells[0], "x"));
      b.push_back(parse_real(cells[1], "y"));
    } catch (const std::invalid_argument&) {
      if (line_no == 1) continue;
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return {std::move(a), std::move(b)};
}

}  // namespace detail

inline BoundaryFunction parse_boundary(const std::string& spec, const HolderClass& holder) {
  if (spec == "powb") return BoundaryFunction::scaled_power(holder);
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "const" && !rest.empty()) {
    return BoundaryFunction::constant(parse_real(rest, "const"), holder);
  }
  if (head == "bumps") {
    const auto sep = rest.find(':');
    const std::string bits = rest.substr(0, sep);
    if (bits.empty() || bits.find_first_not_of("01") != std::string::npos) {
      throw std::invalid_argument("bumps: expected a bit string, got '" + bits + "'");
    }
    std::vector<std::uint8_t> theta;
    for (char ch : bits) theta.push_back(ch == '1' ? 1 : 0);
    const double c = sep == std::string::npos ? 0.25 : parse_real(rest.substr(sep + 1), "bumps c");
    return BoundaryFunction::bump_sum(std::move(theta), c, holder);
  }
  if (head == "grid" && !rest.empty()) {
    auto [xs, ys] = detail::read_two_columns(rest);
    return BoundaryFunction::grid_interpolant(std::move(xs), std::move(ys), holder);
  }
  if (head == "shift") {
    const auto sep = rest.find(':');
    if (sep == std::string::npos) throw std::invalid_argument("shift: expected shift:<v>:<spec>");
    return BoundaryFunction::shifted(parse_boundary(rest.substr(sep + 1), holder),
                                     parse_real(rest.substr(0, sep), "shift"));
  }
  throw std::invalid_argument("unknown boundary spec '" + spec +
                              "' (const:<v>|powb|bumps:<bits>:<c>|grid:<path>|shift:<v>:<spec>)");
}

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

inline void write_sample_csv(std::ostream& out, const PppSample& sample) {
  out << "x,y\n";
  for (const Point& p : sample.points) out << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

inline nlohmann::json sample_metadata(const PppSample& sample, const std::string& boundary_spec,
                                      const HolderClass& holder) {
  return {{"n", sample.n},
          {"y_cap", sample.y_cap},
          {"seed", sample.seed},
          {"cap_valid", sample.cap_valid},
          {"count", sample.size()},
          {"boundary", boundary_spec},
          {"beta", holder.beta},
          {"radius", holder.radius}};
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

// Writes <path> and the sidecar <path>.json.
inline void write_sample(const std::string& path, const PppSample& sample,
                         const std::string& boundary_spec, const HolderClass& holder) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_sample_csv(out, sample);
  if (!out) throw std::runtime_error("write failed: " + path);
  write_json_file(path + ".json", sample_metadata(sample, boundary_spec, holder));
}

inline std::vector<Point> read_points_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(name + ": empty file");
  auto header = detail::split_csv_line(line);
  if (header != std::vector<std::string>{"x", "y"}) {
    throw std::runtime_error(name + ": expected header 'x,y'");
  }
  std::vector<Point> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = detail::split_csv_line(line);
    if (cells.empty()) continue;
    if (cells.size() != 2) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": expected x,y");
    }
    const Point p{parse_real(cells[0], "x"), parse_real(cells[1], "y")};
    if (!(p.x >= 0.0 && p.x <= 1.0)) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": x outside [0, 1]");
    }
    points.push_back(p);
  }
  return points;
}

// Reads <path> and, when present, <path>.json for n, y_cap, seed. Without a
// sidecar, n must be supplied and y_cap defaults to max y (cap_valid is then
// recomputed from the points).
inline PppSample read_sample(const std::string& path, const HolderClass& holder,
                             std::optional<long> n_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  PppSample sample;
  sample.points = read_points_csv(in, path);
  std::ifstream meta_in(path + ".json");
  if (meta_in) {
    const nlohmann::json meta = nlohmann::json::parse(meta_in);
    sample.n = meta.at("n").get<long>();
    sample.y_cap = meta.at("y_cap").get<double>();
    sample.seed = meta.value("seed", std::uint64_t{0});
  } else {
    if (!n_override) throw std::runtime_error(path + ": no sidecar metadata; pass --n");
    double top = -std::numeric_limits<double>::infinity();
    for (const Point& p : sample.points) top = std::max(top, p.y);
    sample.y_cap = sample.points.empty() ? 0.0 : top;
  }
  if (n_override) sample.n = *n_override;
  if (sample.n < 1) throw std::runtime_error(path + ": n must be >= 1");
  sample.cap_valid = cap_is_valid(sample.points, holder.radius, sample.y_cap);
  return sample;
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_IO_HPP_
