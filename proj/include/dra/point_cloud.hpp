#pragma once

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dra {

// Flat row-major storage: point i occupies [i*dim, (i+1)*dim).
// Point ordering is part of the value and survives serialization.
struct PointCloud {
  std::vector<double> data;
  std::size_t dim = 0;

  PointCloud() = default;
  PointCloud(std::size_t count, std::size_t d) : data(count * d, 0.0), dim(d) {}

  std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }

  double* point(std::size_t i) { return data.data() + i * dim; }
  const double* point(std::size_t i) const { return data.data() + i * dim; }

  double& at(std::size_t i, std::size_t j) { return data[i * dim + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * dim + j]; }

  double squared_dist(std::size_t i, std::size_t j) const {
    const double* a = point(i);
    const double* b = point(j);
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    return s;
  }

  double norm(std::size_t i) const {
    const double* a = point(i);
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) s += a[k] * a[k];
    return std::sqrt(s);
  }
};

// Exactly one of radius/k is set.
struct Neighborhood {
  std::size_t center_index = 0;
  std::vector<std::size_t> member_indices;
  std::optional<double> radius;
  std::optional<std::size_t> k;
};

namespace detail {

inline std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace detail

inline void write_cloud_csv(const PointCloud& cloud, std::ostream& out) {
  for (std::size_t j = 0; j < cloud.dim; ++j) {
    if (j) out << ',';
    out << 'x' << j;
  }
  out << '\n';
  for (std::size_t i = 0; i < cloud.count(); ++i) {
    for (std::size_t j = 0; j < cloud.dim; ++j) {
      if (j) out << ',';
      out << detail::format_value(cloud.at(i, j));
    }
    out << '\n';
  }
}

inline void write_cloud_csv(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_cloud_csv(cloud, out);
}

inline PointCloud read_cloud_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV input");
  std::size_t dim = 1;
  for (char c : line)
    if (c == ',') ++dim;

  PointCloud cloud;
  cloud.dim = dim;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t got = 0;
    while (std::getline(ss, cell, ',')) {
      cloud.data.push_back(std::stod(cell));
      ++got;
    }
    if (got != dim) throw std::runtime_error("ragged CSV row");
  }
  return cloud;
}

inline PointCloud read_cloud_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_cloud_csv(in);
}

inline nlohmann::json cloud_to_json(const PointCloud& cloud) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < cloud.count(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < cloud.dim; ++j) row.push_back(cloud.at(i, j));
    points.push_back(std::move(row));
  }
  return nlohmann::json{{"dim", cloud.dim}, {"count", cloud.count()}, {"points", std::move(points)}};
}

inline PointCloud cloud_from_json(const nlohmann::json& j) {
  PointCloud cloud;
  cloud.dim = j.at("dim").get<std::size_t>();
  for (const auto& row : j.at("points")) {
    if (row.size() != cloud.dim) throw std::runtime_error("ragged JSON point");
    for (const auto& v : row) cloud.data.push_back(v.get<double>());
  }
  if (cloud.count() != j.at("count").get<std::size_t>())
    throw std::runtime_error("JSON count mismatch");
  return cloud;
}

}  // namespace dra
