#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "dra/geometry.hpp"
#include "dra/point_cloud.hpp"
#include "dra/transport.hpp"

namespace dra {

// High-dim cloud and its low-dim image, aligned by index.
struct EmbeddingPair {
  PointCloud X;
  PointCloud Y;

  void validate() const {
    if (X.count() != Y.count())
      throw std::invalid_argument("EmbeddingPair: clouds must have equal counts");
    if (Y.dim >= X.dim)
      throw std::invalid_argument("EmbeddingPair: image dimension must be smaller");
  }
};

// Discrete precision: among points retrieved in the image
// (within r_V of y_i), the fraction also relevant in the data space
// (within r_U of x_i). Query excluded; empty retrieval is undefined.
inline std::optional<double> discrete_precision(const EmbeddingPair& pair, std::size_t i,
                                                double r_U, double r_V) {
  if (i >= pair.X.count()) throw std::out_of_range("discrete_precision: index out of range");
  const double ru2 = r_U * r_U;
  const double rv2 = r_V * r_V;
  std::size_t retrieved = 0, hit = 0;
  for (std::size_t j = 0; j < pair.X.count(); ++j) {
    if (j == i) continue;
    if (pair.Y.squared_dist(i, j) < rv2) {
      ++retrieved;
      if (pair.X.squared_dist(i, j) < ru2) ++hit;
    }
  }
  if (retrieved == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(retrieved);
}

inline std::optional<double> discrete_recall(const EmbeddingPair& pair, std::size_t i,
                                             double r_U, double r_V) {
  if (i >= pair.X.count()) throw std::out_of_range("discrete_recall: index out of range");
  const double ru2 = r_U * r_U;
  const double rv2 = r_V * r_V;
  std::size_t relevant = 0, hit = 0;
  for (std::size_t j = 0; j < pair.X.count(); ++j) {
    if (j == i) continue;
    if (pair.X.squared_dist(i, j) < ru2) {
      ++relevant;
      if (pair.Y.squared_dist(i, j) < rv2) ++hit;
    }
  }
  if (relevant == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(relevant);
}

// (1 + b^2) P R / (b^2 P + R); 0 at P = R = 0.
inline double f_beta(double precision, double recall, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("f_beta: beta must be positive");
  if (precision < 0.0 || precision > 1.0 || recall < 0.0 || recall > 1.0)
    throw std::invalid_argument("f_beta: precision/recall must lie in [0,1]");
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

namespace detail {

inline PointCloud gather(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  PointCloud out(idx.size(), cloud.dim);
  for (std::size_t t = 0; t < idx.size(); ++t)
    for (std::size_t j = 0; j < cloud.dim; ++j) out.at(t, j) = cloud.at(idx[t], j);
  return out;
}

// W2 between two equal-size uniform point sets: the unit-marginal LP is
// the assignment LP, so an exact matching solve suffices.
inline double matched_w2(const PointCloud& A, const PointCloud& B) {
  const CostMatrix cost = cost_matrix(A, B);
  const Assignment match = solve_assignment(cost);
  return std::sqrt(std::max(0.0, match.total_cost / static_cast<double>(A.count())));
}

}  // namespace detail

// Injectivity proxy: W2 in data space between the k-NN of x_i and the
// points whose images are the k-NN of y_i.
inline double w2_many_to_one(const EmbeddingPair& pair, std::size_t i, std::size_t k) {
  pair.validate();
  const auto u_nb = k_nearest(pair.X, i, k);
  const auto v_nb = k_nearest(pair.Y, i, k);
  return detail::matched_w2(detail::gather(pair.X, u_nb.member_indices),
                            detail::gather(pair.X, v_nb.member_indices));
}

// Continuity proxy: W2 in image space between the images of the k-NN of
// x_i and the k-NN of y_i.
inline double w2_discontinuity(const EmbeddingPair& pair, std::size_t i, std::size_t k) {
  pair.validate();
  const auto u_nb = k_nearest(pair.X, i, k);
  const auto v_nb = k_nearest(pair.Y, i, k);
  return detail::matched_w2(detail::gather(pair.Y, u_nb.member_indices),
                            detail::gather(pair.Y, v_nb.member_indices));
}

struct AuditConfig {
  std::size_t k = 30;
  double r_U = 0.0;
  double r_V = 0.0;
  double beta = 0.3;
};

struct QueryMeasures {
  std::size_t index = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_beta;
  std::optional<double> w2_many_to_one;
  std::optional<double> w2_discontinuity;
  std::optional<double> w2_cost;
  std::size_t retrieved_count = 0;
  std::size_t relevant_count = 0;
};

struct ColumnStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

inline ColumnStats column_stats(std::vector<double> values) {
  ColumnStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(values.size()));
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

struct MeasureReport {
  std::vector<QueryMeasures> per_query;
  ColumnStats precision, recall, f_beta, w2_many_to_one, w2_discontinuity, w2_cost;
  std::vector<std::size_t> skipped;
};

// Full per-query sweep; per-query measures are independent, the report
// itself is assembled in index order.
inline MeasureReport audit(const EmbeddingPair& pair, const AuditConfig& config) {
  pair.validate();
  if (!(config.beta > 0.0)) throw std::invalid_argument("audit: beta must be positive");
  const std::size_t n = pair.X.count();
  const bool knn_ok = config.k >= 1 && n >= 2 && config.k <= n - 1;

  MeasureReport report;
  report.per_query.resize(n);
  std::vector<double> col_p, col_r, col_f, col_m, col_d, col_c;

  for (std::size_t i = 0; i < n; ++i) {
    QueryMeasures& q = report.per_query[i];
    q.index = i;

    const double ru2 = config.r_U * config.r_U;
    const double rv2 = config.r_V * config.r_V;
    std::size_t retrieved = 0, relevant = 0, hit = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool in_u = pair.X.squared_dist(i, j) < ru2;
      const bool in_v = pair.Y.squared_dist(i, j) < rv2;
      if (in_u) ++relevant;
      if (in_v) ++retrieved;
      if (in_u && in_v) ++hit;
    }
    q.retrieved_count = retrieved;
    q.relevant_count = relevant;
    if (retrieved > 0)
      q.precision = static_cast<double>(hit) / static_cast<double>(retrieved);
    if (relevant > 0) q.recall = static_cast<double>(hit) / static_cast<double>(relevant);
    if (q.precision && q.recall) q.f_beta = f_beta(*q.precision, *q.recall, config.beta);

    if (knn_ok) {
      q.w2_many_to_one = w2_many_to_one(pair, i, config.k);
      q.w2_discontinuity = w2_discontinuity(pair, i, config.k);
      q.w2_cost = 0.5 * (*q.w2_many_to_one + *q.w2_discontinuity);
    }

    const bool any_undefined =
        !q.precision || !q.recall || !q.f_beta || !q.w2_many_to_one || !q.w2_discontinuity;
    if (any_undefined) report.skipped.push_back(i);

    if (q.precision) col_p.push_back(*q.precision);
    if (q.recall) col_r.push_back(*q.recall);
    if (q.f_beta) col_f.push_back(*q.f_beta);
    if (q.w2_many_to_one) col_m.push_back(*q.w2_many_to_one);
    if (q.w2_discontinuity) col_d.push_back(*q.w2_discontinuity);
    if (q.w2_cost) col_c.push_back(*q.w2_cost);
  }

  report.precision = column_stats(std::move(col_p));
  report.recall = column_stats(std::move(col_r));
  report.f_beta = column_stats(std::move(col_f));
  report.w2_many_to_one = column_stats(std::move(col_m));
  report.w2_discontinuity = column_stats(std::move(col_d));
  report.w2_cost = column_stats(std::move(col_c));
  return report;
}

inline nlohmann::json stats_to_json(const ColumnStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"stddev", s.stddev}};
}

inline nlohmann::json report_to_json(const MeasureReport& report) {
  nlohmann::json per_query = nlohmann::json::array();
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  for (const QueryMeasures& q : report.per_query) {
    per_query.push_back({{"index", q.index},
                         {"precision", opt(q.precision)},
                         {"recall", opt(q.recall)},
                         {"f_beta", opt(q.f_beta)},
                         {"w2_many_to_one", opt(q.w2_many_to_one)},
                         {"w2_discontinuity", opt(q.w2_discontinuity)},
                         {"w2_cost", opt(q.w2_cost)},
                         {"retrieved_count", q.retrieved_count},
                         {"relevant_count", q.relevant_count}});
  }
  return {{"per_query", std::move(per_query)},
          {"aggregates",
           {{"precision", stats_to_json(report.precision)},
            {"recall", stats_to_json(report.recall)},
            {"f_beta", stats_to_json(report.f_beta)},
            {"w2_many_to_one", stats_to_json(report.w2_many_to_one)},
            {"w2_discontinuity", stats_to_json(report.w2_discontinuity)},
            {"w2_cost", stats_to_json(report.w2_cost)}}},
          {"skipped", report.skipped}};
}

inline void report_to_csv(const MeasureReport& report, std::ostream& out) {
  out << "index,precision,recall,f_beta,w2_many_to_one,w2_discontinuity,w2_cost,"
         "retrieved_count,relevant_count\n";
  auto cell = [&](const std::optional<double>& v) {
    if (v) out << detail::format_value(*v);
  };
  for (const QueryMeasures& q : report.per_query) {
    out << q.index << ',';
    cell(q.precision);
    out << ',';
    cell(q.recall);
    out << ',';
    cell(q.f_beta);
    out << ',';
    cell(q.w2_many_to_one);
    out << ',';
    cell(q.w2_discontinuity);
    out << ',';
    cell(q.w2_cost);
    out << ',' << q.retrieved_count << ',' << q.relevant_count << '\n';
  }
}

}  // namespace dra
