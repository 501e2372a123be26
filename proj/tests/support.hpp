#pragma once

// Random fixtures and naive reference computations shared by the tests.
// Nothing here calls library code it is meant to check.

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cascademl/data.hpp"

namespace support {

using namespace cascademl;

inline std::filesystem::path source_dir() { return CASCADEML_SOURCE_DIR; }
inline std::filesystem::path cleveland_path() { return source_dir() / "data" / "processed.cleveland.data"; }

inline const LoadResult& cleveland() {
  static const LoadResult data = load_cleveland_file(cleveland_path().string());
  return data;
}

struct TableShape {
  int rows = 20;
  int nominal = 2;
  int numeric = 2;
  int max_arity = 3;
  double missing_rate = 0.0;
  bool integer_numerics = true;  // small integer grid, so ties are common
};

inline DataTable random_table(std::mt19937_64& gen, const TableShape& shape) {
  Schema schema;
  std::uniform_int_distribution<int> arity_dist(2, std::max(2, shape.max_arity));
  for (int j = 0; j < shape.nominal; ++j) {
    std::vector<std::string> values;
    const int k = arity_dist(gen);
    for (int v = 0; v < k; ++v) values.push_back("v" + std::to_string(v));
    schema.push_back(AttributeSchema::nominal("n" + std::to_string(j), values));
  }
  for (int j = 0; j < shape.numeric; ++j) schema.push_back(AttributeSchema::numeric("x" + std::to_string(j)));
  const int m = static_cast<int>(schema.size());
  CellMatrix cells(shape.rows, m);
  Eigen::VectorXi labels(shape.rows);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 5);
  for (int i = 0; i < shape.rows; ++i) {
    labels(i) = u(gen) < 0.5 ? 0 : 1;
    for (int j = 0; j < m; ++j) {
      if (u(gen) < shape.missing_rate) {
        cells(i, j) = kMissing;
        continue;
      }
      if (schema[j].is_nominal()) {
        std::uniform_int_distribution<int> val(0, schema[j].arity() - 1);
        // Some correlation with the class keeps gains away from zero.
        cells(i, j) = u(gen) < 0.3 ? std::min(labels(i), schema[j].arity() - 1) : val(gen);
      } else {
        cells(i, j) = shape.integer_numerics ? grid(gen) + labels(i) : u(gen) * 10.0 + 2.0 * labels(i);
      }
    }
  }
  return DataTable(std::make_shared<const Schema>(std::move(schema)), ClassLabels{"neg", "pos"}, std::move(cells),
                   std::move(labels));
}

/// Table from explicit rows; every attribute nominal with domain {"0", ..., arity-1}.
inline DataTable nominal_table(const std::vector<std::vector<int>>& rows, const std::vector<int>& labels, int arity) {
  Schema schema;
  std::vector<std::string> values;
  for (int v = 0; v < arity; ++v) values.push_back(std::to_string(v));
  for (std::size_t j = 0; j < rows.front().size(); ++j) schema.push_back(AttributeSchema::nominal("a" + std::to_string(j), values));
  CellMatrix cells(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(schema.size()));
  Eigen::VectorXi y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    y(static_cast<Eigen::Index>(i)) = labels[i];
  }
  return DataTable(std::make_shared<const Schema>(std::move(schema)), ClassLabels{"neg", "pos"}, std::move(cells), std::move(y));
}

/// Table with numeric attributes only.
inline DataTable numeric_table(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  Schema schema;
  for (std::size_t j = 0; j < rows.front().size(); ++j) schema.push_back(AttributeSchema::numeric("x" + std::to_string(j)));
  CellMatrix cells(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(schema.size()));
  Eigen::VectorXi y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    y(static_cast<Eigen::Index>(i)) = labels[i];
  }
  return DataTable(std::make_shared<const Schema>(std::move(schema)), ClassLabels{"neg", "pos"}, std::move(cells), std::move(y));
}

// ---- reference computations ----------------------------------------------

inline double entropy_of_counts(const std::vector<double>& counts) {
  double n = 0;
  for (double c : counts) n += c;
  double h = 0;
  for (double c : counts)
    if (c > 0) h -= (c / n) * std::log(c / n) / std::log(2.0);
  return h;
}

/// Gain and split info of splitting `attribute`, counting row by row.
/// Missing values: gain over known rows scaled by the known fraction; split
/// info treats "missing" as one more branch.
struct OracleSplit {
  double gain = 0, split_info = 0;
};

inline OracleSplit oracle_split(const DataTable& t, int attribute, std::optional<double> threshold) {
  std::map<int, std::vector<double>> branch;  // branch -> class counts; -1 = missing
  std::vector<double> known_class(2, 0.0);
  double known = 0, total = 0;
  for (int i = 0; i < t.rows(); ++i) {
    const double v = t.cell(i, attribute);
    total += 1;
    int b;
    if (std::isnan(v)) b = -1;
    else {
      b = threshold ? (v <= *threshold ? 0 : 1) : static_cast<int>(v);
      known += 1;
      known_class[static_cast<std::size_t>(t.label(i))] += 1;
    }
    auto& c = branch[b];
    c.resize(2, 0.0);
    c[static_cast<std::size_t>(t.label(i))] += 1;
  }
  OracleSplit out;
  if (known == 0) return out;
  double remainder = 0;
  std::vector<double> sizes;
  for (const auto& [b, c] : branch) {
    sizes.push_back(c[0] + c[1]);
    if (b >= 0) remainder += (c[0] + c[1]) / known * entropy_of_counts(c);
  }
  out.gain = known / total * (entropy_of_counts(known_class) - remainder);
  out.split_info = entropy_of_counts(sizes);
  return out;
}

// SU straight from a contingency table of nominal codes (missing = -1).
// Attribute index attributes() means the class.
inline double oracle_su(const DataTable& t, int a, int b) {
  auto code = [&](int i, int j) {
    if (j == t.attributes()) return t.label(i);
    const double v = t.cell(i, j);
    return std::isnan(v) ? -1 : static_cast<int>(v);
  };
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> mx, my;
  for (int i = 0; i < t.rows(); ++i) {
    joint[{code(i, a), code(i, b)}] += 1;
    mx[code(i, a)] += 1;
    my[code(i, b)] += 1;
  }
  auto h = [](const auto& m) {
    std::vector<double> c;
    for (const auto& kv : m) c.push_back(kv.second);
    return entropy_of_counts(c);
  };
  const double hx = h(mx), hy = h(my), hxy = h(joint);
  if (hx + hy == 0) return 0.0;
  return 2.0 * (hx + hy - hxy) / (hx + hy);
}

/// Hall's merit from pairwise SU on a nominal table.
inline double oracle_merit(const DataTable& t, const std::vector<int>& subset) {
  const double k = static_cast<double>(subset.size());
  double rcf = 0, rff = 0;
  for (int a : subset) rcf += oracle_su(t, a, t.attributes());
  rcf /= k;
  if (subset.size() > 1) {
    for (std::size_t i = 0; i < subset.size(); ++i)
      for (std::size_t j = i + 1; j < subset.size(); ++j) rff += oracle_su(t, subset[i], subset[j]);
    rff /= k * (k - 1) / 2.0;
  }
  const double denom = std::sqrt(k + k * (k - 1) * rff);
  return denom == 0 ? 0.0 : k * rcf / denom;
}

/// Naive Bayes P(positive | row i) on an all-nominal table, as the explicit
/// product of Laplace-smoothed counts over every training row.
inline double oracle_nb_posterior(const DataTable& t, int i) {
  double joint[2];
  for (int c = 0; c < 2; ++c) {
    int nc = 0;
    for (int r = 0; r < t.rows(); ++r) nc += t.label(r) == c;
    double p = (nc + 1.0) / (t.rows() + 2.0);
    for (int j = 0; j < t.attributes(); ++j) {
      const double v = t.cell(i, j);
      if (std::isnan(v)) continue;
      int match = 0, known = 0;
      for (int r = 0; r < t.rows(); ++r) {
        if (t.label(r) != c || std::isnan(t.cell(r, j))) continue;
        ++known;
        match += t.cell(r, j) == v;
      }
      p *= (match + 1.0) / (known + t.schema()[j].arity());
    }
    joint[c] = p;
  }
  return joint[1] / (joint[0] + joint[1]);
}

/// AUC over every positive-negative pair, ties worth one half.
inline double pair_auc(const Eigen::VectorXd& s, const Eigen::VectorXi& y) {
  double wins = 0, pairs = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (y(i) != 1 || y(j) != 0) continue;
      pairs += 1;
      wins += s(i) > s(j) ? 1.0 : s(i) == s(j) ? 0.5 : 0.0;
    }
  return wins / pairs;
}

/// Kohavi-Wolpert variance by counting wrong members per instance.
inline double pair_kw(const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& c) {
  const double n = static_cast<double>(c.rows()), l = static_cast<double>(c.cols());
  double sum = 0;
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    double wrong = 0;
    for (Eigen::Index m = 0; m < c.cols(); ++m) wrong += !c(j, m);
    sum += wrong * (l - wrong);
  }
  return sum / (n * l * l);
}

}  // namespace support
