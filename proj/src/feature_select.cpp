#include "cascademl/feature_select.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>

namespace cascademl {

std::vector<double> equal_frequency_cuts(std::vector<double> values, int bins) {
  if (bins < 1) throw std::invalid_argument("equal_frequency_cuts: bins must be positive");
  std::erase_if(values, [](double v) { return is_missing(v); });
  std::sort(values.begin(), values.end());
  std::vector<double> cuts;
  if (values.empty() || bins == 1) return cuts;
  // Walk the distinct values, closing a bin at the change point whose
  // running count lands nearest the target size; the target is re-spread
  // over the remaining bins after every cut.
  double remaining = static_cast<double>(values.size());
  double target = remaining / bins;
  double counter = 0.0, last = 0.0;
  std::optional<std::size_t> last_index;
  auto midpoint = [&](std::size_t i) { return split_point(values[i], values[i + 1]); };
  for (std::size_t i = 0; i + 1 < values.size() && static_cast<int>(cuts.size()) < bins - 1; ++i) {
    counter += 1.0;
    remaining -= 1.0;
    if (!(values[i] < values[i + 1])) continue;
    if (counter >= target) {
      if (last_index && target - last < counter - target) {
        cuts.push_back(midpoint(*last_index));
        counter -= last;
        last = counter;
        last_index = i;
      } else {
        cuts.push_back(midpoint(i));
        counter = last = 0.0;
        last_index.reset();
      }
      target = (remaining + counter) / static_cast<double>(bins - static_cast<int>(cuts.size()));
    } else {
      last_index = i;
      last = counter;
    }
  }
  if (static_cast<int>(cuts.size()) < bins - 1 && last_index) cuts.push_back(midpoint(*last_index));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

Eigen::MatrixXi discretize(const DataTable& table, const std::vector<std::vector<double>>& cuts) {
  if (static_cast<int>(cuts.size()) != table.attributes())
    throw std::invalid_argument("discretize: one cut list per attribute expected");
  Eigen::MatrixXi codes(table.rows(), table.attributes());
  for (int j = 0; j < table.attributes(); ++j) {
    const auto& attr = table.schema()[j];
    const int missing_code = attr.is_nominal() ? attr.arity() : static_cast<int>(cuts[j].size()) + 1;
    for (int i = 0; i < table.rows(); ++i) {
      const double v = table.cell(i, j);
      if (is_missing(v)) codes(i, j) = missing_code;
      else if (attr.is_nominal()) codes(i, j) = static_cast<int>(v);
      else codes(i, j) = static_cast<int>(std::upper_bound(cuts[j].begin(), cuts[j].end(), v) - cuts[j].begin());
    }
  }
  return codes;
}

namespace {

double entropy_of(const std::map<long long, double>& counts, double total) {
  double h = 0.0;
  for (const auto& [_, c] : counts)
    if (c > 0) h -= c / total * std::log2(c / total);
  return h;
}

}  // namespace

double symmetric_uncertainty(const Eigen::VectorXi& x, const Eigen::VectorXi& y, const Eigen::VectorXd& weights) {
  if (x.size() != y.size() || x.size() != weights.size())
    throw std::invalid_argument("symmetric_uncertainty: length mismatch");
  std::map<long long, double> cx, cy, cxy;
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double w = weights(i);
    cx[x(i)] += w;
    cy[y(i)] += w;
    cxy[(static_cast<long long>(x(i)) << 32) + y(i)] += w;
    total += w;
  }
  if (total <= 0) return 0.0;
  const double hx = entropy_of(cx, total), hy = entropy_of(cy, total), hxy = entropy_of(cxy, total);
  if (hx + hy <= 0) return 0.0;
  return std::clamp(2.0 * (hx + hy - hxy) / (hx + hy), 0.0, 1.0);
}

CfsCache build_cfs_cache(const DataTable& table, int bins) {
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(table.attributes()));
  for (int j = 0; j < table.attributes(); ++j) {
    if (table.schema()[j].is_nominal()) continue;
    const auto col = table.cells().col(j);
    cuts[j] = equal_frequency_cuts(std::vector<double>(col.begin(), col.end()), bins);
  }
  return build_cfs_cache(table, std::move(cuts));
}

CfsCache build_cfs_cache(const DataTable& table, std::vector<std::vector<double>> cuts) {
  const int m = table.attributes();
  const Eigen::MatrixXi codes = discretize(table, cuts);
  CfsCache cache;
  cache.cut_points = std::move(cuts);
  cache.correlation = Eigen::MatrixXd::Identity(m + 1, m + 1);
  auto column = [&](int j) -> Eigen::VectorXi { return j == m ? table.labels() : Eigen::VectorXi(codes.col(j)); };
  for (int a = 0; a <= m; ++a)
    for (int b = a + 1; b <= m; ++b) {
      const double su = symmetric_uncertainty(column(a), column(b), table.weights());
      cache.correlation(a, b) = cache.correlation(b, a) = su;
    }
  return cache;
}

double cfs_merit(const CfsCache& cache, const FeatureMask& subset) {
  if (subset.attribute_count() != cache.attributes())
    throw std::invalid_argument("cfs_merit: mask does not fit the cache");
  const auto idx = subset.indices();
  const double k = static_cast<double>(idx.size());
  double rcf = 0.0;
  for (int j : idx) rcf += cache.class_correlation(j);
  rcf /= k;
  double rff = 0.0;
  if (idx.size() > 1) {
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) rff += cache.correlation(idx[a], idx[b]);
    rff /= k * (k - 1.0) / 2.0;
  }
  const double denominator = std::sqrt(k + k * (k - 1.0) * rff);
  if (denominator <= 1e-12) return 0.0;
  return k * rcf / denominator;
}

void GaConfig::validate() const {
  if (population < 2) throw std::invalid_argument("ga.population must be at least 2");
  if (generations < 0) throw std::invalid_argument("ga.generations must be non-negative");
  if (!(crossover >= 0 && crossover <= 1)) throw std::invalid_argument("ga.crossover must lie in [0, 1]");
  if (!(mutation >= 0 && mutation <= 1)) throw std::invalid_argument("ga.mutation must lie in [0, 1]");
  if (elitism < 0 || elitism > population) throw std::invalid_argument("ga.elitism must lie in [0, population]");
}

namespace {

FeatureMask to_mask(const Chromosome& c) {
  std::vector<int> idx;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j]) idx.push_back(static_cast<int>(j));
  return FeatureMask(std::move(idx), static_cast<int>(c.size()));
}

void repair(Chromosome& c, Rng& rng) {
  if (std::none_of(c.begin(), c.end(), [](bool b) { return b; })) c[rng.below(c.size())] = true;
}

struct Scored {
  Chromosome genes;
  double merit = 0.0;
};

// Goldberg linear scaling: the best individual gets about twice the mean
// fitness, clipped so no fitness turns negative.
std::vector<double> scaled_fitness(const std::vector<Scored>& pop) {
  constexpr double kMultiple = 2.0;
  double lo = pop[0].merit, hi = pop[0].merit, avg = 0.0;
  for (const auto& s : pop) {
    lo = std::min(lo, s.merit);
    hi = std::max(hi, s.merit);
    avg += s.merit;
  }
  avg /= static_cast<double>(pop.size());
  std::vector<double> f(pop.size(), 1.0);
  if (hi - lo <= 1e-12) return f;
  double a, b;
  if (lo > (kMultiple * avg - hi) / (kMultiple - 1.0)) {
    a = (kMultiple - 1.0) * avg / (hi - avg);
    b = avg * (hi - kMultiple * avg) / (hi - avg);
  } else {
    a = avg / (avg - lo);
    b = -lo * avg / (avg - lo);
  }
  for (std::size_t i = 0; i < pop.size(); ++i) f[i] = std::max(0.0, a * pop[i].merit + b);
  return f;
}

std::size_t roulette(const std::vector<double>& fitness, double total, Rng& rng) {
  if (total <= 0) return rng.below(fitness.size());
  const double target = rng.uniform() * total;
  double running = 0.0;
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    running += fitness[i];
    if (target < running) return i;
  }
  return fitness.size() - 1;
}

}  // namespace

GaResult ga_search_detailed(const CfsCache& cache, const GaConfig& config) {
  config.validate();
  const int m = cache.attributes();
  if (m < 1) throw std::invalid_argument("ga_search: no attributes");
  Rng rng(config.seed);

  std::vector<Scored> pop;
  for (const auto& seeded : config.initial_population) {
    if (static_cast<int>(pop.size()) == config.population) break;
    if (static_cast<int>(seeded.size()) != m) throw std::invalid_argument("ga_search: seeded individual has wrong length");
    pop.push_back({seeded, 0.0});
    repair(pop.back().genes, rng);
  }
  while (static_cast<int>(pop.size()) < config.population) {
    Chromosome c(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) c[j] = rng.bernoulli(0.5);
    repair(c, rng);
    pop.push_back({std::move(c), 0.0});
  }
  for (auto& s : pop) s.merit = cfs_merit(cache, to_mask(s.genes));

  auto best_of = [](const std::vector<Scored>& p) {
    return *std::max_element(p.begin(), p.end(), [](const Scored& a, const Scored& b) { return a.merit < b.merit; });
  };
  Scored best = best_of(pop);
  const double best_initial = best.merit;

  for (int g = 0; g < config.generations; ++g) {
    std::vector<std::size_t> order(pop.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pop[a].merit > pop[b].merit; });
    const std::vector<double> fitness = scaled_fitness(pop);
    const double total = std::accumulate(fitness.begin(), fitness.end(), 0.0);

    std::vector<Scored> next;
    for (int e = 0; e < config.elitism; ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);
    while (static_cast<int>(next.size()) < config.population) {
      Chromosome a = pop[roulette(fitness, total, rng)].genes;
      Chromosome b = pop[roulette(fitness, total, rng)].genes;
      if (m > 1 && rng.bernoulli(config.crossover)) {
        const std::size_t point = 1 + rng.below(static_cast<std::uint64_t>(m - 1));
        for (std::size_t j = point; j < a.size(); ++j) std::swap(a[j], b[j]);
      }
      for (Chromosome* c : {&a, &b}) {
        for (std::size_t j = 0; j < c->size(); ++j)
          if (rng.bernoulli(config.mutation)) (*c)[j] = !(*c)[j];
        repair(*c, rng);
      }
      next.push_back({std::move(a), 0.0});
      if (static_cast<int>(next.size()) < config.population) next.push_back({std::move(b), 0.0});
    }
    for (auto& s : next) s.merit = cfs_merit(cache, to_mask(s.genes));
    pop = std::move(next);
    if (const Scored gen_best = best_of(pop); gen_best.merit > best.merit) best = gen_best;
  }
  return {to_mask(best.genes), best.merit, best_initial};
}

FeatureMask ga_search(const CfsCache& cache, const GaConfig& config) { return ga_search_detailed(cache, config).best; }

GaResult exhaustive_search(const CfsCache& cache) {
  const int m = cache.attributes();
  if (m < 1 || m > 20) throw std::invalid_argument("exhaustive_search: needs 1..20 attributes");
  std::optional<GaResult> best;
  for (std::uint32_t bits = 1; bits < (1u << m); ++bits) {
    std::vector<int> idx;
    for (int j = 0; j < m; ++j)
      if (bits & (1u << j)) idx.push_back(j);
    FeatureMask mask(std::move(idx), m);
    const double merit = cfs_merit(cache, mask);
    if (!best || merit > best->merit) best = GaResult{mask, merit, merit};
  }
  return *best;
}

FeatureMask select_features(const DataTable& table, const SelectionConfig& config, Seed seed) {
  GaConfig ga = config.ga;
  ga.seed = seed;
  return ga_search(build_cfs_cache(table, config.bins), ga);
}

SelectedModel train_selected(const LearnerSpec& spec, const SelectionConfig& selection, const DataTable& table,
                             Seed seed) {
  FeatureMask mask = select_features(table, selection, derive_seed(seed, {0}));
  TrainedModel model = train(spec, project(table, mask), derive_seed(seed, {1}));
  return {std::move(mask), std::move(model)};
}

Distribution predict_selected(const SelectedModel& model, Instance instance) {
  const auto view = project(instance, model.mask);
  return predict_distribution(model.model, view);
}

void write_mask(std::ostream& out, const FeatureMask& mask) {
  out << "mask " << mask.attribute_count() << ' ' << mask.size();
  for (int j : mask.indices()) out << ' ' << j;
  out << '\n';
}

FeatureMask read_mask(TokenReader& in) {
  in.expect("mask");
  const auto m = in.next_int();
  const auto k = in.next_int();
  if (m < 1 || k < 1 || k > m) throw FormatError("malformed mask header");
  std::vector<int> idx;
  for (long long i = 0; i < k; ++i) idx.push_back(in.next_index(m));
  return FeatureMask(std::move(idx), static_cast<int>(m));
}

void write_selected(std::ostream& out, const SelectedModel& model) {
  out << "cascademl-selected 1\n";
  write_mask(out, model.mask);
  write_model(out, model.model);
  out << "end\n";
}

SelectedModel read_selected(std::istream& stream) {
  TokenReader in(stream);
  return read_selected(in);
}

SelectedModel read_selected(TokenReader& in) {
  in.expect("cascademl-selected");
  if (in.next_int() != 1) throw FormatError("unsupported selected-model version");
  FeatureMask mask = read_mask(in);
  TrainedModel model = read_model(in);
  in.expect("end");
  return {std::move(mask), std::move(model)};
}

}  // namespace cascademl
