#include <doctest.h>

#include <set>
#include <sstream>

#include "support.hpp"

using namespace cascademl;
using support::cleveland;

TEST_CASE("cleveland file loads with the documented shape and class split") {
  const auto& data = cleveland();
  CHECK(data.table.rows() == 303);
  CHECK(data.table.attributes() == 13);
  CHECK(data.table.class_counts()(kNegative) == 164);
  CHECK(data.table.class_counts()(kPositive) == 139);
  CHECK(data.imputed_cells == 6);
  int nominal = 0;
  for (const auto& a : data.table.schema()) nominal += a.is_nominal();
  CHECK(nominal == 7);
  for (int i = 0; i < data.table.rows(); ++i)
    for (int j = 0; j < data.table.attributes(); ++j) REQUIRE_FALSE(is_missing(data.table.cell(i, j)));
}

TEST_CASE("cleveland binarizes num and imputes mode or median") {
  std::istringstream in(
      "63.0,1.0,1.0,145.0,233.0,1.0,2.0,150.0,0.0,2.3,3.0,0.0,6.0,0\n"
      "67.0,1.0,4.0,160.0,286.0,0.0,2.0,108.0,1.0,1.5,2.0,3.0,3.0,2\n"
      "67.0,1.0,4.0,120.0,229.0,0.0,2.0,129.0,1.0,2.6,2.0,2.0,7.0,4\n"
      "37.0,1.0,3.0,130.0,250.0,0.0,0.0,187.0,0.0,3.5,3.0,?,?,1\n");
  const auto r = load_cleveland(in);
  CHECK(r.table.rows() == 4);
  CHECK(r.imputed_cells == 2);
  CHECK(r.table.label(0) == kNegative);
  CHECK(r.table.label(1) == kPositive);
  CHECK(r.table.label(2) == kPositive);
  CHECK(r.table.label(3) == kPositive);
  // ca median of {0, 3, 2} is 2; thal mode of {6, 3, 7} ties, lowest domain index wins ("3").
  CHECK(r.table.cell(3, 11) == doctest::Approx(2.0));
  CHECK(r.table.schema()[12].values[static_cast<std::size_t>(r.table.cell(3, 12))] == "3");
}

TEST_CASE("cleveland ingestion errors name the line and field") {
  SUBCASE("empty stream") {
    std::istringstream in("");
    CHECK_THROWS_AS(load_cleveland(in), IngestionError);
  }
  SUBCASE("wrong field count") {
    std::istringstream in("63.0,1.0,1.0,145.0,233.0,1.0,2.0,150.0,0.0,2.3,3.0,0.0,6.0,0\n1,2,3\n");
    try {
      load_cleveland(in);
      FAIL("expected an error");
    } catch (const IngestionError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("unparsable numeric cell") {
    std::istringstream in("abc,1.0,1.0,145.0,233.0,1.0,2.0,150.0,0.0,2.3,3.0,0.0,6.0,0\n");
    try {
      load_cleveland(in);
      FAIL("expected an error");
    } catch (const IngestionError& e) {
      CHECK(e.line() == 1);
      CHECK(e.field() == "age");
    }
  }
  SUBCASE("nominal value outside the domain") {
    std::istringstream in("63.0,1.0,9.0,145.0,233.0,1.0,2.0,150.0,0.0,2.3,3.0,0.0,6.0,0\n");
    try {
      load_cleveland(in);
      FAIL("expected an error");
    } catch (const IngestionError& e) {
      CHECK(e.field() == "cp");
    }
  }
}

TEST_CASE("csv with a schema sidecar") {
  std::istringstream schema(
      "# toy\n"
      "colour: nominal red,green\n"
      "size: numeric\n"
      "label: class no,yes\n");
  const auto sidecar = parse_schema_sidecar(schema);
  CHECK(sidecar.attributes.size() == 2);
  CHECK(sidecar.class_column == 2);
  std::istringstream csv("colour,size,label\nred,1.5,no\ngreen,?,yes\nred,3,yes\n");
  const auto r = load_csv(csv, sidecar);
  CHECK(r.table.rows() == 3);
  CHECK(r.imputed_cells == 1);
  CHECK(r.table.cell(1, 1) == doctest::Approx(2.25));
  CHECK(r.table.label(0) == kNegative);
  CHECK(r.table.label(2) == kPositive);

  std::istringstream bad_header("colour,weight,label\nred,1,no\n");
  CHECK_THROWS_AS(load_csv(bad_header, sidecar), IngestionError);
  std::istringstream bad_schema("a: nominal x,x\nb: class n,p\n");
  CHECK_THROWS_AS(parse_schema_sidecar(bad_schema), IngestionError);
}

TEST_CASE("stratified folds partition the rows evenly") {
  const auto& t = cleveland().table;
  const auto plan = stratified_folds(t, 10, 7);
  std::vector<int> sizes(10, 0);
  std::vector<std::array<int, 2>> per_class(10, {0, 0});
  for (int i = 0; i < t.rows(); ++i) {
    const int f = plan.assignments[static_cast<std::size_t>(i)];
    REQUIRE(f >= 0);
    REQUIRE(f < 10);
    ++sizes[static_cast<std::size_t>(f)];
    ++per_class[static_cast<std::size_t>(f)][static_cast<std::size_t>(t.label(i))];
  }
  for (int s : sizes) CHECK((s == 30 || s == 31));
  for (int c = 0; c < 2; ++c) {
    int lo = 1 << 30, hi = 0;
    for (const auto& f : per_class) {
      lo = std::min(lo, f[static_cast<std::size_t>(c)]);
      hi = std::max(hi, f[static_cast<std::size_t>(c)]);
    }
    CHECK(hi - lo <= 1);
  }
  for (int f = 0; f < 10; ++f) {
    const auto test = plan.test_rows(f);
    const auto train = plan.train_rows(f);
    CHECK(test.size() + train.size() == 303u);
    std::set<int> a(test.begin(), test.end());
    for (int r : train) CHECK_FALSE(a.count(r));
  }
  CHECK(stratified_folds(t, 10, 7).assignments == plan.assignments);
  CHECK(stratified_folds(t, 10, 8).assignments != plan.assignments);
}

TEST_CASE("stratified folds on an exactly divisible table") {
  const auto t = support::nominal_table({{0}, {0}, {0}, {0}, {0}, {1}, {1}, {1}, {1}, {1}}, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 2);
  const auto plan = stratified_folds(t, 5, 3);
  for (int f = 0; f < 5; ++f) {
    const auto rows = plan.test_rows(f);
    REQUIRE(rows.size() == 2u);
    CHECK(t.label(rows[0]) + t.label(rows[1]) == 1);
  }
  CHECK_THROWS(stratified_folds(t, 11, 3));
  CHECK_THROWS(stratified_folds(t, 1, 3));
}

TEST_CASE("unstratified folds still balance sizes") {
  const auto& t = cleveland().table;
  const auto plan = stratified_folds(t, 7, 11, false);
  std::vector<int> sizes(7, 0);
  for (int f : plan.assignments) ++sizes[static_cast<std::size_t>(f)];
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("bootstrap keeps schema identity and size") {
  const auto& t = cleveland().table;
  const auto b = bootstrap_sample(t, 5);
  CHECK(b.rows() == t.rows());
  CHECK(b.schema_ptr() == t.schema_ptr());
  CHECK(bootstrap_sample(t, 5).origin().size() == b.origin().size());
  CHECK(std::equal(b.origin().begin(), b.origin().end(), bootstrap_sample(t, 5).origin().begin()));

  const auto one = support::nominal_table({{1}}, {1}, 2);
  const auto b1 = bootstrap_sample(one, 99);
  CHECK(b1.rows() == 1);
  CHECK(b1.cell(0, 0) == 1.0);
  CHECK(b1.label(0) == 1);
}

TEST_CASE("bootstrap distinct-row fraction matches 1 - (1 - 1/n)^n") {
  const auto& t = cleveland().table;
  const int n = t.rows();
  double total = 0.0;
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) {
    const auto b = bootstrap_sample(t, derive_seed(12345, {static_cast<std::uint64_t>(s)}));
    std::set<int> distinct(b.origin().begin(), b.origin().end());
    total += static_cast<double>(distinct.size()) / n;
  }
  const double expected = 1.0 - std::pow(1.0 - 1.0 / n, n);
  CHECK(std::abs(total / trials - expected) < 0.01);
}

TEST_CASE("random subspace size and marginals") {
  const Schema schema = cleveland_schema();
  CHECK(subspace_size(13, 0.5) == 7);
  CHECK(subspace_size(13, 0.01) == 1);
  CHECK(random_subspace(schema, 1.0, 4).is_full());
  CHECK_THROWS(random_subspace(schema, 0.0, 4));
  CHECK_THROWS(random_subspace(schema, -0.5, 4));
  CHECK_THROWS(random_subspace(schema, 1.5, 4));
  CHECK(random_subspace(schema, 0.5, 4) == random_subspace(schema, 0.5, 4));

  std::vector<int> hits(13, 0);
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) {
    const auto mask = random_subspace(schema, 0.5, derive_seed(77, {static_cast<std::uint64_t>(s)}));
    REQUIRE(mask.size() == 7);
    for (int j : mask.indices()) ++hits[static_cast<std::size_t>(j)];
  }
  for (int h : hits) CHECK(std::abs(static_cast<double>(h) / trials - 7.0 / 13.0) < 0.02);
}

TEST_CASE("project keeps rows, classes and composes") {
  const auto& t = cleveland().table;
  const auto full = project(t, FeatureMask::full(13));
  CHECK(full.cells() == t.cells());
  CHECK(full.labels() == t.labels());

  const auto single = project(t, FeatureMask({0}, 13));
  CHECK(single.attributes() == 1);
  CHECK(single.rows() == 303);
  CHECK(single.labels() == t.labels());
  CHECK(single.schema()[0].name == "age");

  const FeatureMask outer({1, 3, 5, 7, 11}, 13);
  const FeatureMask inner({0, 2, 4}, 5);
  const auto twice = project(project(t, outer), inner);
  const auto once = project(t, outer.compose(inner));
  CHECK(twice.cells() == once.cells());
  CHECK(twice.schema() == once.schema());

  CHECK_THROWS(FeatureMask({13}, 13));
  CHECK_THROWS(FeatureMask({}, 13));
  CHECK_THROWS(project(t, FeatureMask({0}, 12)));

  const auto row = project(t.row(4), outer);
  for (std::size_t k = 0; k < row.size(); ++k) CHECK(row[k] == t.cell(4, outer.indices()[k]));
}

TEST_CASE("schema validation") {
  CHECK_THROWS(validate_schema({AttributeSchema::numeric("a"), AttributeSchema::numeric("a")}));
  CHECK_THROWS(validate_schema({AttributeSchema::nominal("a", {})}));
  CHECK_THROWS(validate_schema({AttributeSchema::nominal("a", {"x", "x"})}));
  CHECK_NOTHROW(validate_schema(cleveland_schema()));
}
