#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace demandcast;
using testing::make_panel;

TEST_CASE("panel rejects negative counts and sales while unlisted") {
  CHECK_THROWS_AS(make_panel({{1, -1}}), DataError);
  CHECK_THROWS_AS(make_panel({{1, 2}}, {{true, false}}), DataError);
  CHECK_NOTHROW(make_panel({{1, 0}}, {{true, false}}));
}

TEST_CASE("panel rejects duplicate ids and ragged shapes") {
  CountMatrix y = CountMatrix::Zero(2, 3);
  MaskMatrix m = MaskMatrix::Constant(2, 3, true);
  CHECK_THROWS_AS(SalesPanel({"a", "a"}, y, m, m), DataError);
  CHECK_THROWS_AS(SalesPanel({"a"}, y, m, m), std::invalid_argument);
  MaskMatrix short_mask = MaskMatrix::Constant(2, 2, true);
  CHECK_THROWS_AS(SalesPanel({"a", "b"}, y, short_mask, m), std::invalid_argument);
}

TEST_CASE("index_of and unknown products") {
  const auto p = make_panel({{1}, {2}});
  CHECK(p.index_of("p1") == 1);
  CHECK_THROWS_AS(p.index_of("zz"), std::out_of_range);
  CHECK_THROWS_AS(life_length(p, "zz"), std::out_of_range);
}

TEST_CASE("life_length spans first to last listed week") {
  std::vector<bool> weeks_3_to_7(10, false);
  for (int t = 3; t <= 7; ++t) weeks_3_to_7[t] = true;
  const auto p = make_panel({std::vector<std::int64_t>(10, 0), std::vector<std::int64_t>(10, 0)},
                            {weeks_3_to_7, std::vector<bool>(10, false)});
  CHECK(life_length(p, "p0") == 5);
  CHECK(life_length(p, "p1") == 0);
}

TEST_CASE("life_length with gaps counts the whole span") {
  const auto p = make_panel({{0, 0, 0, 0}}, {{false, true, false, true}});
  CHECK(life_length(p, "p0") == 3);
  CHECK(weeks_on_sale_through(p, 0, 3) == 2);
  CHECK(weeks_on_sale_through(p, 0, 0) == 0);
  CHECK(first_on_sale_week(p, 0) == 1);
}

TEST_CASE("slice_history returns prefixes") {
  const auto p = make_panel({{2, 5, 0, 9}});
  CHECK(slice_history(p, "p0", 0).size() == 1);
  CHECK(slice_history(p, "p0", 0)(0) == 2);
  const auto s = slice_history(p, "p0", 2);
  REQUIRE(s.size() == 3);
  CHECK(s(0) == 2);
  CHECK(s(1) == 5);
  CHECK(s(2) == 0);
  CHECK(slice_history(p, "p0", 3).size() == 4);
  CHECK_THROWS_AS(slice_history(p, "p0", 4), std::out_of_range);
  for (Week t = 0; t < 4; ++t) {
    for (Week u = t; u < 4; ++u) CHECK(slice_history(p, "p0", u).head(t + 1) == slice_history(p, "p0", t));
  }
}

TEST_CASE("catalog validation and category partition") {
  CHECK_THROWS_AS(Catalog({{"a", CatalogEntry{"", 1.0, {}}}}), DataError);
  CHECK_THROWS_AS(Catalog({{"a", CatalogEntry{"x", 0.0, {}}}}), DataError);
  const Catalog c({{"a", {"toys", 2.0, {{"brand", "b1"}}}},
                   {"b", {"food", 1.0, {}}},
                   {"c", {"toys", 3.0, {{"color", "red"}}}}});
  CHECK(c.category_count() == 2);
  CHECK(c.categories() == std::vector<CategoryId>{"food", "toys"});
  CHECK(c.attribute_names() == std::vector<std::string>{"brand", "color"});
  CHECK(c.members("toys") == std::vector<ProductId>{"a", "c"});
  std::size_t total = 0;
  for (const auto& k : c.categories()) total += c.members(k).size();
  CHECK(total == c.entries().size());

  const auto p = make_panel({{1}, {1}}, {}, {}, "q");
  CHECK_THROWS_AS(c.check_covers(p), DataError);
}
