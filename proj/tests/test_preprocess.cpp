#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "tabml/preprocess.hpp"
#include "tabml/rng.hpp"

using namespace tabml;
using namespace tabml::preprocess;

namespace {

const char* kSchema = "x: numeric[0,100]\nn: nominal(A|B)\ny: nominal(E|U)\nclass: y\n";

Dataset table(const std::string& csv) { return fixtures::from_text(kSchema, "x,n,y\n" + csv); }

Dataset numbers(const std::vector<double>& xs) {
    Dataset d(parse_schema("x: numeric\ny: nominal(E)\nclass: y"));
    for (double x : xs) {
        const Cell row[] = {Cell::number(x), Cell::nominal(0)};
        d.add_row(row);
    }
    return d;
}

}  // namespace

TEST_CASE("mean and mode imputation") {
    const auto r = impute_missing(table("1,A,E\n2,A,E\n?,B,U\n3,?,U\n"));
    CHECK(r.dataset.at(2, 0) == Cell::number(2.0));
    CHECK(r.dataset.at(3, 1) == Cell::nominal(0));
    CHECK(r.report.imputed_cells == 2);
    CHECK(r.dataset.size() == 4);
    CHECK_FALSE(r.dataset.has_missing());
}

TEST_CASE("mode ties go to the lowest label") {
    const auto r = impute_missing(table("1,B,E\n2,A,E\n3,?,U\n"));
    CHECK(r.dataset.at(2, 1) == Cell::nominal(0));
}

TEST_CASE("imputation refuses an empty column or a missing class") {
    CHECK_THROWS_AS(impute_missing(table("?,A,E\n?,B,U\n")), DataError);
    CHECK_THROWS_AS(impute_missing(table("1,A,?\n2,B,U\n")), DataError);
}

TEST_CASE("drop_missing_critical treats the class as critical") {
    const Dataset d = table("1,A,E\n2,?,?\n?,B,U\n4,A,?\n5,B,U\n");
    const auto none = drop_missing_critical(d, {});
    CHECK(none.dataset.size() == 3);
    CHECK(none.report.dropped_missing_critical == 2);
    CHECK(none.dataset.at(1, 0).is_missing());
    const auto with_x = drop_missing_critical(d, {"x"});
    CHECK(with_x.dataset.size() == 2);
    CHECK(with_x.dataset.at(1, 0) == Cell::number(5));
    CHECK_THROWS_AS(drop_missing_critical(d, {"nope"}), DataError);
}

TEST_CASE("dedup keeps first occurrences") {
    const auto a = dedup(table("1,A,E\n1,A,E\n2,B,U\n"));
    CHECK(a.dataset.size() == 2);
    CHECK(a.report.dropped_duplicates == 1);
    const auto b = dedup(table("1,A,E\n2,B,U\n1,A,E\n1,A,E\n"));
    CHECK(b.dataset == table("1,A,E\n2,B,U\n"));
    CHECK(b.report.dropped_duplicates == 2);
    const Dataset distinct = table("1,A,E\n2,A,E\n1,B,E\n1,A,U\n");
    CHECK(dedup(distinct).dataset == distinct);
    CHECK(dedup(table("1,?,E\n1,?,E\n")).dataset.size() == 1);
}

TEST_CASE("out-of-range values are masked") {
    const auto r = mask_out_of_range(table("-1,A,E\n100,B,U\n100.5,A,E\n"));
    CHECK(r.report.out_of_range_cells == 2);
    CHECK(r.dataset.at(0, 0).is_missing());
    CHECK(r.dataset.at(1, 0) == Cell::number(100));
    CHECK(r.dataset.at(2, 0).is_missing());
}

TEST_CASE("equal-frequency cut points") {
    std::vector<double> ten(10);
    std::iota(ten.begin(), ten.end(), 1.0);
    CHECK(equal_frequency_cuts(ten, 2) == std::vector<double>{5.5});
    CHECK(equal_frequency_cuts({3, 3, 3, 3}, 5).empty());
    CHECK(equal_frequency_cuts({1, 1, 2, 2, 3, 3}, 4).size() <= 2);
    CHECK(equal_frequency_cuts({}, 3).empty());

    const auto r = discretize_equal_frequency(numbers(ten), 2, std::nullopt);
    CHECK(r.report.per_attribute_cut_points.at("x") == std::vector<double>{5.5});
    CHECK(r.dataset.schema().attribute(0).labels() == std::vector<std::string>{"(-inf..5.5]", "(5.5..+inf)"});
    CHECK(r.dataset.class_counts().size() == 1);
    std::vector<std::size_t> per_bin(2, 0);
    for (std::size_t i = 0; i < r.dataset.size(); ++i) ++per_bin[r.dataset.at(i, 0).index()];
    CHECK(per_bin == std::vector<std::size_t>{5, 5});
}

TEST_CASE("constant and low-cardinality columns") {
    const auto c = discretize_equal_frequency(numbers({7, 7, 7}), 4, std::nullopt);
    CHECK(c.dataset.schema().attribute(0).value_count() == 1);
    const auto t = discretize_equal_frequency(numbers({1, 2, 3, 1, 2, 3}), 4, std::nullopt);
    std::vector<bool> used(t.dataset.schema().attribute(0).value_count(), false);
    for (std::size_t i = 0; i < t.dataset.size(); ++i) used[t.dataset.at(i, 0).index()] = true;
    CHECK(std::count(used.begin(), used.end(), true) <= 3);
}

TEST_CASE("discretization errors") {
    CHECK_THROWS_AS(discretize_equal_frequency(table("1,A,E\n"), 3, std::vector<std::string>{"n"}), DataError);
    CHECK_THROWS(discretize_equal_frequency(numbers({1, 2}), 1, std::nullopt));
}

TEST_CASE("cut points are strictly increasing and order independent") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(1 + rng.uniform_index(60));
        for (auto& x : xs) x = std::round(rng.normal(2.8, 0.5) * 10) / 10;
        const std::size_t bins = 2 + rng.uniform_index(9);
        const auto cuts = equal_frequency_cuts(xs, bins);
        CHECK(cuts.size() < bins);
        CHECK(std::adjacent_find(cuts.begin(), cuts.end(), std::greater_equal<>()) == cuts.end());
        auto shuffled = xs;
        rng.shuffle(std::span<double>(shuffled));
        CHECK(equal_frequency_cuts(shuffled, bins) == cuts);
        // No equal values straddle a cut.
        for (double c : cuts) CHECK(std::find(xs.begin(), xs.end(), c) == xs.end());
    }
}

TEST_CASE("apply_cut_points reproduces training bins") {
    const auto r = discretize_equal_frequency(numbers({1, 2, 3, 4, 5, 6}), 3, std::nullopt);
    const Dataset again = apply_cut_points(numbers({1, 2, 3, 4, 5, 6}), r.report.per_attribute_cut_points);
    CHECK(again == r.dataset);
    const Dataset fresh = apply_cut_points(numbers({-50, 100}), r.report.per_attribute_cut_points);
    CHECK(fresh.at(0, 0) == Cell::nominal(0));
    CHECK(fresh.at(1, 0) == Cell::nominal(2));
}

TEST_CASE("pipeline leaves no missing cells and balances its report") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        std::string csv;
        const std::size_t n = 2 + rng.uniform_index(40);
        for (std::size_t i = 0; i < n; ++i) {
            auto miss = [&](std::string s) { return rng.uniform01() < 0.15 ? std::string("?") : s; };
            csv += miss(std::to_string(rng.uniform_index(8) * 15)) + "," + miss(rng.uniform01() < 0.5 ? "A" : "B") +
                   "," + (i == 0 ? std::string("E") : miss(rng.uniform01() < 0.5 ? "E" : "U")) + "\n";
        }
        const Dataset d = table("50,A,E\n" + csv);
        Options opt;
        opt.bins = 3;
        const auto r = run_pipeline(d, opt);
        CHECK_FALSE(r.dataset.has_missing());
        CHECK(r.report.balanced());
        CHECK(r.report.instances_in == d.size());
        CHECK(r.report.instances_out == r.dataset.size());
        CHECK(r.dataset.schema().attribute(0).is_nominal());
    }
}

TEST_CASE("report text and cut point csv") {
    Report r;
    r.per_attribute_cut_points["gpa"] = {2.5, 3.25};
    CHECK(r.cut_points_csv() == "gpa,2.5,3.25\n");
    r.instances_in = 5;
    r.instances_out = 3;
    r.dropped_duplicates = 1;
    r.dropped_missing_critical = 1;
    CHECK(r.balanced());
    CHECK(r.summary().find("instances in") != std::string::npos);
}
