#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>

#include "fixtures.hpp"
#include "oracles/bayes_oracle.hpp"
#include "tabml/bayes.hpp"
#include "tabml/rng.hpp"

using namespace tabml;
using namespace tabml::bayes;

namespace {

Dataset hand_example() {
    return fixtures::from_text("A: nominal(0|1)\ny: nominal(pos|neg)\nclass: y\n",
                               "A,y\n1,pos\n1,pos\n1,pos\n0,pos\n1,neg\n0,neg\n0,neg\n0,neg\n");
}

std::vector<Cell> query(std::vector<int> values, std::size_t class_pos) { return fixtures::to_row(values, class_pos); }

std::size_t schema_index(std::size_t attr, std::size_t class_pos) { return attr < class_pos ? attr : attr + 1; }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t c = 0; c < a.size(); ++c) d = std::max(d, std::abs(a[c] - b[c]));
    return a.size() == b.size() ? d : 1e300;
}

std::vector<BayesModel> all_five(const Dataset& d, double laplace = 1.0) {
    return {train_naive_bayes(d, laplace), train_aode(d, laplace), train_waode(d, laplace), train_hnb(d, laplace),
            train_tan(d, laplace)};
}

/// Class = majority of three bits; all eight combinations appear twice.
Dataset majority3() {
    std::string csv = "a,b,c,y\n";
    for (int rep = 0; rep < 2; ++rep)
        for (int m = 0; m < 8; ++m) {
            const int a = m & 1, b = m >> 1 & 1, c = m >> 2 & 1;
            csv += std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "," +
                   (a + b + c >= 2 ? "hi" : "lo") + "\n";
        }
    return fixtures::from_text("a: nominal(0|1)\nb: nominal(0|1)\nc: nominal(0|1)\ny: nominal(lo|hi)\nclass: y\n", csv);
}

}  // namespace

TEST_CASE("naive bayes hand arithmetic") {
    const BayesModel m = train_naive_bayes(hand_example());
    CHECK(m.cube.class_total(0) == 4);
    const auto p = m.distribution(query({1}, 1));
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(m.distribution(query({oracle::kMissing}, 1))[0] == doctest::Approx(0.5));
}

TEST_CASE("single-class data gives a certain posterior") {
    const Dataset d = fixtures::from_text("a: nominal(x|y)\nc: nominal(only)\nclass: c\n", "a,c\nx,only\ny,only\n");
    for (const auto& m : all_five(d)) CHECK(m.distribution(query({0}, 1)) == std::vector<double>{1.0});
}

TEST_CASE("naive bayes is blind to xor, tan is not") {
    const Dataset d = fixtures::xor_data(5);
    const BayesModel nb = train_naive_bayes(d);
    const BayesModel tan = train_tan(d);
    REQUIRE(tan.tree_parents[1]);
    CHECK(*tan.tree_parents[1] == 0);
    CHECK_FALSE(tan.tree_parents[0]);
    for (std::size_t r = 0; r < d.size(); ++r) {
        CHECK(nb.distribution(d.row(r))[0] == doctest::Approx(0.5).epsilon(1e-12));
        const auto q = tan.distribution(d.row(r));
        CHECK((q[1] > q[0]) == (d.class_of(r) == 1));
    }
}

TEST_CASE("numeric attributes use per-class gaussians") {
    const Dataset d = fixtures::from_text("x: numeric\ny: nominal(a|b)\nclass: y\n", "x,y\n1,a\n2,a\n3,a\n10,b\n12,b\n");
    const BayesModel m = train_naive_bayes(d);
    CHECK(m.gaussians[0][0].mean == doctest::Approx(2.0));
    CHECK(m.gaussians[0][0].variance == doctest::Approx(1.0));
    CHECK(m.gaussians[0][1].variance == doctest::Approx(2.0));
    const Cell near_a[] = {Cell::number(2.5), Cell::missing()};
    CHECK(m.distribution(near_a)[0] > 0.99);
    const Dataset flat = fixtures::from_text("x: numeric\ny: nominal(a|b)\nclass: y\n", "x,y\n1,a\n1,a\n5,b\n");
    CHECK(train_naive_bayes(flat).gaussians[0][0].variance == kVarianceFloor);
    CHECK_THROWS_AS(train_aode(d), DataError);
    CHECK_THROWS_AS(train_waode(d), DataError);
    CHECK_THROWS_AS(train_hnb(d), DataError);
    CHECK_THROWS_AS(train_tan(d), DataError);
}

TEST_CASE("training preconditions") {
    Dataset empty(parse_schema("a: nominal(x)\ny: nominal(p|q)\nclass: y"));
    CHECK_THROWS_AS(train_naive_bayes(empty), DataError);
    CHECK_THROWS_AS(train_hnb(empty), DataError);
    const Dataset gaps = fixtures::from_text("a: nominal(x|z)\ny: nominal(p|q)\nclass: y\n", "a,y\n?,p\nx,q\n");
    CHECK_THROWS_AS(train_waode(gaps), DataError);
    CHECK_THROWS_AS(train_naive_bayes(gaps), DataError);
    CHECK_THROWS(train_naive_bayes(hand_example(), -1.0));
}

TEST_CASE("laplace zero with an unseen class is refused at scoring time") {
    const Dataset d = fixtures::from_text("a: nominal(x|z)\ny: nominal(p|q)\nclass: y\n", "a,y\nx,p\nz,p\n");
    const BayesModel m = train_naive_bayes(d, 0.0);
    CHECK_THROWS(m.distribution(query({0}, 1)));
}

TEST_CASE("single attribute: aode, hnb and tan reduce to simpler models") {
    const Dataset d = hand_example();
    const auto nb = train_naive_bayes(d).distribution(query({1}, 1));
    // One SPODE: P(c, a) = (N(c,a)+1)/(N+K*V) = 4/12 vs 2/12.
    const auto aode = train_aode(d).distribution(query({1}, 1));
    CHECK(aode[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK((aode[0] > aode[1]) == (nb[0] > nb[1]));
    const auto hnb = train_hnb(d).distribution(query({1}, 1));
    CHECK(hnb[0] == doctest::Approx(nb[0]).epsilon(1e-12));
    const BayesModel tan = train_tan(d);
    CHECK_FALSE(tan.tree_parents[0]);
    CHECK(tan.distribution(query({1}, 1))[0] == doctest::Approx(nb[0]).epsilon(1e-12));
}

TEST_CASE("aode falls back to naive bayes below the frequency limit") {
    const Dataset d = fixtures::from_text("a: nominal(x|z)\nb: nominal(u|v)\ny: nominal(p|q)\nclass: y\n",
                                          "a,b,y\nx,u,p\nx,u,p\nz,v,q\nx,v,q\n");
    const auto row = query({1, 1}, 2);
    const auto a = train_aode(d, 1.0, 5).distribution(row);
    const auto b = train_naive_bayes(d).distribution(row);
    CHECK(max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("waode weights") {
    // a is independent of the class, b determines it.
    const Dataset d = fixtures::from_text("a: nominal(x|z)\nb: nominal(u|v)\ny: nominal(p|q)\nclass: y\n",
                                          "a,b,y\nx,u,p\nz,u,p\nx,v,q\nz,v,q\n");
    const BayesModel w = train_waode(d, 1e-12);
    CHECK(w.parent_weights[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(w.parent_weights[1] == doctest::Approx(1.0).epsilon(1e-9));
    const Dataset skew = fixtures::from_text("b: nominal(u|v|w)\ny: nominal(p|q|r)\nclass: y\n",
                                             "b,y\nu,p\nu,p\nu,p\nv,q\nw,r\nw,r\n");
    const double h = -(0.5 * std::log2(0.5) + (1 / 6.0) * std::log2(1 / 6.0) + (1 / 3.0) * std::log2(1 / 3.0));
    CHECK(train_waode(skew, 1e-12).parent_weights[0] == doctest::Approx(h).epsilon(1e-9));
}

TEST_CASE("equal waode weights keep aode's predictions") {
    const Dataset d = majority3();
    const BayesModel w = train_waode(d), a = train_aode(d);
    CHECK(w.parent_weights[0] > 0);
    CHECK(w.parent_weights[0] == doctest::Approx(w.parent_weights[1]).epsilon(1e-12));
    CHECK(w.parent_weights[0] == doctest::Approx(w.parent_weights[2]).epsilon(1e-12));
    for (const auto& q : fixtures::all_queries({2, 2, 2})) {
        const auto pw = w.distribution(query(q, 3)), pa = a.distribution(query(q, 3));
        CHECK((pw[1] > pw[0]) == (pa[1] > pa[0]));
    }
}

TEST_CASE("hnb hidden weights") {
    const Dataset copies = fixtures::from_text("a: nominal(x|z)\nb: nominal(x|z)\ny: nominal(p|q)\nclass: y\n",
                                               "a,b,y\nx,x,p\nz,z,p\nx,x,q\nz,z,q\nx,x,p\n");
    const BayesModel h = train_hnb(copies);
    CHECK(h.hidden_weights[0][1] == doctest::Approx(1.0));
    CHECK(h.hidden_weights[1][0] == doctest::Approx(1.0));

    const BayesModel s = train_hnb(majority3());
    CHECK(s.hidden_weights[0][1] == doctest::Approx(s.hidden_weights[0][2]).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i) {
        double row = 0;
        for (std::size_t j = 0; j < 3; ++j) row += s.hidden_weights[i][j];
        CHECK(row == doctest::Approx(1.0));
        CHECK(s.hidden_weights[i][i] == 0.0);
    }
}

TEST_CASE("tan builds a spanning tree") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(4));
        oracle::Table t;
        t.values.assign(n, 2);
        for (int r = 0; r < 25; ++r) {
            std::vector<int> row;
            for (int a = 0; a < n; ++a) row.push_back(static_cast<int>(rng.uniform_index(2)));
            t.rows.push_back(row);
            t.labels.push_back(static_cast<int>(rng.uniform_index(2)));
        }
        const BayesModel m = train_tan(fixtures::to_dataset(t, n));
        int edges = 0;
        for (int a = 0; a < n; ++a) {
            if (!m.tree_parents[a]) continue;
            ++edges;
            // Walking parents must reach the root without revisiting a node.
            std::size_t hops = 0, at = static_cast<std::size_t>(a);
            while (m.tree_parents[at] && hops <= static_cast<std::size_t>(n)) {
                at = *m.tree_parents[at];
                ++hops;
            }
            CHECK(at == 0);
        }
        CHECK(edges == n - 1);
        CHECK_FALSE(m.tree_parents[n]);
    }
}

TEST_CASE("maximum spanning tree tie-break prefers lower pairs") {
    const std::vector<std::vector<double>> w(3, std::vector<double>(3, 1.0));
    const std::size_t nodes[] = {0, 1, 2};
    const auto parents = maximum_spanning_tree(3, nodes, w);
    CHECK_FALSE(parents[0]);
    CHECK(parents[1] == 0u);
    CHECK(parents[2] == 0u);
}

TEST_CASE("posteriors match the brute-force oracle") {
    const auto suite = fixtures::oracle_suite();
    Rng pick(99);
    for (std::size_t s = 0; s < suite.size(); ++s) {
        const auto& oc = suite[s];
        const auto& t = oc.table;
        const std::size_t cp = oc.class_position;
        const Dataset d = fixtures::to_dataset(t, cp);
        CAPTURE(s);
        const BayesModel nb = train_naive_bayes(d, oc.laplace);
        const BayesModel aode = train_aode(d, oc.laplace, static_cast<std::size_t>(oc.frequency_limit));
        const BayesModel waode = train_waode(d, oc.laplace);
        const BayesModel hnb = train_hnb(d, oc.laplace);
        const BayesModel tan = train_tan(d, oc.laplace);

        const int n = static_cast<int>(t.values.size());
        for (int i = 0; i < n; ++i) {
            const std::size_t si = schema_index(i, cp);
            CHECK(std::abs(waode.parent_weights[si] - oracle::mutual_info(t, i, oc.laplace)) < 1e-12);
        }
        const auto hw = oracle::hnb_weights(t, oc.laplace);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) CHECK(std::abs(hnb.hidden_weights[schema_index(i, cp)][schema_index(j, cp)] - hw[i][j]) < 1e-12);

        // TAN: the learned tree must have maximal weight; score with its own orientation.
        std::vector<oracle::Edge> edges;
        std::vector<int> to_attr(d.width(), -1);
        for (int i = 0; i < n; ++i) to_attr[schema_index(i, cp)] = i;
        for (int i = 0; i < n; ++i)
            if (const auto& p = tan.tree_parents[schema_index(i, cp)]) edges.emplace_back(to_attr[*p], i);
        CHECK(static_cast<int>(edges.size()) == std::max(0, n - 1));
        CHECK(std::abs(oracle::tree_weight(t, edges, oc.laplace) - oracle::best_tree_weight(t, oc.laplace)) < 1e-12);
        const auto parent = oracle::orient(n, edges);

        auto queries = fixtures::all_queries(t.values);
        // Keep runtime bounded on the larger tables.
        while (queries.size() > 96) queries.erase(queries.begin() + static_cast<std::ptrdiff_t>(pick.uniform_index(queries.size())));
        for (const auto& q : queries) {
            const auto row = query(q, cp);
            CHECK(max_abs_diff(nb.distribution(row), oracle::naive_bayes(t, q, oc.laplace)) < 1e-12);
            CHECK(max_abs_diff(aode.distribution(row), oracle::aode(t, q, oc.laplace, oc.frequency_limit)) < 1e-12);
            CHECK(max_abs_diff(waode.distribution(row), oracle::waode(t, q, oc.laplace)) < 1e-12);
            CHECK(max_abs_diff(hnb.distribution(row), oracle::hnb(t, q, hw, oc.laplace)) < 1e-12);
            CHECK(max_abs_diff(tan.distribution(row), oracle::tan(t, q, parent, oc.laplace)) < 1e-12);
        }
    }
}

TEST_CASE("frequency cube marginals") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        oracle::Table t;
        t.classes = 2 + static_cast<int>(rng.uniform_index(3));
        const int n = 1 + static_cast<int>(rng.uniform_index(4));
        for (int a = 0; a < n; ++a) t.values.push_back(1 + static_cast<int>(rng.uniform_index(4)));
        const int rows = 1 + static_cast<int>(rng.uniform_index(40));
        for (int r = 0; r < rows; ++r) {
            std::vector<int> row;
            for (int a = 0; a < n; ++a) row.push_back(static_cast<int>(rng.uniform_index(t.values[a])));
            t.rows.push_back(row);
            t.labels.push_back(static_cast<int>(rng.uniform_index(t.classes)));
        }
        const std::size_t cp = rng.uniform_index(n + 1);
        const auto cube = FrequencyCube::count(fixtures::to_dataset(t, cp));
        double sum_c = 0;
        for (int c = 0; c < t.classes; ++c) {
            sum_c += cube.class_total(c);
            for (int i = 0; i < n; ++i) {
                const std::size_t si = schema_index(i, cp);
                double sum_v = 0;
                for (int v = 0; v < t.values[i]; ++v) {
                    sum_v += cube.count(c, si, v);
                    for (int j = 0; j < n; ++j) {
                        if (j == i) continue;
                        const std::size_t sj = schema_index(j, cp);
                        double sum_w = 0;
                        for (int w = 0; w < t.values[j]; ++w) {
                            const double pc = cube.pair_count(c, si, v, sj, w);
                            CHECK(pc <= std::min(cube.count(c, si, v), cube.count(c, sj, w)));
                            sum_w += pc;
                        }
                        CHECK(sum_w == cube.count(c, si, v));
                    }
                }
                CHECK(sum_v == cube.class_total(c));
            }
        }
        CHECK(sum_c == cube.total());
        CHECK(cube.total() == rows);
    }
}

TEST_CASE("distributions are normalized and training is deterministic") {
    for (const auto& oc : fixtures::oracle_suite()) {
        const Dataset d = fixtures::to_dataset(oc.table, oc.class_position);
        const auto a = all_five(d, oc.laplace), b = all_five(d, oc.laplace);
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k] == b[k]);
            for (std::size_t r = 0; r < d.size(); ++r) {
                const auto p = a[k].distribution(d.row(r));
                double sum = 0;
                for (double x : p) {
                    CHECK(x >= 0.0);
                    sum += x;
                }
                CHECK(std::abs(sum - 1.0) < 1e-9);
            }
        }
    }
}

TEST_CASE("a determining attribute wins for every learner as laplace vanishes") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        oracle::Table t;
        t.classes = 3;
        t.values = {3, 2, 3};
        for (int r = 0; r < 30; ++r) {
            const int c = static_cast<int>(rng.uniform_index(3));
            t.rows.push_back({static_cast<int>(rng.uniform_index(3)), static_cast<int>(rng.uniform_index(2)), c});
            t.labels.push_back(c);
        }
        const Dataset d = fixtures::to_dataset(t, 1);
        for (const auto& m : all_five(d, 1e-9))
            for (std::size_t r = 0; r < d.size(); ++r) {
                const auto p = m.distribution(d.row(r));
                CHECK(std::max_element(p.begin(), p.end()) - p.begin() == t.labels[r]);
            }
    }
}

TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::NaiveBayes, Variant::AODE, Variant::WAODE, Variant::HNB, Variant::TAN})
        CHECK(parse_variant(variant_name(v)) == v);
    CHECK_FALSE(parse_variant("K2"));
}
