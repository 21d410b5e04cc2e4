#pragma once

#include <string>
#include <vector>

#include "oracles/bayes_oracle.hpp"
#include "tabml/rng.hpp"
#include "tabml/tabular.hpp"

namespace fixtures {

inline tabml::Dataset from_text(const std::string& schema, const std::string& csv) {
    return tabml::parse_csv(csv, tabml::parse_schema(schema));
}

inline tabml::Dataset play_tennis() {
    return from_text(
        "outlook: nominal(sunny|overcast|rain)\n"
        "temperature: nominal(hot|mild|cool)\n"
        "humidity: nominal(high|normal)\n"
        "windy: nominal(false|true)\n"
        "play: nominal(no|yes)\n"
        "class: play\n",
        "outlook,temperature,humidity,windy,play\n"
        "sunny,hot,high,false,no\n"
        "sunny,hot,high,true,no\n"
        "overcast,hot,high,false,yes\n"
        "rain,mild,high,false,yes\n"
        "rain,cool,normal,false,yes\n"
        "rain,cool,normal,true,no\n"
        "overcast,cool,normal,true,yes\n"
        "sunny,mild,high,false,no\n"
        "sunny,cool,normal,false,yes\n"
        "rain,mild,normal,false,yes\n"
        "sunny,mild,normal,true,yes\n"
        "overcast,mild,high,true,yes\n"
        "overcast,hot,normal,false,yes\n"
        "rain,mild,high,true,no\n");
}

/// Each of the four (a, b) cells `copies` times, shuffled; class = a xor b.
inline tabml::Dataset xor_data(std::size_t copies, std::uint64_t seed = 1) {
    std::vector<std::string> lines;
    for (std::size_t k = 0; k < copies; ++k)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                lines.push_back(std::to_string(a) + "," + std::to_string(b) + "," + ((a ^ b) ? "t" : "f"));
    tabml::Rng rng(seed);
    rng.shuffle(std::span<std::string>(lines));
    std::string csv = "a,b,y\n";
    for (const auto& l : lines) csv += l + "\n";
    return from_text("a: nominal(0|1)\nb: nominal(0|1)\ny: nominal(f|t)\nclass: y\n", csv);
}

/// N=8: `id` is unique per row, `b` isolates three negatives, `c` is independent of the class.
inline tabml::Dataset id_code() {
    return from_text(
        "id: nominal(r1|r2|r3|r4|r5|r6|r7|r8)\nb: nominal(b0|b1)\nc: nominal(c0|c1)\ny: nominal(pos|neg)\nclass: y\n",
        "id,b,c,y\n"
        "r1,b0,c0,pos\n"
        "r2,b0,c0,pos\n"
        "r3,b0,c1,pos\n"
        "r4,b0,c1,pos\n"
        "r5,b0,c0,neg\n"
        "r6,b1,c0,neg\n"
        "r7,b1,c1,neg\n"
        "r8,b1,c1,neg\n");
}

/// An oracle table plus where its class column sits in the library's schema.
struct OracleCase {
    oracle::Table table;
    std::size_t class_position;
    double laplace;
    int frequency_limit;
};

inline tabml::Dataset to_dataset(const oracle::Table& t, std::size_t class_position) {
    std::vector<tabml::Attribute> attrs;
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        std::vector<std::string> labels;
        for (int v = 0; v < t.values[i]; ++v) labels.push_back("v" + std::to_string(v));
        attrs.push_back(tabml::Attribute::nominal("a" + std::to_string(i), labels));
    }
    std::vector<std::string> classes;
    for (int c = 0; c < t.classes; ++c) classes.push_back("c" + std::to_string(c));
    attrs.insert(attrs.begin() + static_cast<std::ptrdiff_t>(class_position), tabml::Attribute::nominal("cls", classes));
    tabml::Dataset d(tabml::Schema(std::move(attrs), class_position));
    for (std::size_t r = 0; r < t.rows.size(); ++r) d.add_row(std::span<const tabml::Cell>(
        [&] {
            std::vector<tabml::Cell> row;
            for (int v : t.rows[r]) row.push_back(tabml::Cell::nominal(static_cast<std::size_t>(v)));
            row.insert(row.begin() + static_cast<std::ptrdiff_t>(class_position),
                       tabml::Cell::nominal(static_cast<std::size_t>(t.labels[r])));
            return row;
        }()));
    return d;
}

/// Library row for an oracle query (kMissing -> Missing); the class cell is left Missing.
inline std::vector<tabml::Cell> to_row(const std::vector<int>& q, std::size_t class_position) {
    std::vector<tabml::Cell> row;
    for (int v : q) row.push_back(v == oracle::kMissing ? tabml::Cell::missing() : tabml::Cell::nominal(v));
    row.insert(row.begin() + static_cast<std::ptrdiff_t>(class_position), tabml::Cell::missing());
    return row;
}

/// Every query over the attributes' values plus Missing.
inline std::vector<std::vector<int>> all_queries(const std::vector<int>& values) {
    std::vector<std::vector<int>> out{{}};
    for (int v : values) {
        std::vector<std::vector<int>> next;
        for (const auto& q : out)
            for (int x = -1; x < v; ++x) {
                auto e = q;
                e.push_back(x);
                next.push_back(e);
            }
        out = std::move(next);
    }
    return out;
}

/// Fixed suite: 56 seeded tables (1-4 attributes, 2-3 values, 1-30 rows, 2-3 classes)
/// plus hand-made edge cases (constant attribute, unseen class, unseen value, one row).
inline std::vector<OracleCase> oracle_suite() {
    std::vector<OracleCase> out;
    tabml::Rng rng(20240607);
    for (int s = 0; s < 56; ++s) {
        oracle::Table t;
        t.classes = 2 + static_cast<int>(rng.uniform_index(2));
        const int attrs = 1 + static_cast<int>(rng.uniform_index(4));
        for (int a = 0; a < attrs; ++a) t.values.push_back(2 + static_cast<int>(rng.uniform_index(2)));
        const int rows = 1 + static_cast<int>(rng.uniform_index(30));
        // Half the tables carry class signal in the first attribute.
        const bool signal = s % 2 == 0;
        for (int r = 0; r < rows; ++r) {
            const int c = static_cast<int>(rng.uniform_index(t.classes));
            std::vector<int> row;
            for (int a = 0; a < attrs; ++a) {
                int v = static_cast<int>(rng.uniform_index(t.values[a]));
                if (signal && a == 0 && rng.uniform01() < 0.7) v = c % t.values[a];
                row.push_back(v);
            }
            t.rows.push_back(row);
            t.labels.push_back(c);
        }
        const double laplace = (s % 3 == 0) ? 0.5 : 1.0;
        const int m = (s % 4 == 1) ? 2 : 1;
        out.push_back({t, rng.uniform_index(attrs + 1), laplace, m});
    }
    // Constant attribute and an unseen class.
    out.push_back({{3, {2, 2, 3}, {{0, 0, 1}, {0, 1, 2}, {0, 1, 0}, {0, 0, 2}, {0, 1, 1}}, {0, 1, 1, 0, 0}}, 3, 1.0, 1});
    // Value v2 of a1 never occurs.
    out.push_back({{2, {2, 3}, {{0, 0}, {1, 1}, {1, 0}, {0, 1}}, {0, 1, 1, 0}}, 0, 1.0, 1});
    // One training row.
    out.push_back({{2, {3, 3, 2, 2}, {{2, 1, 0, 1}}, {1}}, 2, 1.0, 1});
    // Exact duplicates of two attributes.
    out.push_back({{2, {2, 2, 2}, {{0, 0, 1}, {1, 1, 1}, {1, 1, 0}, {0, 0, 0}, {1, 1, 1}, {0, 0, 1}}, {0, 1, 1, 0, 1, 0}},
                   1, 1.0, 1});
    return out;
}

}  // namespace fixtures
