#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "tabml/experiment.hpp"

namespace tabml::experiment {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 720.0;
constexpr double kCx = 360.0;
constexpr double kCy = 370.0;
constexpr double kRadius = 230.0;
constexpr int kRings = 4;

constexpr std::string_view kTreeColor = "#1f5fa8";
constexpr std::string_view kBayesColor = "#b5531b";
constexpr std::string_view kOtherColor = "#666666";

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Smallest 1, 2 or 5 times a power of ten that is >= v.
double nice_ceiling(double v) {
    if (v <= 0.0) return 1.0;
    const double p = std::pow(10.0, std::floor(std::log10(v)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * p >= v * (1.0 - 1e-12)) return m * p;
    return 10.0 * p;
}

std::string_view color_of(std::string_view algorithm) {
    try {
        AlgorithmSpec spec;
        spec.name = std::string(algorithm);
        return spec.family() == Family::Tree ? kTreeColor : kBayesColor;
    } catch (const std::invalid_argument&) {
        return kOtherColor;
    }
}

std::string coord(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::string render_radar(std::string_view comparison_csv, std::string_view metric) {
    const auto lines = split_lines(comparison_csv);
    if (lines.empty()) throw DataError("comparison CSV is empty");
    const auto header = split(lines[0], ',');
    std::optional<std::size_t> name_col, metric_col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == "algorithm") name_col = i;
        if (trim(header[i]) == metric) metric_col = i;
    }
    if (!name_col) throw DataError("comparison CSV has no 'algorithm' column");
    if (!metric_col || metric == "algorithm") throw DataError(fmt::format("unknown metric '{}'", metric));

    std::vector<std::pair<std::string, double>> rows;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        if (trim(lines[l]).empty()) continue;
        const auto fields = split(lines[l], ',');
        if (fields.size() != header.size())
            throw DataError(fmt::format("comparison CSV line {}: expected {} fields", l + 1, header.size()));
        const auto name = trim(fields[*name_col]);
        const auto value = parse_number(trim(fields[*metric_col]));
        if (!value)
            throw DataError(fmt::format("comparison CSV line {}: {} for {} is not a number", l + 1, metric, name));
        rows.emplace_back(std::string(name), *value);
    }
    if (rows.size() < 3)
        throw DataError(fmt::format("a radar chart needs at least 3 algorithms, got {}; use a bar chart instead",
                                    rows.size()));

    double top = 0.0;
    for (const auto& [name, v] : rows) top = std::max(top, std::abs(v));
    const double scale = nice_ceiling(top);
    const std::size_t n = rows.size();
    auto point = [&](std::size_t i, double r) {
        const double angle = -std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        return std::pair{kCx + r * std::cos(angle), kCy + r * std::sin(angle)};
    };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"13\">\n",
        kWidth, kHeight);
    svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", kWidth, kHeight);
    svg += fmt::format("<text x=\"{}\" y=\"34\" text-anchor=\"middle\" font-size=\"18\">{} by algorithm</text>\n", kCx,
                       xml_escape(metric));

    // Rings with their values (the scale).
    svg += "<g fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\">\n";
    for (int k = 1; k <= kRings; ++k) {
        const double r = kRadius * k / kRings;
        std::string pts;
        for (std::size_t i = 0; i < n; ++i) {
            auto [x, y] = point(i, r);
            pts += fmt::format("{}{},{}", i ? " " : "", coord(x), coord(y));
        }
        svg += fmt::format("<polygon points=\"{}\"/>\n", pts);
    }
    svg += "</g>\n<g fill=\"#888888\" font-size=\"11\">\n";
    for (int k = 1; k <= kRings; ++k)
        svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", coord(kCx + 4), coord(kCy - kRadius * k / kRings - 3),
                           format_number(scale * k / kRings));
    svg += "</g>\n";

    // Axes, coloured by family, and their labels.
    for (std::size_t i = 0; i < n; ++i) {
        const auto color = color_of(rows[i].first);
        auto [x, y] = point(i, kRadius);
        svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n",
                           coord(kCx), coord(kCy), coord(x), coord(y), color,
                           color == kBayesColor ? " stroke-dasharray=\"6 3\"" : "");
        auto [lx, ly] = point(i, kRadius + 22.0);
        const char* anchor = std::abs(lx - kCx) < 1.0 ? "middle" : (lx > kCx ? "start" : "end");
        svg += fmt::format("<text class=\"axis-label\" x=\"{}\" y=\"{}\" text-anchor=\"{}\" fill=\"{}\">{} ({})</text>\n",
                           coord(lx), coord(ly + 4.0), anchor, color, xml_escape(rows[i].first),
                           format_number(rows[i].second));
    }

    // The metric polygon.
    std::string pts;
    for (std::size_t i = 0; i < n; ++i) {
        auto [x, y] = point(i, kRadius * std::abs(rows[i].second) / scale);
        pts += fmt::format("{}{},{}", i ? " " : "", coord(x), coord(y));
    }
    svg += fmt::format(
        "<polygon class=\"metric\" points=\"{}\" fill=\"#3a8f5c\" fill-opacity=\"0.25\" stroke=\"#2e7049\" "
        "stroke-width=\"2\"/>\n",
        pts);

    // Legend.
    const double ly = kHeight - 40.0;
    svg += fmt::format("<g font-size=\"12\">\n");
    svg += fmt::format("<line x1=\"30\" y1=\"{0}\" x2=\"60\" y2=\"{0}\" stroke=\"{1}\" stroke-width=\"2\"/>\n", ly,
                       kTreeColor);
    svg += fmt::format("<text x=\"66\" y=\"{}\">Tree methods</text>\n", ly + 4);
    svg += fmt::format(
        "<line x1=\"180\" y1=\"{0}\" x2=\"210\" y2=\"{0}\" stroke=\"{1}\" stroke-width=\"2\" "
        "stroke-dasharray=\"6 3\"/>\n",
        ly, kBayesColor);
    svg += fmt::format("<text x=\"216\" y=\"{}\">Bayes methods</text>\n", ly + 4);
    svg += fmt::format("<text x=\"340\" y=\"{}\">scale: centre 0, outer ring {} ({} rings)</text>\n", ly + 4,
                       format_number(scale), kRings);
    svg += "</g>\n</svg>\n";
    return svg;
}

void render_radar_file(const std::filesystem::path& csv, const std::filesystem::path& svg, std::string_view metric) {
    write_text_file(svg, render_radar(read_text_file(csv), metric));
}

}  // namespace tabml::experiment
