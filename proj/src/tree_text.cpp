#include <algorithm>
#include <string>

#include <fmt/format.h>

#include "tabml/trees.hpp"

namespace tabml::trees {

namespace {

std::string join_labels(const Attribute& a, const std::vector<bool>& subset) {
    std::string out;
    for (std::size_t v = 0; v < a.value_count(); ++v) {
        if (!subset[v]) continue;
        if (!out.empty()) out += '|';
        out += a.labels()[v];
    }
    return out;
}

void render_node(const TreeModel& m, std::size_t at, std::size_t depth, std::string& out) {
    const Node& n = m.nodes[at];
    const std::string indent(depth * 2, ' ');
    if (n.is_leaf()) {
        const auto best = static_cast<std::size_t>(
            std::max_element(n.distribution.begin(), n.distribution.end()) - n.distribution.begin());
        out += fmt::format("{}-> {} ({}){}\n", indent, m.schema->class_attribute().labels()[best],
                           format_number(n.count), n.leaf_model ? " [nb]" : "");
        return;
    }
    const Attribute& a = m.schema->attribute(n.attribute);
    for (std::size_t k = 0; k < n.children.size(); ++k) {
        std::string test;
        switch (n.test) {
            case TestKind::Nominal: test = fmt::format("{} = {}", a.name(), a.labels()[k]); break;
            case TestKind::Threshold:
                test = fmt::format("{} {} {}", a.name(), k == 0 ? "<=" : ">", format_number(n.threshold));
                break;
            case TestKind::Subset:
                test = fmt::format("{} {} {{{}}}", a.name(), k == 0 ? "in" : "not in", join_labels(a, n.subset));
                break;
        }
        out += indent + test + '\n';
        render_node(m, n.children[k], depth + 1, out);
    }
}

struct Line {
    std::size_t depth;
    std::string_view body;
    std::size_t number;
};

struct ParsedTest {
    std::size_t attribute;
    TestKind kind;
    std::string_view op;    // "=", "<=", ">", "in", "not in"
    std::string_view rest;  // value text after the operator
};

class TreeParser {
public:
    TreeParser(std::vector<Line> lines, std::shared_ptr<const Schema> schema, Variant variant)
        : lines_(std::move(lines)), schema_(std::move(schema)) {
        model_.variant = variant;
        model_.schema = schema_;
    }

    TreeModel run() {
        if (lines_.empty()) throw DataError("tree text is empty");
        model_.nodes.emplace_back();
        parse_subtree(0, 0);
        if (pos_ != lines_.size()) fail(lines_[pos_], "unexpected line");
        model_.recount();
        return std::move(model_);
    }

private:
    [[noreturn]] void fail(const Line& line, std::string_view why) const {
        throw DataError(fmt::format("tree text line {}: {}", line.number, why));
    }

    ParsedTest parse_test(const Line& line) const {
        // Longest attribute name followed by a known operator wins.
        std::optional<ParsedTest> best;
        std::size_t best_len = 0;
        for (std::size_t i = 0; i < schema_->size(); ++i) {
            if (i == schema_->class_index()) continue;
            const Attribute& a = schema_->attribute(i);
            if (!line.body.starts_with(a.name()) || a.name().size() < best_len) continue;
            const std::string_view after = line.body.substr(a.name().size());
            static constexpr std::pair<std::string_view, TestKind> ops[] = {
                {" not in ", TestKind::Subset}, {" in ", TestKind::Subset}, {" <= ", TestKind::Threshold},
                {" > ", TestKind::Threshold},   {" = ", TestKind::Nominal},
            };
            for (const auto& [op, kind] : ops) {
                if (!after.starts_with(op)) continue;
                if ((kind == TestKind::Nominal || kind == TestKind::Subset) != a.is_nominal()) continue;
                best = ParsedTest{i, kind, trim(op), after.substr(op.size())};
                best_len = a.name().size();
                break;
            }
        }
        if (!best) fail(line, "not a recognised test or leaf");
        return *best;
    }

    std::vector<bool> parse_subset(const Line& line, const Attribute& a, std::string_view text) const {
        if (text.size() < 2 || text.front() != '{' || text.back() != '}') fail(line, "subset must be {a|b|...}");
        std::vector<bool> in(a.value_count(), false);
        for (std::string_view label : split(text.substr(1, text.size() - 2), '|')) {
            auto v = a.find_label(label);
            if (!v) fail(line, fmt::format("unknown value '{}'", label));
            in[*v] = true;
        }
        return in;
    }

    void make_leaf(std::size_t at, const Line& line) {
        std::string_view body = line.body.substr(3);
        bool nb = false;
        if (body.ends_with(" [nb]")) {
            nb = true;
            body.remove_suffix(5);
        }
        const auto open = body.rfind(" (");
        if (open == std::string_view::npos || !body.ends_with(")")) fail(line, "leaf must read '-> class (count)'");
        const auto label = body.substr(0, open);
        const auto count = parse_number(body.substr(open + 2, body.size() - open - 3));
        const auto cls = schema_->class_attribute().find_label(label);
        if (!cls) fail(line, fmt::format("unknown class '{}'", label));
        if (!count || *count < 0.0) fail(line, "bad leaf count");
        Node& n = model_.nodes[at];
        n.count = *count;
        n.class_counts.assign(schema_->class_count(), 0.0);
        n.class_counts[*cls] = *count;
        n.distribution.assign(schema_->class_count(), 0.0);
        n.distribution[*cls] = 1.0;
        (void)nb;  // the leaf model is not part of the text; the printed class stands in
    }

    void parse_subtree(std::size_t at, std::size_t depth) {
        if (pos_ >= lines_.size()) throw DataError("tree text ends before a subtree");
        const Line first = lines_[pos_];
        if (first.depth != depth) fail(first, "unexpected indentation");
        if (first.body.starts_with("-> ")) {
            ++pos_;
            make_leaf(at, first);
            return;
        }
        const ParsedTest head = parse_test(first);
        const Attribute& a = schema_->attribute(head.attribute);
        std::size_t arity = head.kind == TestKind::Nominal ? a.value_count() : 2;
        {
            Node& n = model_.nodes[at];
            n.test = head.kind;
            n.attribute = head.attribute;
        }
        std::vector<std::size_t> kids;
        for (std::size_t k = 0; k < arity; ++k) {
            if (pos_ >= lines_.size()) throw DataError("tree text ends inside a split");
            const Line line = lines_[pos_];
            if (line.depth != depth) fail(line, "split is missing branches");
            const ParsedTest t = parse_test(line);
            if (t.attribute != head.attribute || t.kind != head.kind) fail(line, "branch tests a different attribute");
            Node& n = model_.nodes[at];
            switch (t.kind) {
                case TestKind::Nominal:
                    if (a.find_label(t.rest) != k) fail(line, "nominal branches must follow value order");
                    break;
                case TestKind::Threshold: {
                    if (t.op != (k == 0 ? "<=" : ">")) fail(line, "threshold branches must read <= then >");
                    auto thr = parse_number(t.rest);
                    if (!thr) fail(line, "bad threshold");
                    if (k == 0) n.threshold = *thr;
                    else if (*thr != n.threshold) fail(line, "threshold branches disagree");
                    break;
                }
                case TestKind::Subset: {
                    if (t.op != (k == 0 ? "in" : "not in")) fail(line, "subset branches must read in then not in");
                    auto in = parse_subset(line, a, t.rest);
                    if (k == 0) n.subset = in;
                    else if (in != n.subset) fail(line, "subset branches disagree");
                    break;
                }
            }
            ++pos_;
            model_.nodes.emplace_back();
            const std::size_t child = model_.nodes.size() - 1;
            kids.push_back(child);
            model_.nodes[at].children.push_back(child);
            parse_subtree(child, depth + 1);
        }
        Node& n = model_.nodes[at];
        n.class_counts.assign(schema_->class_count(), 0.0);
        for (std::size_t c : kids) {
            n.count += model_.nodes[c].count;
            for (std::size_t j = 0; j < n.class_counts.size(); ++j) n.class_counts[j] += model_.nodes[c].class_counts[j];
        }
        n.distribution = n.class_counts;
        for (double& p : n.distribution)
            p = n.count > 0.0 ? p / n.count : 1.0 / static_cast<double>(n.distribution.size());
    }

    std::vector<Line> lines_;
    std::shared_ptr<const Schema> schema_;
    TreeModel model_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string render(const TreeModel& model) {
    std::string out;
    render_node(model, 0, 0, out);
    return out;
}

TreeModel parse_rendered(std::string_view text, std::shared_ptr<const Schema> schema, Variant variant) {
    std::vector<Line> lines;
    std::size_t number = 0;
    for (std::string_view raw : split_lines(text)) {
        ++number;
        if (trim(raw).empty()) continue;
        const std::size_t spaces = raw.find_first_not_of(' ');
        if (spaces % 2 != 0) throw DataError(fmt::format("tree text line {}: odd indentation", number));
        std::string_view body = raw.substr(spaces);
        while (!body.empty() && body.back() == ' ') body.remove_suffix(1);
        lines.push_back({spaces / 2, body, number});
    }
    return TreeParser(std::move(lines), std::move(schema), variant).run();
}

}  // namespace tabml::trees
