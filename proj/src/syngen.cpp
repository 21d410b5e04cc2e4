#include "tabml/syngen.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "tabml/rng.hpp"

namespace tabml::syngen {

namespace {

struct AttributeDef {
    const char* name;
    std::vector<std::string> labels;  // empty: GPA
};

const std::vector<AttributeDef>& definitions() {
    static const std::vector<AttributeDef> defs = {
        {"Prefix", {"Male", "Female", "Dr.", "Associate Prof. Dr", "Assistant Prof."}},
        {"Gender", {"Male", "Female"}},
        {"Province", {"Bangkok", "Suratthani", "ChiangMai", "Lampang", "Phrae", "Nan", "ChiangRai"}},
        {"Degree", {"Bachelor", "Ph.D.", "Master"}},
        {"Educational background", {"B.Sc", "B.L.A", "M.A.", "M.B.A."}},
        {"Faculty",
         {"Science", "Agricultural Production", "Economics", "Business Administration",
          "Engineering and Agro-Industry", "Fisheries Technology"}},
        {"program",
         {"Computer science", "Information technology", "Agronomy", "Economics", "Accounting", "Food technology"}},
        {"GPA", {}},
        {"WorkProvince", {"Bangkok", "Suratthani", "ChiangMai", "Lampang", "NoIdentify"}},
        {"Status", {"Employed", "Unemployed", "Undetermined"}},
        {"Talent", {"Computer", "Art", "Food physical", "Sport", "Language", "NoIdentify"}},
        {"Position", {"Chef", "Trad", "boss", "Officer", "Farmer", "NoIdentify"}},
        {"Satisfaction", {"Pleased", "Lack_of_consistence", "Other", "NoIdentify"}},
        {"PeriodTimeFindwork", {"FourToSix", "OneToThree", "SevenToNine", "TenToTwelve", "MoreThanYear", "NotFind"}},
        {"WorkDirectGraduate", {"Direct", "NotDirect", "NoIdentify"}},
        {"ApplyKnowlageWithWork", {"Moderate", "NoIdentify", "Much", "Little"}},
        {"ResonNotWork", {"Soldier", "Business", "NotFindWork", "Study", "NoIdentify"}},
        {"ProblemOfWork", {"Lack_Of_support", "NoProblem", "LowSalary", "NoIdentify"}},
        {"RequirementsOfStudy", {"NoNeed", "Need"}},
        {"LevelOfStudyRequired", {"Master", "Graduate_Diploma", "NoIdentify", "Doctoral"}},
        {"InstitutionNeed", {"Private", "Aboard", "Government", "NoIdentify"}},
    };
    return defs;
}

constexpr std::size_t kFaculty = 5;
constexpr std::size_t kGpa = 7;
constexpr std::size_t kPeriod = 13;
constexpr std::size_t kWorkDirect = 14;

const std::vector<std::string> kRawStatus = {"Employed", "UnemployedandNotStudy", "Study", "Soldier", "Ordained"};

double normal_cdf(double x, double mean, double sd) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); }

std::vector<double> mix(const std::vector<std::vector<double>>& per_class, const std::array<double, 3>& prior) {
    std::vector<double> m(per_class[0].size(), 0.0);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t v = 0; v < m.size(); ++v) m[v] += prior[c] * per_class[c][v];
    return m;
}

/// Truncated to [0,4] by rejection, rounded to 0.01.
double draw_gpa(Rng& rng, std::pair<double, double> ms) {
    double x;
    do {
        x = rng.normal(ms.first, ms.second);
    } while (x < 0.0 || x > 4.0);
    return std::round(x * 100.0) / 100.0;
}

/// P(GPA == k/100) under the truncated, rounded normal.
std::vector<double> gpa_pmf(std::pair<double, double> ms) {
    const auto [mean, sd] = ms;
    const double z = normal_cdf(4.0, mean, sd) - normal_cdf(0.0, mean, sd);
    std::vector<double> p(401);
    for (std::size_t k = 0; k <= 400; ++k) {
        const double g = static_cast<double>(k) / 100.0;
        const double lo = std::max(g - 0.005, 0.0), hi = std::min(g + 0.005, 4.0);
        p[k] = (normal_cdf(hi, mean, sd) - normal_cdf(lo, mean, sd)) / z;
    }
    return p;
}

}  // namespace

const InformativeTables& informative_tables() {
    static const InformativeTables t = {
        // Science, AgriProd, Economics, BusAdmin, EngAgro, Fisheries
        {{0.25, 0.20, 0.20, 0.15, 0.15, 0.05},
         {0.05, 0.10, 0.15, 0.20, 0.20, 0.30},
         {0.10, 0.30, 0.10, 0.10, 0.10, 0.30}},
        // FourToSix, OneToThree, SevenToNine, TenToTwelve, MoreThanYear, NotFind
        {{0.30, 0.50, 0.12, 0.07, 0.005, 0.005},
         {0.002, 0.002, 0.002, 0.002, 0.002, 0.99},
         {0.002, 0.002, 0.002, 0.002, 0.99, 0.002}},
        // Direct, NotDirect, NoIdentify
        {{0.78, 0.215, 0.005}, {0.005, 0.005, 0.99}, {0.005, 0.005, 0.99}},
        {{{2.9, 0.4}, {2.3, 0.35}, {3.4, 0.3}}},
    };
    return t;
}

void validate(const GenSpec& spec) {
    double sum = 0.0;
    for (double p : spec.class_proportions) {
        if (!(p >= 0.0)) throw std::invalid_argument("class proportions must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument(fmt::format("class proportions sum to {}, not 1", sum));
    if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) throw std::invalid_argument("noise must lie in [0, 1]");
    if (!(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0))
        throw std::invalid_argument("missing_rate must lie in [0, 1)");
    if (!(spec.duplicate_rate >= 0.0 && spec.duplicate_rate < 1.0))
        throw std::invalid_argument("duplicate_rate must lie in [0, 1)");
}

Schema graduate_schema(bool raw_status) {
    std::vector<Attribute> attrs;
    for (std::size_t i = 0; i < definitions().size(); ++i) {
        const auto& d = definitions()[i];
        if (i == kGpa)
            attrs.push_back(Attribute::numeric(d.name, NumericRange{0.0, 4.0}));
        else if (i == kStatusIndex && raw_status)
            attrs.push_back(Attribute::nominal(d.name, kRawStatus));
        else
            attrs.push_back(Attribute::nominal(d.name, d.labels));
    }
    return Schema(std::move(attrs), kStatusIndex);
}

const std::vector<std::pair<std::string, std::string>>& status_mapping() {
    static const std::vector<std::pair<std::string, std::string>> mapping = {
        {"Employed", "Employed"},
        {"UnemployedandNotStudy", "Unemployed"},
        {"Study", "Undetermined"},
        {"Soldier", "Undetermined"},
        {"Ordained", "Undetermined"},
    };
    return mapping;
}

Dataset generate(const GenSpec& spec) {
    validate(spec);
    const auto& tables = informative_tables();
    const auto& defs = definitions();
    auto schema = std::make_shared<const Schema>(graduate_schema(spec.raw_status));
    Dataset ds(schema);
    ds.reserve(spec.n + static_cast<std::size_t>(std::ceil(spec.n * spec.duplicate_rate * 1.5)) + 8);
    Rng rng(spec.seed);

    const auto faculty_marginal = mix(tables.faculty, spec.class_proportions);
    const auto period_marginal = mix(tables.period, spec.class_proportions);
    const auto direct_marginal = mix(tables.work_direct, spec.class_proportions);
    const std::vector<double> proportions(spec.class_proportions.begin(), spec.class_proportions.end());

    std::vector<Cell> row(defs.size());
    for (std::size_t r = 0; r < spec.n; ++r) {
        const std::size_t c = rng.categorical(proportions);
        const bool noisy = rng.uniform01() < spec.noise;
        for (std::size_t a = 0; a < defs.size(); ++a) {
            switch (a) {
                case kStatusIndex:
                    if (!spec.raw_status) {
                        row[a] = Cell::nominal(c);
                    } else if (c == 2) {
                        row[a] = Cell::nominal(2 + rng.uniform_index(3));
                    } else {
                        row[a] = Cell::nominal(c);
                    }
                    break;
                case kFaculty:
                    row[a] = Cell::nominal(rng.categorical(noisy ? faculty_marginal : tables.faculty[c]));
                    break;
                case kPeriod:
                    row[a] = Cell::nominal(rng.categorical(noisy ? period_marginal : tables.period[c]));
                    break;
                case kWorkDirect:
                    row[a] = Cell::nominal(rng.categorical(noisy ? direct_marginal : tables.work_direct[c]));
                    break;
                case kGpa: {
                    const std::size_t from = noisy ? rng.categorical(proportions) : c;
                    row[a] = Cell::number(draw_gpa(rng, tables.gpa[from]));
                    break;
                }
                default: row[a] = Cell::nominal(rng.uniform_index(defs[a].labels.size())); break;
            }
        }
        for (std::size_t a = 0; a < defs.size(); ++a)
            if (a != kStatusIndex && rng.uniform01() < spec.missing_rate) row[a] = Cell::missing();
        ds.add_row(row);
        if (rng.uniform01() < spec.duplicate_rate) {
            const std::size_t src = rng.uniform_index(ds.size());
            const auto copy = ds.row(src);
            row.assign(copy.begin(), copy.end());
            ds.add_row(row);
        }
    }
    return ds;
}

Dataset collapse_status(const Dataset& raw, const std::vector<std::pair<std::string, std::string>>& mapping) {
    const Schema& s = raw.schema();
    const std::size_t ci = s.class_index();
    auto target = std::make_shared<const Schema>(graduate_schema(false));
    if (s.size() != target->size() || ci != target->class_index())
        throw DataError("collapse_status expects the 21-attribute graduate schema");
    const Attribute& outcomes = target->class_attribute();
    std::vector<std::optional<std::size_t>> to_outcome(s.class_count());
    for (std::size_t v = 0; v < s.class_count(); ++v) {
        for (const auto& [from, to] : mapping)
            if (from == s.class_attribute().labels()[v]) to_outcome[v] = outcomes.find_label(to);
        if (!to_outcome[v])
            throw DataError(fmt::format("Status value '{}' has no outcome mapping", s.class_attribute().labels()[v]));
    }
    Dataset out(target);
    out.reserve(raw.size());
    std::vector<Cell> row;
    for (std::size_t r = 0; r < raw.size(); ++r) {
        const auto src = raw.row(r);
        row.assign(src.begin(), src.end());
        if (!row[ci].is_missing()) row[ci] = Cell::nominal(*to_outcome[row[ci].index()]);
        out.add_row(row);
    }
    return out;
}

double bayes_rate(const GenSpec& spec) {
    validate(spec);
    const auto& t = informative_tables();
    const auto& pi = spec.class_proportions;
    const double nu = spec.noise;
    const auto fm = mix(t.faculty, pi), pm = mix(t.period, pi), dm = mix(t.work_direct, pi);
    std::array<std::vector<double>, 3> gpa;
    for (std::size_t c = 0; c < 3; ++c) gpa[c] = gpa_pmf(t.gpa[c]);
    std::vector<double> gm(401, 0.0);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < 401; ++k) gm[k] += pi[c] * gpa[c][k];

    // Joint P(x, c) = pi_c [ (1-nu) prod_i P(x_i | c) + nu prod_i m(x_i) ]; non-informative
    // attributes are independent of everything and drop out.
    double correct = 0.0;
    for (std::size_t f = 0; f < fm.size(); ++f)
        for (std::size_t p = 0; p < pm.size(); ++p)
            for (std::size_t d = 0; d < dm.size(); ++d) {
                const double marg = fm[f] * pm[p] * dm[d];
                std::array<double, 3> disc;
                for (std::size_t c = 0; c < 3; ++c) disc[c] = t.faculty[c][f] * t.period[c][p] * t.work_direct[c][d];
                for (std::size_t k = 0; k < 401; ++k) {
                    double best = 0.0;
                    for (std::size_t c = 0; c < 3; ++c)
                        best = std::max(best, pi[c] * ((1.0 - nu) * disc[c] * gpa[c][k] + nu * marg * gm[k]));
                    correct += best;
                }
            }
    return correct;
}

}  // namespace tabml::syngen
