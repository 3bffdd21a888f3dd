#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgl/detect.hpp"
#include "pgl/errors.hpp"
#include "pgl/gbs.hpp"
#include "pgl/graph.hpp"
#include "pgl/io.hpp"
#include "pgl/matchperm.hpp"
#include "pgl/parallel.hpp"
#include "pgl/stats.hpp"
#include "pgl/theory.hpp"
#include "pgl/weights.hpp"

// Declarative experiment registry. Every experiment produces rows carrying
// both the empirical estimate and the closed-form prediction it is tested
// against; defaults mirror the acceptance suite so a bare seed reproduces it.
namespace pgl::exp {

using nlohmann::json;

struct ExperimentReport {
    int schema_version = 1;
    std::string experiment;
    std::string claim;
    json config;  // effective config after defaults
    std::vector<std::string> columns;
    std::vector<json> rows;
    json summary;  // optional aggregate block, JSON output only
};

namespace detail {

inline std::uint64_t default_enum_cap() {
    if (const char* env = std::getenv("PGL_CAP_ENUM")) {
        long long v = std::strtoll(env, nullptr, 10);
        if (v > 0) return static_cast<std::uint64_t>(v);
    }
    return 10'000'000;
}

inline std::vector<std::uint64_t> as_u64_list(const json& v, const std::string& key) {
    std::vector<std::uint64_t> out;
    if (v.is_array()) {
        for (const auto& e : v) {
            require(e.is_number_unsigned() || (e.is_number_integer() && e.get<long long>() >= 0),
                    "config key '" + key + "': expected nonnegative integers");
            out.push_back(e.get<std::uint64_t>());
        }
    } else {
        require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
                "config key '" + key + "': expected a nonnegative integer or list");
        out.push_back(v.get<std::uint64_t>());
    }
    require(!out.empty(), "config key '" + key + "': sweep list must be nonempty");
    return out;
}

inline std::vector<double> as_double_list(const json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& e : v) {
            require(e.is_number(), "config key '" + key + "': expected numbers");
            out.push_back(e.get<double>());
        }
    } else {
        require(v.is_number(), "config key '" + key + "': expected a number or list");
        out.push_back(v.get<double>());
    }
    require(!out.empty(), "config key '" + key + "': sweep list must be nonempty");
    return out;
}

inline std::uint64_t as_u64(const json& v, const std::string& key) {
    auto list = as_u64_list(v, key);
    require(list.size() == 1, "config key '" + key + "': expected a single integer");
    return list[0];
}

inline double as_double(const json& v, const std::string& key) {
    auto list = as_double_list(v, key);
    require(list.size() == 1, "config key '" + key + "': expected a single number");
    return list[0];
}

inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t index) {
    return Rng::stream(seed, tags::exp_trial, index).next_u64();
}

}  // namespace detail

// Validated configuration: the effective JSON (defaults filled) plus the
// experiment name and seed pulled out for convenience.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    json effective;

    std::uint64_t u64(const std::string& key) const {
        return detail::as_u64(effective.at(key), key);
    }
    double number(const std::string& key) const {
        return detail::as_double(effective.at(key), key);
    }
    std::string str(const std::string& key) const { return effective.at(key).get<std::string>(); }
    std::vector<std::uint64_t> u64_list(const std::string& key) const {
        return detail::as_u64_list(effective.at(key), key);
    }
    std::vector<double> double_list(const std::string& key) const {
        return detail::as_double_list(effective.at(key), key);
    }
};

using Runner = std::function<ExperimentReport(const ExperimentConfig&)>;

struct ExperimentDef {
    std::string claim;
    json defaults;
    std::vector<std::string> columns;
    Runner run;
};

const std::map<std::string, ExperimentDef>& registry();

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

inline ExperimentConfig parse_config(const json& doc) {
    require(doc.is_object(), "config: expected a JSON object");
    require(doc.contains("experiment"), "config: missing required key 'experiment'");
    require(doc.at("experiment").is_string(), "config: 'experiment' must be a string");

    ExperimentConfig cfg;
    cfg.experiment = doc.at("experiment").get<std::string>();
    auto it = registry().find(cfg.experiment);
    if (it == registry().end())
        throw ConfigError("config: unknown experiment name '" + cfg.experiment + "'");

    const json& defaults = it->second.defaults;
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key == "experiment" || key == "seed" || key == "out" || key == "format" ||
            key == "threads")
            continue;
        if (!defaults.contains(key))
            throw ConfigError("config: unknown key '" + key + "' for experiment '" +
                              cfg.experiment + "'");
    }

    cfg.effective = defaults;
    for (const auto& [key, value] : doc.items()) {
        if (key == "experiment") continue;
        cfg.effective[key] = value;
    }
    if (!cfg.effective.contains("seed")) cfg.effective["seed"] = 1;
    cfg.seed = detail::as_u64(cfg.effective.at("seed"), "seed");
    cfg.effective["experiment"] = cfg.experiment;
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto& def = registry().at(cfg.experiment);
    ExperimentReport report = def.run(cfg);
    report.experiment = cfg.experiment;
    report.claim = def.claim;
    report.config = cfg.effective;
    if (report.columns.empty()) report.columns = def.columns;
    return report;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

inline std::string report_csv(const ExperimentReport& report) {
    std::ostringstream out;
    for (std::size_t c = 0; c < report.columns.size(); ++c)
        out << (c ? "," : "") << report.columns[c];
    out << '\n';
    for (const auto& row : report.rows) {
        for (std::size_t c = 0; c < report.columns.size(); ++c) {
            if (c) out << ',';
            const auto& key = report.columns[c];
            if (!row.contains(key)) continue;
            const json& v = row.at(key);
            if (v.is_string())
                out << v.get<std::string>();
            else if (v.is_number_float())
                out << io::format_double(v.get<double>());
            else
                out << v.dump();
        }
        out << '\n';
    }
    return out.str();
}

inline std::string report_json(const ExperimentReport& report) {
    json doc;
    doc["schema_version"] = report.schema_version;
    doc["experiment"] = report.experiment;
    doc["claim"] = report.claim;
    doc["config"] = report.config;
    doc["columns"] = report.columns;
    doc["rows"] = report.rows;
    doc["row_count"] = report.rows.size();
    if (!report.summary.is_null()) doc["summary"] = report.summary;
    return doc.dump(2) + "\n";
}

// Writes `<out>.<experiment>.csv` / `.json`; format is csv | json | both.
inline std::vector<std::string> emit_report(const ExperimentReport& report,
                                            const std::string& out_prefix,
                                            const std::string& format = "both") {
    require(!report.rows.empty(), "emit_report: report has no rows");
    require(format == "csv" || format == "json" || format == "both",
            "emit_report: format must be csv, json, or both");
    std::vector<std::string> paths;
    if (format == "csv" || format == "both") {
        std::string path = out_prefix + "." + report.experiment + ".csv";
        io::write_file(path, report_csv(report));
        paths.push_back(path);
    }
    if (format == "json" || format == "both") {
        std::string path = out_prefix + "." + report.experiment + ".json";
        io::write_file(path, report_json(report));
        paths.push_back(path);
    }
    return paths;
}

// ---------------------------------------------------------------------------
// Experiment runners
// ---------------------------------------------------------------------------

namespace runners {

inline void check(bool cond, const std::string& experiment, const std::string& combo) {
    if (!cond)
        throw ConfigError(experiment + ": invalid combination " + combo);
}

inline ExperimentReport expected_weight(const ExperimentConfig& cfg) {
    ExperimentReport report;
    std::string mode = cfg.str("mode");
    require(mode == "structural" || mode == "graph" || mode == "both",
            "exp_expected_weight: mode must be structural, graph, or both");
    std::uint64_t combo = 0;

    if (mode != "graph") {
        auto r = cfg.u64("r");
        for (auto n : cfg.u64_list("n"))
            for (auto m : cfg.u64_list("m"))
                for (auto k : cfg.u64_list("k"))
                    for (double p : cfg.double_list("p")) {
                        check(m >= 1 && m <= n && k < n && p > 0.0 && p <= 1.0,
                              "exp_expected_weight",
                              "(n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                                  ", k=" + std::to_string(k) + ", p=" + std::to_string(p) + ")");
                        auto est = weights::expected_weight_structural_mc(
                            static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m),
                            static_cast<std::uint32_t>(k), p, false, r,
                            detail::subseed(cfg.seed, combo++));
                        double theory_value = theory::expected_weight(p);
                        report.rows.push_back(
                            {{"mode", "structural"},
                             {"n", n},
                             {"m", m},
                             {"k", k},
                             {"p", p},
                             {"trials", r},
                             {"empirical", est.value},
                             {"stderr", est.stderr_value},
                             {"theory", theory_value},
                             {"ratio", est.value / theory_value}});
                    }
    }

    if (mode != "structural") {
        auto n = static_cast<std::uint32_t>(cfg.u64("graph_n"));
        auto m = static_cast<std::uint32_t>(cfg.u64("graph_m"));
        auto trials = cfg.u64("graph_trials");
        for (double p : cfg.double_list("p")) {
            check(m >= 1 && m <= n && m <= 32 && p > 0.0 && p <= 1.0, "exp_expected_weight",
                  "(graph_n=" + std::to_string(n) + ", graph_m=" + std::to_string(m) +
                      ", p=" + std::to_string(p) + ")");
            double denom = std::pow(p, static_cast<int>(m)) *
                           factorial_as_double(static_cast<int>(m));
            std::uint64_t base = detail::subseed(cfg.seed, combo++);
            auto est = weights::detail::mc_estimate(
                trials, weights::Method::mc_perm, [&](std::uint64_t t) {
                    thread_local SubsetSampler sampler;
                    thread_local std::vector<std::uint32_t> a, b;
                    thread_local SquareMask sub;
                    Rng meta = Rng::stream(base, tags::exp_trial, t);
                    BipartiteGraph g = gen_bipartite_er(n, p, meta.next_u64());
                    Rng rng = Rng::stream(base, tags::weight_mc, t);
                    sampler.sample_containing(rng, n, m, 0, a);
                    sampler.sample(rng, n, m, b);
                    weights::detail::submatrix_inline(g.adjacency(), a, b, sub);
                    double y = perm_detail::permanent_or_throw(sub) / denom;
                    return y * y;
                });
            double theory_value = theory::expected_weight(p);
            report.rows.push_back({{"mode", "graph"},
                                   {"n", n},
                                   {"m", m},
                                   {"k", 0},
                                   {"p", p},
                                   {"trials", trials},
                                   {"empirical", est.value},
                                   {"stderr", est.stderr_value},
                                   {"theory", theory_value},
                                   {"ratio", est.value / theory_value}});
        }
    }
    return report;
}

inline ExperimentReport bias_sweep(const ExperimentConfig& cfg) {
    ExperimentReport report;
    auto r = cfg.u64("r");
    std::uint64_t combo = 0;
    for (auto n : cfg.u64_list("n"))
        for (auto m : cfg.u64_list("m"))
            for (double p : cfg.double_list("p"))
                for (auto k : cfg.u64_list("k")) {
                    check(m >= 1 && m <= n && k >= 1 && k < n && p > 0.0 && p <= 1.0,
                          "exp_bias_sweep",
                          "(n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                              ", k=" + std::to_string(k) + ", p=" + std::to_string(p) + ")");
                    auto planted = weights::expected_weight_structural_mc(
                        static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m),
                        static_cast<std::uint32_t>(k), p, true, r,
                        detail::subseed(cfg.seed, combo * 2));
                    auto background = weights::expected_weight_structural_mc(
                        static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m),
                        static_cast<std::uint32_t>(k), p, false, r,
                        detail::subseed(cfg.seed, combo * 2 + 1));
                    ++combo;
                    double bias = planted.value - background.value;
                    double se = std::sqrt(planted.stderr_value * planted.stderr_value +
                                          background.stderr_value * background.stderr_value);
                    double theory_value = theory::weight_bias(p, static_cast<std::uint32_t>(k),
                                                              static_cast<std::uint32_t>(n));
                    report.rows.push_back({{"n", n},
                                           {"m", m},
                                           {"k", k},
                                           {"p", p},
                                           {"trials", r},
                                           {"planted_mean", planted.value},
                                           {"background_mean", background.value},
                                           {"bias", bias},
                                           {"stderr", se},
                                           {"theory", theory_value},
                                           {"ratio", bias / theory_value}});
                }
    return report;
}

// Shared by exp_cov_check and exp_wick_check: exact weights for the first
// `width` nodes on `graphs` independent instances.
inline std::vector<weights::WeightTable> exact_weight_replicates(std::uint32_t n, std::uint32_t m,
                                                                 double p, std::uint32_t width,
                                                                 std::uint64_t graphs,
                                                                 std::uint64_t seed) {
    std::vector<weights::WeightTable> tables(graphs);
    parallel_chunks(graphs, 4, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t g_idx = lo; g_idx < hi; ++g_idx) {
            BipartiteGraph g = gen_bipartite_er(n, p, detail::subseed(seed, g_idx));
            weights::WeightTable table;
            table.side = Side::left;
            table.method = weights::Method::exact;
            for (std::uint32_t node = 0; node < width; ++node) {
                auto est = weights::weight_exact(g, node, m);
                table.nodes.push_back(node);
                table.values.push_back(est.value);
                table.stderrs.push_back(0.0);
                table.samples_used = est.samples;
            }
            tables[g_idx] = std::move(table);
        }
    });
    return tables;
}

inline ExperimentReport cov_check(const ExperimentConfig& cfg) {
    ExperimentReport report;
    auto graphs = cfg.u64("trials");
    require(graphs >= 2, "exp_cov_check: need trials >= 2");
    std::uint64_t combo = 0;
    for (auto n : cfg.u64_list("n"))
        for (auto m : cfg.u64_list("m"))
            for (double p : cfg.double_list("p")) {
                check(m >= 1 && m <= n && p > 0.0 && p <= 1.0, "exp_cov_check",
                      "(n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                          ", p=" + std::to_string(p) + ")");
                auto tables = exact_weight_replicates(
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m), p, 2, graphs,
                    detail::subseed(cfg.seed, combo++));
                stats::RunningMoments w0, w1, prod;
                for (const auto& t : tables) {
                    w0.push(t.values[0]);
                    w1.push(t.values[1]);
                    prod.push(t.values[0] * t.values[1]);
                }
                double var = w0.variance();
                double g = static_cast<double>(graphs);
                double cov = (prod.mean() - w0.mean() * w1.mean()) * g / (g - 1.0);
                double var_pred =
                    theory::covariance_entry(p, static_cast<std::uint32_t>(m),
                                             static_cast<std::uint32_t>(n), true) /
                    static_cast<double>(n);
                double cov_pred =
                    theory::covariance_entry(p, static_cast<std::uint32_t>(m),
                                             static_cast<std::uint32_t>(n), false) /
                    static_cast<double>(n);
                report.rows.push_back({{"n", n},
                                       {"m", m},
                                       {"p", p},
                                       {"graphs", graphs},
                                       {"mean_w", w0.mean()},
                                       {"theory_mean", theory::expected_weight(p)},
                                       {"var_w", var},
                                       {"var_pred", var_pred},
                                       {"var_ratio", var / var_pred},
                                       {"cov_w", cov},
                                       {"cov_pred", cov_pred},
                                       {"cov_ratio", cov / cov_pred}});
            }
    return report;
}

inline ExperimentReport wick_check(const ExperimentConfig& cfg) {
    ExperimentReport report;
    auto replicates = cfg.u64("replicates");
    require(replicates >= 2, "exp_wick_check: need replicates >= 2");
    auto n = static_cast<std::uint32_t>(cfg.u64("n"));
    auto m = static_cast<std::uint32_t>(cfg.u64("m"));
    double p = cfg.number("p");
    check(m >= 1 && m <= n && n >= 3 && p > 0.0 && p <= 1.0, "exp_wick_check",
          "(n=" + std::to_string(n) + ", m=" + std::to_string(m) + ", p=" + std::to_string(p) +
              ")");

    auto tables = exact_weight_replicates(n, m, p, 3, replicates, detail::subseed(cfg.seed, 0));
    auto centered = weights::center_across_replicates(tables, n);

    double c_same = theory::covariance_entry(p, m, n, true);
    double c_dist = theory::covariance_entry(p, m, n, false);

    auto push_row = [&](const std::string& label, const std::vector<std::size_t>& positions,
                        double theory_value) {
        auto est = weights::joint_moment_empirical(centered, positions);
        json row = {{"n", n},          {"m", m},
                    {"p", p},          {"replicates", replicates},
                    {"moment", label}, {"empirical", est.value},
                    {"stderr", est.stderr_value}, {"theory", theory_value}};
        row["ratio"] = theory_value != 0.0 ? est.value / theory_value : 0.0;
        report.rows.push_back(row);
    };

    push_row("l1", {0}, 0.0);
    push_row("l2_same", {0, 0}, c_same);
    push_row("l2_distinct", {0, 1}, c_dist);
    push_row("l3", {0, 1, 2}, 0.0);
    push_row("l4_same", {0, 0, 0, 0}, 3.0 * c_same * c_same);
    return report;
}

inline ExperimentReport lognormal(const ExperimentConfig& cfg) {
    ExperimentReport report;
    auto samples = cfg.u64("samples");
    require(samples >= 2, "exp_lognormal: need samples >= 2");
    std::uint64_t combo = 0;
    for (auto n : cfg.u64_list("n"))
        for (double p : cfg.double_list("p")) {
            check(n >= 1 && n <= 32 && p > 0.0 && p <= 1.0, "exp_lognormal",
                  "(n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
            auto params = theory::lognormal_params(p);
            std::uint64_t base = detail::subseed(cfg.seed, combo++);

            std::vector<double> values(samples);
            parallel_chunks(samples, 64, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
                for (std::uint64_t s = lo; s < hi; ++s) {
                    Rng rng = Rng::stream(base, tags::exp_trial, s);
                    SquareMask xi = random_square_mask(static_cast<int>(n), p, rng);
                    values[s] = normalized_hafnian_square(xi, p).value;
                }
            });

            std::uint64_t zero_count = 0;
            stats::RunningMoments log_rm;
            for (double v : values) {
                if (v <= 0.0)
                    ++zero_count;
                else
                    log_rm.push(std::log(v));
            }
            double sigma = std::sqrt(params.sigma2);
            auto cdf = [&](double x) {
                if (x <= 0.0) return 0.0;
                return theory::std_normal_cdf((std::log(x) - params.mu) / sigma);
            };
            double ks = stats::ks_statistic(values, cdf);
            report.rows.push_back(
                {{"n", n},
                 {"p", p},
                 {"samples", samples},
                 {"ks", ks},
                 {"zero_count", zero_count},
                 {"zero_fraction",
                  static_cast<double>(zero_count) / static_cast<double>(samples)},
                 {"log_mean", log_rm.mean()},
                 {"log_sd", std::sqrt(log_rm.variance())},
                 {"mu_target", params.mu},
                 {"sigma2_target", params.sigma2}});
        }
    return report;
}

inline ExperimentReport haf_moment(const ExperimentConfig& cfg) {
    ExperimentReport report;
    auto samples = cfg.u64("samples");
    require(samples >= 2, "exp_haf_moment: need samples >= 2");
    std::uint64_t combo = 0;
    for (auto n : cfg.u64_list("n"))
        for (double p : cfg.double_list("p")) {
            check(n >= 1 && n <= 32 && p > 0.0 && p <= 1.0, "exp_haf_moment",
                  "(n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
            std::uint64_t base = detail::subseed(cfg.seed, combo++);
            std::uint64_t n_chunks = (samples + 2047) / 2048;
            std::vector<stats::RunningMoments> partial(n_chunks);
            parallel_chunks(samples, 2048,
                            [&](std::uint64_t chunk, std::uint64_t lo, std::uint64_t hi) {
                                stats::RunningMoments rm;
                                for (std::uint64_t s = lo; s < hi; ++s) {
                                    Rng rng = Rng::stream(base, tags::exp_trial, s);
                                    SquareMask xi =
                                        random_square_mask(static_cast<int>(n), p, rng);
                                    double h = normalized_hafnian_square(xi, p).value;
                                    rm.push(h * h);
                                }
                                partial[chunk] = rm;
                            });
            stats::RunningMoments all;
            for (const auto& rm : partial) all.merge(rm);
            double exact = theory::haf_second_moment_exact(static_cast<std::uint32_t>(n), p);
            double z = all.stderr_mean() > 0.0 ? (all.mean() - exact) / all.stderr_mean() : 0.0;
            report.rows.push_back({{"kind", "mc"},
                                   {"n", n},
                                   {"p", p},
                                   {"samples", samples},
                                   {"empirical", all.mean()},
                                   {"stderr", all.stderr_mean()},
                                   {"exact", exact},
                                   {"zscore", z}});
        }
    auto limit_n = static_cast<std::uint32_t>(cfg.u64("limit_n"));
    double limit_p = cfg.number("limit_p");
    double exact = theory::haf_second_moment_exact(limit_n, limit_p);
    double limit = theory::expected_weight(limit_p);  // e^{1/p - 1}
    report.rows.push_back({{"kind", "exact_limit"},
                           {"n", limit_n},
                           {"p", limit_p},
                           {"samples", 0},
                           {"empirical", exact},
                           {"stderr", 0.0},
                           {"exact", limit},
                           {"zscore", 0.0}});
    return report;
}

inline void poisson_rows(ExperimentReport& report, std::uint32_t n,
                         const std::vector<std::uint32_t>& sizes, std::uint64_t trials,
                         std::uint64_t seed) {
    auto res = stats::subset_intersection_experiment(n, sizes, trials, seed);
    std::string run_label = std::to_string(sizes.size()) + "_subsets";
    for (const auto& cell : res.cells) {
        std::string label;
        for (std::size_t j = 0; j < sizes.size(); ++j)
            if (cell.mask & (1u << j)) label += std::to_string(j);
        double pred = 1.0 - std::exp(-cell.mu);
        double se = std::sqrt(std::max(pred * (1.0 - pred), 0.0) / static_cast<double>(trials));
        json sizes_json = sizes;
        report.rows.push_back({{"n", n},
                               {"sizes", sizes_json.dump()},
                               {"trials", trials},
                               {"cell", label},
                               {"mu", cell.mu},
                               {"tv", cell.tv},
                               {"nonzero_freq", cell.nonzero_frequency},
                               {"nonzero_pred", pred},
                               {"nonzero_se", se}});
        // Histogram as {count: frequency}, keyed by the observed value.
        json hist = json::object();
        for (std::size_t k = 0; k < cell.histogram.size(); ++k)
            if (cell.histogram[k] > 0) hist[std::to_string(k)] = cell.histogram[k];
        report.summary[run_label]["histograms"][label] = std::move(hist);
    }
}

inline ExperimentReport poisson_lemma(const ExperimentConfig& cfg) {
    ExperimentReport report;
    auto n = static_cast<std::uint32_t>(cfg.u64("n"));
    auto trials = cfg.u64("trials");
    auto pair_sizes = cfg.u64_list("sizes_pair");
    auto triple_sizes = cfg.u64_list("sizes_triple");
    std::vector<std::uint32_t> pair(pair_sizes.begin(), pair_sizes.end());
    std::vector<std::uint32_t> triple(triple_sizes.begin(), triple_sizes.end());
    poisson_rows(report, n, pair, trials, detail::subseed(cfg.seed, 0));
    poisson_rows(report, n, triple, trials, detail::subseed(cfg.seed, 1));
    return report;
}

inline ExperimentReport stein_chen(const ExperimentConfig& cfg) {
    ExperimentReport report;
    auto ms = cfg.u64_list("m");
    auto deficits = cfg.u64_list("deficit");
    require(ms.size() == deficits.size(),
            "exp_stein_chen: 'm' and 'deficit' lists must be the same length");
    auto trials = cfg.u64("trials");
    for (std::size_t q = 0; q < ms.size(); ++q) {
        auto m = static_cast<std::uint32_t>(ms[q]);
        auto deficit = static_cast<std::uint32_t>(deficits[q]);
        check(m >= 1 && deficit <= m, "exp_stein_chen",
              "(m=" + std::to_string(m) + ", deficit=" + std::to_string(deficit) + ")");
        std::uint32_t overlap = m - deficit;
        auto est = stats::zero_agreement_frequency(m, overlap, overlap, trials,
                                                   detail::subseed(cfg.seed, q));
        double lambda = (static_cast<double>(overlap) * overlap) /
                        (static_cast<double>(m) * m);
        double e_inv = std::exp(-1.0);
        report.rows.push_back({{"m", m},
                               {"overlap_a", overlap},
                               {"overlap_b", overlap},
                               {"trials", trials},
                               {"freq", est.frequency},
                               {"stderr", est.stderr_value},
                               {"e_inv", e_inv},
                               {"diff_from_e_inv", std::abs(est.frequency - e_inv)},
                               {"lambda", lambda},
                               {"e_lambda", std::exp(-lambda)}});
    }
    return report;
}

inline ExperimentReport detection_power(const ExperimentConfig& cfg) {
    ExperimentReport report;
    std::string mode = cfg.str("mode");
    require(mode == "surrogate" || mode == "graph",
            "exp_detection_power: mode must be surrogate or graph");
    if (mode == "surrogate") {
        double c = cfg.number("c");
        auto draws = cfg.u64("draws");
        std::string threshold = cfg.str("threshold");
        require(threshold == "theoretical" || threshold == "empirical",
                "exp_detection_power: threshold must be theoretical or empirical");
        auto pool_n = static_cast<std::uint32_t>(cfg.u64("pool_n"));
        std::uint64_t combo = 0;
        for (double eps : cfg.double_list("eps")) {
            check(eps >= 0.0 && c > 0.0 && c < 1.0, "exp_detection_power",
                  "(c=" + std::to_string(c) + ", eps=" + std::to_string(eps) + ")");
            auto res = detect::gaussian_rank_surrogate(
                c, eps, draws,
                threshold == "theoretical" ? detect::SurrogateThreshold::theoretical
                                           : detect::SurrogateThreshold::empirical,
                pool_n, detail::subseed(cfg.seed, combo++));
            report.rows.push_back({{"mode", "surrogate"},
                                   {"threshold", threshold},
                                   {"c", c},
                                   {"eps", eps},
                                   {"draws", res.planted_draws},
                                   {"fraction", res.fraction},
                                   {"stderr", res.stderr_value},
                                   {"predicted", res.predicted}});
        }
        return report;
    }

    detect::PowerParams params;
    params.n = static_cast<std::uint32_t>(cfg.u64("n"));
    params.p = cfg.number("p");
    params.k = static_cast<std::uint32_t>(cfg.u64("k"));
    params.t = cfg.u64("t");
    params.c = cfg.number("c");
    params.sampler.m = static_cast<std::uint32_t>(cfg.u64("m"));
    params.sampler.kind = cfg.str("sampler") == "mcmc" ? gbs::Provenance::mcmc
                                                       : gbs::Provenance::exact;
    params.sampler.burnin = cfg.u64("burnin");
    params.sampler.thin = cfg.u64("thin");
    params.sampler.cap = cfg.u64("cap_enum");
    check(params.k >= 1 && params.k <= params.n && params.sampler.m <= params.n,
          "exp_detection_power",
          "(n=" + std::to_string(params.n) + ", k=" + std::to_string(params.k) + ")");
    std::string detector_name = cfg.str("detector");
    require(detector_name == "weight" || detector_name == "degree",
            "exp_detection_power: detector must be weight or degree");
    auto detector = detector_name == "weight" ? detect::Detector::weight
                                              : detect::Detector::degree;
    auto summary = detect::detection_power_experiment(params, detector, cfg.u64("trials"),
                                                      detail::subseed(cfg.seed, 0));
    // Per-trial rows; auc_flag is the pairwise win indicator (0.5 on ties).
    report.columns = {"trial", "n", "p", "K", "m", "T", "detector", "statistic", "overlap",
                      "auc_flag"};
    for (const auto& row : summary.rows) {
        double flag = row.stat_planted > row.stat_null
                          ? 1.0
                          : (row.stat_planted == row.stat_null ? 0.5 : 0.0);
        report.rows.push_back({{"trial", row.trial},
                               {"n", params.n},
                               {"p", params.p},
                               {"K", params.k},
                               {"m", params.sampler.m},
                               {"T", params.t},
                               {"detector", detector_name},
                               {"statistic", row.stat_planted},
                               {"overlap", row.overlap},
                               {"auc_flag", flag}});
    }
    report.summary = {{"auc", summary.auc},
                      {"auc_stderr", summary.auc_stderr},
                      {"mean_overlap", summary.mean_overlap},
                      {"overlap_stderr", summary.overlap_stderr},
                      {"sign_consistent", summary.sign_consistent},
                      {"trials", cfg.u64("trials")},
                      {"c", params.c}};
    return report;
}

inline ExperimentReport algorithm1(const ExperimentConfig& cfg) {
    ExperimentReport report;

    detect::PowerParams part_a;
    part_a.n = static_cast<std::uint32_t>(cfg.u64("n"));
    part_a.p = cfg.number("p");
    part_a.k = static_cast<std::uint32_t>(cfg.u64("k"));
    part_a.t = cfg.u64("t");
    part_a.c = cfg.number("c");
    part_a.sampler.m = static_cast<std::uint32_t>(cfg.u64("m"));
    part_a.sampler.kind = cfg.str("sampler") == "mcmc" ? gbs::Provenance::mcmc
                                                       : gbs::Provenance::exact;
    part_a.sampler.cap = cfg.u64("cap_enum");
    part_a.sampler.burnin = cfg.u64("burnin");
    part_a.sampler.thin = cfg.u64("thin");
    auto pairs = cfg.u64("pairs");
    check(part_a.k >= 1 && part_a.k <= part_a.n && part_a.sampler.m <= part_a.n,
          "exp_algorithm1", "(n=" + std::to_string(part_a.n) + ", k=" + std::to_string(part_a.k) +
                                ", m=" + std::to_string(part_a.sampler.m) + ")");
    auto sum_a = detect::detection_power_experiment(part_a, detect::Detector::weight, pairs,
                                                    detail::subseed(cfg.seed, 0));
    report.rows.push_back({{"part", "sign_check"},
                           {"n", part_a.n},
                           {"p", part_a.p},
                           {"k", part_a.k},
                           {"m", part_a.sampler.m},
                           {"t", part_a.t},
                           {"pairs", pairs},
                           {"sampler", cfg.str("sampler")},
                           {"sign_consistent", sum_a.sign_consistent},
                           {"auc", sum_a.auc},
                           {"auc_stderr", sum_a.auc_stderr},
                           {"mean_overlap", sum_a.mean_overlap}});

    detect::PowerParams part_b = part_a;
    part_b.n = static_cast<std::uint32_t>(cfg.u64("hard_n"));
    part_b.k = static_cast<std::uint32_t>(cfg.u64("hard_k"));
    part_b.t = cfg.u64("hard_t");
    part_b.sampler.m = static_cast<std::uint32_t>(cfg.u64("hard_m"));
    part_b.sampler.kind = gbs::Provenance::mcmc;
    auto hard_pairs = cfg.u64("hard_pairs");
    check(part_b.k >= 1 && part_b.k <= part_b.n && part_b.sampler.m < part_b.n,
          "exp_algorithm1",
          "(hard_n=" + std::to_string(part_b.n) + ", hard_k=" + std::to_string(part_b.k) + ")");
    auto sum_b = detect::detection_power_experiment(part_b, detect::Detector::weight, hard_pairs,
                                                    detail::subseed(cfg.seed, 1));
    report.rows.push_back({{"part", "hard_regime"},
                           {"n", part_b.n},
                           {"p", part_b.p},
                           {"k", part_b.k},
                           {"m", part_b.sampler.m},
                           {"t", part_b.t},
                           {"pairs", hard_pairs},
                           {"sampler", "mcmc"},
                           {"sign_consistent", sum_b.sign_consistent},
                           {"auc", sum_b.auc},
                           {"auc_stderr", sum_b.auc_stderr},
                           {"mean_overlap", sum_b.mean_overlap}});
    return report;
}

inline ExperimentReport mcmc_validation(const ExperimentConfig& cfg) {
    ExperimentReport report;
    auto n = static_cast<std::uint32_t>(cfg.u64("n"));
    auto m = static_cast<std::uint32_t>(cfg.u64("m"));
    double p = cfg.number("p");
    check(m >= 1 && m < n && p > 0.0 && p <= 1.0, "exp_mcmc_validation",
          "(n=" + std::to_string(n) + ", m=" + std::to_string(m) + ", p=" + std::to_string(p) +
              ")");
    BipartiteGraph g = gen_bipartite_er(n, p, detail::subseed(cfg.seed, 0));
    auto dist = gbs::enumerate_distribution(g, m, cfg.u64("cap_enum"));
    auto exact = gbs::exact_marginals(dist);

    // Exact-sampler agreement: max |empirical - exact| in binomial SEs.
    auto t_exact = cfg.u64("t_exact");
    auto batch = gbs::sample_exact(dist, t_exact, detail::subseed(cfg.seed, 1));
    auto emp = gbs::empirical_marginals(batch, n);
    double max_abs_z = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (int side = 0; side < 2; ++side) {
            double q = side == 0 ? exact.left[i] : exact.right[i];
            double f = side == 0 ? emp.left[i] : emp.right[i];
            double se = std::sqrt(q * (1.0 - q) / static_cast<double>(t_exact));
            if (se > 0.0) max_abs_z = std::max(max_abs_z, std::abs(f - q) / se);
        }
    }

    // Weight proportionality: exact marginals vs exact weights up to one
    // fitted constant.
    double prop_deviation = 0.0;
    {
        std::vector<double> ratio(n);
        double mean_ratio = 0.0;
        for (std::uint32_t i = 0; i < n; ++i) {
            auto west = weights::weight_exact(g, i, m);
            ratio[i] = exact.left[i] / west.value;
            mean_ratio += ratio[i];
        }
        mean_ratio /= static_cast<double>(n);
        for (std::uint32_t i = 0; i < n; ++i)
            prop_deviation = std::max(prop_deviation, std::abs(ratio[i] / mean_ratio - 1.0));
    }
    report.rows.push_back({{"kind", "exact_sampler"},
                           {"n", n},
                           {"m", m},
                           {"p", p},
                           {"t", t_exact},
                           {"burnin", 0},
                           {"thin", 1},
                           {"side", "both"},
                           {"tv", 0.0},
                           {"max_marginal_z", max_abs_z},
                           {"prop_deviation", prop_deviation},
                           {"acceptance_rate", 1.0}});

    auto t_mcmc = cfg.u64("t_mcmc");
    auto burnin = cfg.u64("burnin");
    auto thin = cfg.u64("thin");
    auto chain = gbs::sample_mcmc(g, m, t_mcmc, burnin, thin, detail::subseed(cfg.seed, 2));
    auto memp = gbs::empirical_marginals(chain, n);
    // Sides are distributions after dividing by m (inclusion probabilities
    // sum to m per side).
    double tv_left = 0.0, tv_right = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        tv_left += std::abs(memp.left[i] - exact.left[i]) / static_cast<double>(m);
        tv_right += std::abs(memp.right[i] - exact.right[i]) / static_cast<double>(m);
    }
    tv_left *= 0.5;
    tv_right *= 0.5;
    for (int side = 0; side < 2; ++side) {
        report.rows.push_back({{"kind", "mcmc"},
                               {"n", n},
                               {"m", m},
                               {"p", p},
                               {"t", t_mcmc},
                               {"burnin", burnin},
                               {"thin", thin},
                               {"side", side == 0 ? "left" : "right"},
                               {"tv", side == 0 ? tv_left : tv_right},
                               {"max_marginal_z", 0.0},
                               {"prop_deviation", 0.0},
                               {"acceptance_rate", chain.acceptance_rate}});
    }
    return report;
}

}  // namespace runners

inline const std::map<std::string, ExperimentDef>& registry() {
    static const std::map<std::string, ExperimentDef> defs = [] {
        std::map<std::string, ExperimentDef> r;
        std::uint64_t cap = detail::default_enum_cap();

        r["exp_expected_weight"] = ExperimentDef{
            "mean node weight approaches exp(1/p - 1)",
            json{{"mode", "both"},
                 {"n", json::array({10000})},
                 {"m", json::array({50})},
                 {"k", json::array({0})},
                 {"p", json::array({0.5})},
                 {"r", 1000000},
                 {"graph_n", 64},
                 {"graph_m", 4},
                 {"graph_trials", 200000}},
            {"mode", "n", "m", "k", "p", "trials", "empirical", "stderr", "theory", "ratio"},
            runners::expected_weight};

        r["exp_bias_sweep"] = ExperimentDef{
            "planted-minus-background mean weight is exp(1/p-1)(1/p-1) 2k/n",
            json{{"n", json::array({100})},
                 {"m", json::array({5})},
                 {"p", json::array({0.5})},
                 {"k", json::array({5, 10, 20})},
                 {"r", 1000000}},
            {"n", "m", "k", "p", "trials", "planted_mean", "background_mean", "bias", "stderr",
             "theory", "ratio"},
            runners::bias_sweep};

        r["exp_cov_check"] = ExperimentDef{
            "Var and Cov of node weights scale as the sqrt(n)-moment covariances over n",
            json{{"n", json::array({12, 16, 20})},
                 {"m", json::array({3})},
                 {"p", json::array({0.5})},
                 {"trials", 20000}},
            {"n", "m", "p", "graphs", "mean_w", "theory_mean", "var_w", "var_pred", "var_ratio",
             "cov_w", "cov_pred", "cov_ratio"},
            runners::cov_check};

        r["exp_wick_check"] = ExperimentDef{
            "joint moments of rescaled centered weights follow the Gaussian pairing formula",
            json{{"n", 20}, {"m", 3}, {"p", 0.5}, {"replicates", 20000}},
            {"n", "m", "p", "replicates", "moment", "empirical", "stderr", "theory", "ratio"},
            runners::wick_check};

        r["exp_lognormal"] = ExperimentDef{
            "normalized matching counts converge to LogNormal(-(1-p)/2p, (1-p)/p)",
            json{{"n", json::array({8, 12, 16, 20})},
                 {"p", json::array({0.5})},
                 {"samples", 20000}},
            {"n", "p", "samples", "ks", "zero_count", "zero_fraction", "log_mean", "log_sd",
             "mu_target", "sigma2_target"},
            runners::lognormal};

        r["exp_haf_moment"] = ExperimentDef{
            "E[Haf^2] equals the derangement sum sum_i p^{-i}/i! De(n-i)/(n-i)!",
            json{{"n", json::array({2, 3, 4, 5, 6, 7, 8, 9, 10})},
                 {"p", json::array({0.3, 0.5, 0.7})},
                 {"samples", 100000},
                 {"limit_n", 400},
                 {"limit_p", 0.5}},
            {"kind", "n", "p", "samples", "empirical", "stderr", "exact", "zscore"},
            runners::haf_moment};

        r["exp_poisson_lemma"] = ExperimentDef{
            "exact-membership intersection counts of uniform subsets are Poisson(prod m_j / "
            "n^{|C|-1})",
            json{{"n", 10000},
                 {"sizes_pair", json::array({100, 100})},
                 {"sizes_triple", json::array({100, 100, 100})},
                 {"trials", 100000}},
            {"n", "sizes", "trials", "cell", "mu", "tv", "nonzero_freq", "nonzero_pred",
             "nonzero_se"},
            runners::poisson_lemma};

        r["exp_stein_chen"] = ExperimentDef{
            "two random bijections on overlapping sets agree nowhere with probability e^{-1} + "
            "o(1)",
            json{{"m", json::array({500, 1000})},
                 {"deficit", json::array({0, 100})},
                 {"trials", 100000}},
            {"m", "overlap_a", "overlap_b", "trials", "freq", "stderr", "e_inv",
             "diff_from_e_inv", "lambda", "e_lambda"},
            runners::stein_chen};

        r["exp_detection_power"] = ExperimentDef{
            "expected top-c*n capture fraction of planted scores is 1 - Phi(Phi^{-1}(1-c) - eps)",
            json{{"mode", "surrogate"},
                 {"c", 0.8},
                 {"eps", json::array({0.01, 1.0})},
                 {"draws", 100000},
                 {"threshold", "theoretical"},
                 {"pool_n", 10000},
                 {"n", 12},
                 {"p", 0.5},
                 {"k", 6},
                 {"m", 3},
                 {"t", 100000},
                 {"trials", 50},
                 {"sampler", "exact"},
                 {"detector", "weight"},
                 {"burnin", 10000},
                 {"thin", 10},
                 {"cap_enum", cap}},
            {"mode", "threshold", "c", "eps", "draws", "fraction", "stderr", "predicted"},
            runners::detection_power};

        r["exp_algorithm1"] = ExperimentDef{
            "sampling-frequency z-scores separate planted nodes at K ~ sqrt(n) but not at K << "
            "sqrt(n)",
            json{{"n", 12},
                 {"p", 0.5},
                 {"k", 6},
                 {"m", 3},
                 {"t", 100000},
                 {"pairs", 50},
                 {"sampler", "exact"},
                 {"c", 0.8},
                 {"hard_n", 100},
                 {"hard_k", 2},
                 {"hard_m", 3},
                 {"hard_t", 20000},
                 {"hard_pairs", 200},
                 {"burnin", 10000},
                 {"thin", 10},
                 {"cap_enum", cap}},
            {"part", "n", "p", "k", "m", "t", "pairs", "sampler", "sign_consistent", "auc",
             "auc_stderr", "mean_overlap"},
            runners::algorithm1};

        r["exp_mcmc_validation"] = ExperimentDef{
            "exact sampling matches enumeration; the Metropolis chain matches exact marginals",
            json{{"n", 10},
                 {"m", 3},
                 {"p", 0.6},
                 {"t_exact", 100000},
                 {"t_mcmc", 20000},
                 {"burnin", 10000},
                 {"thin", 10},
                 {"cap_enum", cap}},
            {"kind", "n", "m", "p", "t", "burnin", "thin", "side", "tv", "max_marginal_z",
             "prop_deviation", "acceptance_rate"},
            runners::mcmc_validation};

        return r;
    }();
    return defs;
}

}  // namespace pgl::exp
