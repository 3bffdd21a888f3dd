// pgl: generate graphs, evaluate matching statistics, sample the
// squared-matching-count law, score nodes, and run the registered
// experiments. Exit codes: 0 ok, 2 configuration error, 3 budget exceeded.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgl/detect.hpp"
#include "pgl/errors.hpp"
#include "pgl/experiment.hpp"
#include "pgl/gbs.hpp"
#include "pgl/graph.hpp"
#include "pgl/io.hpp"
#include "pgl/matchperm.hpp"
#include "pgl/theory.hpp"
#include "pgl/weights.hpp"

namespace {

using nlohmann::json;

struct GraphArgs {
    std::string graph_file;
    std::uint32_t n = 12;
    double p = 0.5;
    std::uint32_t k = 0;
    std::uint64_t gen_seed = 1;
};

void add_graph_options(CLI::App* cmd, GraphArgs& args) {
    cmd->add_option("--graph", args.graph_file, "read the graph from a JSON document");
    cmd->add_option("--n", args.n, "vertex count per side (when generating)");
    cmd->add_option("--p", args.p, "edge probability (when generating)");
    cmd->add_option("--k", args.k, "planted biclique size (when generating)");
    cmd->add_option("--gen-seed", args.gen_seed, "seed for graph generation");
}

pgl::PlantedInstance load_or_generate(const GraphArgs& args) {
    if (!args.graph_file.empty())
        return pgl::io::instance_from_json(json::parse(pgl::io::read_file(args.graph_file)));
    pgl::BipartiteGraph g = pgl::gen_bipartite_er(args.n, args.p, args.gen_seed);
    if (args.k > 0) return pgl::plant_biclique(g, args.k, args.gen_seed);
    return pgl::PlantedInstance{std::move(g), {}, {}, 0};
}

void write_or_print(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-")
        std::cout << content;
    else
        pgl::io::write_file(out, content);
}

int run(int argc, char** argv) {
    CLI::App app{"GBS-style subgraph sampling statistics for planted bicliques"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand

    std::uint64_t seed = 1;
    std::string out;
    std::string format = "both";
    unsigned threads = 0;
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--out", out, "output path or prefix ('-' for stdout)");
    app.add_option("--format", format, "report format: csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    app.add_option("--threads", threads, "worker threads (0 = auto, PGL_THREADS honored)");

    // gen -----------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a bipartite ER graph, optionally planted");
    gen->fallthrough();
    GraphArgs gen_args;
    add_graph_options(gen, gen_args);

    // perm ----------------------------------------------------------------
    auto* perm = app.add_subcommand("perm", "exact permanent of a 0/1 matrix (JSON 2D array)");
    perm->fallthrough();
    std::string perm_in;
    bool perm_brute = false;
    perm->add_option("--in", perm_in, "matrix file ('-' for stdin)")->required();
    perm->add_flag("--brute", perm_brute, "also run the brute-force oracle");

    // theory --------------------------------------------------------------
    auto* theory_cmd = app.add_subcommand("theory", "closed-form predictions for one parameter set");
    theory_cmd->fallthrough();
    pgl::theory::TheoryParams tp;
    double theory_eps = -1.0;
    theory_cmd->add_option("--n", tp.n, "side size")->required();
    theory_cmd->add_option("--m", tp.m, "sample half-size")->required();
    theory_cmd->add_option("--k", tp.k, "planted size");
    theory_cmd->add_option("--p", tp.p, "edge probability")->required();
    theory_cmd->add_option("--c", tp.c, "ranking fraction");
    theory_cmd->add_option("--eps", theory_eps, "override eps (default k/sqrt(n))");

    // sample --------------------------------------------------------------
    auto* sample = app.add_subcommand("sample", "draw balanced subgraph samples");
    sample->fallthrough();
    GraphArgs sample_graph;
    add_graph_options(sample, sample_graph);
    std::uint32_t sample_m = 2;
    std::uint64_t sample_t = 1000, sample_burnin = 10000, sample_thin = 10;
    std::string sampler_kind = "exact";
    std::uint64_t cap_enum = pgl::exp::detail::default_enum_cap();
    sample->add_option("--m", sample_m, "subset size per side")->required();
    sample->add_option("--t", sample_t, "number of samples");
    sample->add_option("--sampler", sampler_kind, "exact|mcmc")
        ->check(CLI::IsMember({"exact", "mcmc"}));
    sample->add_option("--burnin", sample_burnin, "MCMC burn-in steps");
    sample->add_option("--thin", sample_thin, "MCMC thinning stride");
    sample->add_option("--cap-enum", cap_enum, "enumeration budget (PGL_CAP_ENUM honored)");

    // weights ---------------------------------------------------------------
    auto* weights_cmd = app.add_subcommand("weights", "per-node weight estimates");
    weights_cmd->fallthrough();
    GraphArgs weights_graph;
    add_graph_options(weights_cmd, weights_graph);
    std::uint32_t weights_m = 2;
    std::string weights_method = "exact";
    std::string weights_side = "left";
    std::uint64_t weights_r = 10000;
    std::int64_t weights_node = -1;
    std::uint64_t cap_perm = 100'000'000;
    weights_cmd->add_option("--m", weights_m, "subset size per side")->required();
    weights_cmd->add_option("--method", weights_method, "exact|mc_perm|mc_indicator")
        ->check(CLI::IsMember({"exact", "mc_perm", "mc_indicator"}));
    weights_cmd->add_option("--side", weights_side, "left|right")
        ->check(CLI::IsMember({"left", "right"}));
    weights_cmd->add_option("--r", weights_r, "Monte Carlo trials per node");
    weights_cmd->add_option("--node", weights_node, "single node (default: all)");
    weights_cmd->add_option("--cap-perm", cap_perm, "permanent-evaluation budget");

    // detect ----------------------------------------------------------------
    auto* detect_cmd = app.add_subcommand("detect", "run the sampling-frequency detector");
    detect_cmd->fallthrough();
    GraphArgs detect_graph;
    add_graph_options(detect_cmd, detect_graph);
    std::uint32_t detect_m = 2;
    std::uint64_t detect_t = 10000, detect_burnin = 10000, detect_thin = 10;
    std::string detect_sampler = "exact";
    std::string decision_name = "none";
    double detect_theta = 0.0, detect_q = 0.95;
    std::uint32_t detect_calib = 50;
    std::string zscores_out;
    detect_cmd->add_option("--m", detect_m, "subset size per side")->required();
    detect_cmd->add_option("--t", detect_t, "sample horizon");
    detect_cmd->add_option("--sampler", detect_sampler, "exact|mcmc")
        ->check(CLI::IsMember({"exact", "mcmc"}));
    detect_cmd->add_option("--burnin", detect_burnin, "MCMC burn-in steps");
    detect_cmd->add_option("--thin", detect_thin, "MCMC thinning stride");
    detect_cmd->add_option("--decision", decision_name, "none|maxz|maxz-calibrated")
        ->check(CLI::IsMember({"none", "maxz", "maxz-calibrated"}));
    detect_cmd->add_option("--theta", detect_theta, "max-z threshold for --decision maxz");
    detect_cmd->add_option("--q", detect_q, "calibration quantile");
    detect_cmd->add_option("--calibration-trials", detect_calib, "null instances for calibration");
    detect_cmd->add_option("--zscores", zscores_out, "write per-node z-scores CSV here");

    // experiment ------------------------------------------------------------
    auto* experiment = app.add_subcommand("experiment", "run a registered experiment");
    experiment->fallthrough();
    std::string exp_name;
    std::string config_path;
    experiment->add_option("name", exp_name, "experiment name (see --list)");
    bool exp_list = false;
    experiment->add_flag("--list", exp_list, "list registered experiments");
    experiment->add_option("--config", config_path, "JSON config file ('-' for stdin)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // CLI misuse is a configuration error
    }

    if (threads > 0) setenv("PGL_THREADS", std::to_string(threads).c_str(), 1);

    if (gen->parsed()) {
        auto inst = load_or_generate(gen_args);
        write_or_print(out, pgl::io::instance_to_json(inst).dump(2) + "\n");
        return 0;
    }

    if (perm->parsed()) {
        std::string text;
        if (perm_in == "-") {
            std::ostringstream ss;
            ss << std::cin.rdbuf();
            text = ss.str();
        } else {
            text = pgl::io::read_file(perm_in);
        }
        json doc = json::parse(text);
        pgl::require(doc.is_array(), "perm: expected a JSON 2D array of 0/1 entries");
        std::vector<std::vector<int>> rows;
        for (const auto& r : doc) rows.push_back(r.get<std::vector<int>>());
        auto mat = pgl::SquareMask::from_rows(rows);
        auto pv = pgl::permanent_exact(mat);
        json res;
        res["m"] = mat.n;
        res["permanent"] = pgl::int128_to_string(pv.exact);
        res["overflowed"] = pv.overflowed;
        if (perm_brute) res["bruteforce"] = pgl::int128_to_string(pgl::permanent_bruteforce(mat).exact);
        write_or_print(out, res.dump(2) + "\n");
        return 0;
    }

    if (theory_cmd->parsed()) {
        tp.validate();
        double eps = theory_eps >= 0.0 ? theory_eps : tp.epsilon();
        json res;
        res["params"] = {{"n", tp.n}, {"m", tp.m}, {"k", tp.k}, {"p", tp.p},
                         {"c", tp.c}, {"eps", eps}};
        res["expected_weight"] = pgl::theory::expected_weight(tp.p);
        res["weight_bias"] = pgl::theory::weight_bias(tp.p, tp.k, tp.n);
        res["covariance_same"] = pgl::theory::covariance_entry(tp.p, tp.m, tp.n, true);
        res["covariance_distinct"] = pgl::theory::covariance_entry(tp.p, tp.m, tp.n, false);
        auto ln = pgl::theory::lognormal_params(tp.p);
        res["lognormal_mu"] = ln.mu;
        res["lognormal_sigma2"] = ln.sigma2;
        res["haf_second_moment"] = pgl::theory::haf_second_moment_exact(tp.n, tp.p);
        res["detection_proportion"] = pgl::theory::detection_proportion(tp.c, eps);
        if (tp.p < 1.0)
            res["degree_mean_shift"] = pgl::theory::degree_mean_shift(tp.p, tp.k, tp.n);
        write_or_print(out, res.dump(2) + "\n");
        return 0;
    }

    if (sample->parsed()) {
        auto inst = load_or_generate(sample_graph);
        pgl::gbs::SampleBatch batch;
        if (sampler_kind == "exact") {
            auto dist = pgl::gbs::enumerate_distribution(inst.graph, sample_m, cap_enum);
            batch = pgl::gbs::sample_exact(dist, sample_t, seed);
        } else {
            batch = pgl::gbs::sample_mcmc(inst.graph, sample_m, sample_t, sample_burnin,
                                          sample_thin, seed);
        }
        if (pgl::gbs::m_exceeds_collision_free(inst.graph.n(), sample_m))
            std::cerr << "warning: m exceeds the collision-free guideline ceil(sqrt(2n))/2\n";
        write_or_print(out, pgl::io::sample_batch_csv(batch));
        return 0;
    }

    if (weights_cmd->parsed()) {
        auto inst = load_or_generate(weights_graph);
        const auto& g_in = inst.graph;
        bool right = weights_side == "right";
        // Right-side weights are left-side weights of the transposed graph.
        std::optional<pgl::BipartiteGraph> transposed;
        if (right) {
            pgl::BitMatrix adj(g_in.n(), g_in.n());
            for (std::uint32_t u = 0; u < g_in.n(); ++u)
                for (std::uint32_t v = 0; v < g_in.n(); ++v)
                    if (g_in.edge(u, v)) adj.set(v, u);
            transposed.emplace(g_in.n(), g_in.p(), std::move(adj));
        }
        const pgl::BipartiteGraph& g = right ? *transposed : g_in;

        pgl::weights::WeightTable table;
        table.side = right ? pgl::Side::right : pgl::Side::left;
        std::vector<std::uint32_t> nodes;
        if (weights_node >= 0)
            nodes.push_back(static_cast<std::uint32_t>(weights_node));
        else
            for (std::uint32_t i = 0; i < g.n(); ++i) nodes.push_back(i);
        for (auto node : nodes) {
            pgl::weights::WeightEstimate est;
            if (weights_method == "exact")
                est = pgl::weights::weight_exact(g, node, weights_m, cap_perm);
            else if (weights_method == "mc_perm")
                est = pgl::weights::weight_mc_perm(g, node, weights_m, weights_r,
                                                   seed + node);
            else
                est = pgl::weights::weight_mc_indicator(g, node, weights_m, weights_r,
                                                        seed + node);
            table.nodes.push_back(node);
            table.values.push_back(est.value);
            table.stderrs.push_back(est.stderr_value);
            table.method = est.method;
            table.samples_used = est.samples;
        }
        write_or_print(out, pgl::io::weight_table_csv(table));
        return 0;
    }

    if (detect_cmd->parsed()) {
        auto inst = load_or_generate(detect_graph);
        pgl::detect::SamplerConfig sampler;
        sampler.kind = detect_sampler == "mcmc" ? pgl::gbs::Provenance::mcmc
                                                : pgl::gbs::Provenance::exact;
        sampler.m = detect_m;
        sampler.cap = cap_enum;
        sampler.burnin = detect_burnin;
        sampler.thin = detect_thin;
        pgl::detect::DecisionConfig decision;
        if (decision_name == "maxz") {
            decision.kind = pgl::detect::DecisionKind::max_z;
            decision.theta = detect_theta;
        } else if (decision_name == "maxz-calibrated") {
            decision.kind = pgl::detect::DecisionKind::max_z_calibrated;
            decision.quantile = detect_q;
            decision.calibration_trials = detect_calib;
        }
        auto res = pgl::detect::run_algorithm1(inst.graph, sampler, detect_t, decision, seed);
        json doc;
        doc["n"] = inst.graph.n();
        doc["m"] = detect_m;
        doc["t"] = res.t_used;
        doc["sigma"] = res.sigma;
        doc["sigma_left"] = res.sigma_left;
        doc["sigma_right"] = res.sigma_right;
        doc["statistic_name"] = res.statistic_name;
        doc["statistic_value"] = res.statistic_value;
        doc["threshold"] = res.threshold;
        doc["decision"] = res.decision;
        doc["max_z"] = res.max_z();
        write_or_print(out, doc.dump(2) + "\n");
        if (!zscores_out.empty()) {
            std::ostringstream z;
            z << "node,side,z\n";
            for (std::uint32_t i = 0; i < inst.graph.n(); ++i)
                z << i << ",left," << pgl::io::format_double(res.z[i]) << "\n";
            for (std::uint32_t i = 0; i < inst.graph.n(); ++i)
                z << i << ",right," << pgl::io::format_double(res.z[inst.graph.n() + i]) << "\n";
            pgl::io::write_file(zscores_out, z.str());
        }
        return 0;
    }

    if (experiment->parsed()) {
        if (exp_list) {
            for (const auto& [name, def] : pgl::exp::registry())
                std::cout << name << ": " << def.claim << "\n";
            return 0;
        }
        pgl::require(!exp_name.empty(), "experiment: name required (or --list)");
        json doc;
        if (!config_path.empty()) {
            std::string text;
            if (config_path == "-") {
                std::ostringstream ss;
                ss << std::cin.rdbuf();
                text = ss.str();
            } else {
                text = pgl::io::read_file(config_path);
            }
            try {
                doc = json::parse(text);
            } catch (const json::parse_error& e) {
                throw pgl::ConfigError(std::string("config: malformed JSON: ") + e.what());
            }
        } else {
            doc = json::object();
        }
        if (doc.contains("experiment"))
            pgl::require(doc.at("experiment") == exp_name,
                         "experiment: config 'experiment' disagrees with the CLI argument");
        doc["experiment"] = exp_name;
        if (!doc.contains("seed")) doc["seed"] = seed;
        auto cfg = pgl::exp::parse_config(doc);
        auto report = pgl::exp::run_experiment(cfg);
        std::string prefix = out.empty() || out == "-" ? "pgl_report" : out;
        for (const auto& path : pgl::exp::emit_report(report, prefix, format))
            std::cout << path << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const pgl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pgl::CapExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
