// hcm command-line tool: instance generation, threshold reports, recovery,
// Monte Carlo sweeps and tail-bound checks.  All subcommands are
// deterministic functions of their arguments and --seed; the HCM_THREADS
// environment variable only affects wall-clock time, never output bytes.
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcm/cleanup.hpp"
#include "hcm/estimators.hpp"
#include "hcm/harness.hpp"
#include "hcm/io.hpp"
#include "hcm/model.hpp"
#include "hcm/thresholds.hpp"

namespace {

using nlohmann::json;

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

hcm::DistPair pair_from_arg(const std::string& arg) {
    return hcm::DistPair::from_json(json::parse(arg));
}

json community_json(const std::vector<int>& c) {
    json a = json::array();
    for (int i : c) a.push_back(i + 1);  // 1-based in all external output
    return a;
}

int run_gen(const std::string& pair_arg, int n, int K, const std::string& diag,
            std::uint64_t seed, const std::string& out, const std::string& edges_out) {
    const hcm::DistPair pair = pair_from_arg(pair_arg);
    const hcm::DiagMode dm = hcm::diag_mode_from_string(diag);
    hcm::Rng rng(hcm::derive_seed(seed, hcm::seed_stream::kInstance));
    const hcm::Instance inst = hcm::sample_instance(n, K, pair, rng, dm, seed);
    std::ofstream f;
    hcm::save_instance(open_out(f, out), inst, pair);
    if (!edges_out.empty()) {
        std::ofstream ef(edges_out);
        if (!ef) throw std::runtime_error("cannot open output file: " + edges_out);
        hcm::save_edge_list(ef, inst, pair);
    }
    return 0;
}

int run_thresholds(const std::string& pair_arg, std::int64_t n, std::int64_t K,
                   const std::string& diag, const std::string& out) {
    const hcm::DistPair pair = pair_from_arg(pair_arg);
    const bool informative = hcm::diag_mode_from_string(diag) == hcm::DiagMode::InformativeDiagonal;
    json j = hcm::to_json(hcm::evaluate_thresholds(n, K, pair, informative));
    j["meta"] = hcm::output_header(0, json{{"n", n}, {"K", K}, {"pair", pair.to_json()}});
    std::ofstream f;
    open_out(f, out) << j.dump(2) << "\n";
    return 0;
}

int run_recover(const std::string& instance_path, const std::string& method,
                std::uint64_t seed, double delta, const std::string& weak, int restarts,
                int max_iters, std::uint64_t budget, const std::string& out) {
    hcm::LoadedInstance li = hcm::load_instance_file(instance_path);
    const hcm::Instance& inst = li.instance;
    const hcm::LlrMatrix lmat = hcm::llr_matrix(inst, li.pair);
    json j;
    j["n"] = inst.n;
    j["K"] = inst.K;
    j["method"] = method;
    hcm::Estimate est;
    if (method == "cleanup") {
        hcm::CleanupConfig cc;
        cc.delta = delta;
        cc.weak_method = hcm::weak_method_from_string(weak);
        cc.partition_seed = hcm::derive_seed(seed, hcm::seed_stream::kPartition);
        cc.estimator_seed = hcm::derive_seed(seed, hcm::seed_stream::kEstimator);
        cc.local_restarts = restarts;
        cc.local_max_iters = max_iters;
        cc.exhaustive_budget = budget;
        hcm::CleanupResult res = hcm::clean_up(inst, lmat, inst.K, cc);
        est = res.estimate;
        json blocks = json::array();
        for (const auto& b : res.blocks) {
            blocks.push_back(json{{"block", b.block},
                                  {"withheld_size", b.withheld_size},
                                  {"weak_target", b.weak_target},
                                  {"sym_diff_vs_truth", b.sym_diff_vs_truth}});
        }
        j["cleanup"] = {{"delta", delta},
                        {"weak", weak},
                        {"partition_rounded", res.partition_rounded},
                        {"voting_gamma", res.voting_gamma},
                        {"voting_threshold", res.voting_threshold},
                        {"blocks", blocks}};
    } else if (method == "exhaustive") {
        est = hcm::mle_exhaustive(lmat, inst.K, budget);
    } else if (method == "local") {
        hcm::Rng rng(hcm::derive_seed(seed, hcm::seed_stream::kEstimator));
        est = hcm::local_search_restarts(lmat, inst.K, restarts, max_iters, rng);
        j["iterations"] = est.iterations;
    } else if (method == "degree") {
        est = hcm::degree_threshold(lmat, inst.K);
    } else {
        throw std::runtime_error("unknown method: " + method);
    }
    j["community"] = community_json(est.community);
    j["score"] = est.score;
    if (!inst.community.empty()) {
        const int sd = hcm::sym_diff_size(est.community, inst.community);
        j["sym_diff"] = sd;
        j["d_hamming"] = sd;
        j["exact"] = (sd == 0);
    }
    j["meta"] = hcm::output_header(
        seed, json{{"instance", instance_path}, {"method", method}, {"delta", delta},
                   {"weak", weak}, {"restarts", restarts}, {"max_iters", max_iters},
                   {"budget", budget}});
    std::ofstream f;
    open_out(f, out) << j.dump(2) << "\n";
    return 0;
}

int run_sweep(const std::string& config_path, const std::string& out) {
    std::ifstream cf(config_path);
    if (!cf) throw std::runtime_error("cannot open config: " + config_path);
    const json cj = json::parse(cf);
    const hcm::SweepConfig cfg = hcm::parse_sweep_config(cj);
    const auto rows = hcm::phase_diagram(cfg, 0, &std::cerr);
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& r : rows) cells.push_back(hcm::sweep_row_cells(r));
    std::ofstream f;
    hcm::write_csv(open_out(f, out), hcm::output_header(cfg.master_seed, cj),
                   hcm::sweep_columns(), cells);
    return 0;
}

int run_check_bounds(const std::string& pair_arg, int n, double gamma, double delta, int reps,
                     std::uint64_t seed, const std::string& out) {
    const hcm::DistPair pair = pair_from_arg(pair_arg);
    const hcm::BoundsCheck b = hcm::verify_bounds(pair, n, gamma, delta, reps, seed);
    const json cfg{{"pair", pair.to_json()}, {"n", n},    {"gamma", gamma},
                   {"delta", delta},         {"reps", reps}};
    std::vector<std::string> cols = {"pair",     "n",      "gamma",      "delta",
                                     "lower_bound", "lower_vacuous", "mc_estimate", "ci99_lo",
                                     "ci99_hi",  "upper_bound", "sandwich_ok"};
    std::vector<std::vector<std::string>> rows(1);
    auto& r = rows[0];
    r.push_back(pair.describe());
    r.push_back(std::to_string(n));
    r.push_back(hcm::format_double(gamma));
    r.push_back(hcm::format_double(delta));
    r.push_back(hcm::format_double(b.lower));
    r.push_back(b.lower_vacuous ? "1" : "0");
    r.push_back(hcm::format_double(b.p_hat));
    r.push_back(hcm::format_double(b.ci99.lo));
    r.push_back(hcm::format_double(b.ci99.hi));
    r.push_back(hcm::format_double(b.upper));
    r.push_back(b.sandwich_ok ? "1" : "0");
    std::ofstream f;
    hcm::write_csv(open_out(f, out), hcm::output_header(seed, cfg), cols, rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hidden community model: generation, thresholds, recovery, Monte Carlo"};
    app.require_subcommand(1);

    std::string pair_arg, diag = "zero", out, edges_out, instance_path, method = "exhaustive";
    std::string weak = "exhaustive", config_path;
    int n = 0, K = 0, reps = 100000, restarts = 5, max_iters = 1000;
    double gamma = 0.0, delta = 1.0 / 3.0;
    std::uint64_t seed = 0, budget = 10000000ULL;

    auto* gen = app.add_subcommand("gen", "generate an instance file");
    gen->add_option("--pair", pair_arg, "pair JSON")->required();
    gen->add_option("--n", n)->required();
    gen->add_option("--K", K)->required();
    gen->add_option("--diag", diag, "zero|informative");
    gen->add_option("--seed", seed);
    gen->add_option("--out", out, "output path (default stdout)");
    gen->add_option("--edges", edges_out, "also write a Bernoulli edge list");

    auto* thr = app.add_subcommand("thresholds", "evaluate recovery conditions");
    thr->add_option("--pair", pair_arg)->required();
    thr->add_option("--n", n)->required();
    thr->add_option("--K", K)->required();
    thr->add_option("--diag", diag);
    thr->add_option("--out", out);

    auto* rec = app.add_subcommand("recover", "estimate the community of an instance file");
    rec->add_option("--instance", instance_path)->required();
    rec->add_option("--method", method, "exhaustive|local|degree|cleanup");
    rec->add_option("--seed", seed);
    rec->add_option("--delta", delta, "cleanup block fraction");
    rec->add_option("--weak", weak, "cleanup weak estimator");
    rec->add_option("--restarts", restarts);
    rec->add_option("--max-iters", max_iters);
    rec->add_option("--budget", budget, "exhaustive subset budget");
    rec->add_option("--out", out);

    auto* swp = app.add_subcommand("sweep", "phase-diagram sweep from a JSON config");
    swp->add_option("--config", config_path)->required();
    swp->add_option("--out", out);

    auto* chk = app.add_subcommand("check-bounds", "tail sandwich: lower / MC / upper");
    chk->add_option("--pair", pair_arg)->required();
    chk->add_option("--n", n)->required();
    chk->add_option("--gamma", gamma)->required();
    chk->add_option("--delta", delta)->required();
    chk->add_option("--reps", reps);
    chk->add_option("--seed", seed);
    chk->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);
    try {
        if (gen->parsed()) return run_gen(pair_arg, n, K, diag, seed, out, edges_out);
        if (thr->parsed()) return run_thresholds(pair_arg, n, K, diag, out);
        if (rec->parsed())
            return run_recover(instance_path, method, seed, delta, weak, restarts, max_iters,
                               budget, out);
        if (swp->parsed()) return run_sweep(config_path, out);
        if (chk->parsed()) return run_check_bounds(pair_arg, n, gamma, delta, reps, seed, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
