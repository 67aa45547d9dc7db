// Monte Carlo experiment driver: trial batteries, phase-diagram sweeps and
// tail-bound verification.  Per-trial seeds are hashed from (master seed,
// trial index), results are aggregated in trial order, and every published
// statistic is therefore independent of the thread schedule.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hcm/cleanup.hpp"
#include "hcm/estimators.hpp"
#include "hcm/io.hpp"
#include "hcm/model.hpp"
#include "hcm/rate.hpp"
#include "hcm/thresholds.hpp"

namespace hcm {

inline int thread_count_from_env() {
    if (const char* env = std::getenv("HCM_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Run fn(0..count-1) on `threads` workers.  fn must only touch its own
// slot; the first exception (by smallest index) is rethrown after join.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads <= 0) threads = thread_count_from_env();
    threads = static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::pair<std::size_t, std::exception_ptr>> errors(threads,
                                                                   {count, nullptr});
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    if (i < errors[t].first) errors[t] = {i, std::current_exception()};
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    std::size_t first = count;
    std::exception_ptr eptr;
    for (const auto& [i, e] : errors) {
        if (e && i < first) {
            first = i;
            eptr = e;
        }
    }
    if (eptr) std::rethrow_exception(eptr);
}

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

inline WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
    if (trials <= 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

struct TrialStats {
    int trials = 0;
    int exact_successes = 0;
    double exact_rate = 0.0;
    double mean_hamming_frac = 0.0;  // mean |Chat triangle C*| / K, in [0,2]
    double mean_symdiff = 0.0;
    WilsonInterval ci95;             // for the exact-recovery rate
};

enum class Method { Exhaustive, Local, Degree, Cleanup };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Exhaustive: return "exhaustive";
        case Method::Local: return "local";
        case Method::Degree: return "degree";
        default: return "cleanup";
    }
}

inline Method method_from_string(const std::string& s) {
    if (s == "exhaustive") return Method::Exhaustive;
    if (s == "local") return Method::Local;
    if (s == "degree") return Method::Degree;
    if (s == "cleanup") return Method::Cleanup;
    throw std::invalid_argument("method: expected exhaustive|local|degree|cleanup");
}

struct PipelineConfig {
    Method method = Method::Exhaustive;
    int local_restarts = 5;
    int local_max_iters = 1000;
    std::uint64_t exhaustive_budget = 10000000ULL;
    double cleanup_delta = 1.0 / 3.0;
    WeakMethod cleanup_weak = WeakMethod::Exhaustive;
};

struct ParamPoint {
    int n = 0;
    int K = 0;
    DistPair pair;
    DiagMode diag = DiagMode::ZeroDiagonal;
    PipelineConfig pipeline;
};

// Substream labels hung off each per-trial seed.
namespace seed_stream {
inline constexpr std::uint64_t kInstance = 1;
inline constexpr std::uint64_t kEstimator = 2;
inline constexpr std::uint64_t kPartition = 3;
}  // namespace seed_stream

inline Estimate run_pipeline(const Instance& inst, const LlrMatrix& lmat,
                             const PipelineConfig& cfg, std::uint64_t trial_seed) {
    switch (cfg.method) {
        case Method::Exhaustive:
            return mle_exhaustive(lmat, inst.K, cfg.exhaustive_budget);
        case Method::Local: {
            Rng rng(derive_seed(trial_seed, seed_stream::kEstimator));
            return local_search_restarts(lmat, inst.K, cfg.local_restarts, cfg.local_max_iters,
                                         rng);
        }
        case Method::Degree:
            return degree_threshold(lmat, inst.K);
        default: {
            CleanupConfig cc;
            cc.delta = cfg.cleanup_delta;
            cc.weak_method = cfg.cleanup_weak;
            cc.partition_seed = derive_seed(trial_seed, seed_stream::kPartition);
            cc.estimator_seed = derive_seed(trial_seed, seed_stream::kEstimator);
            cc.local_restarts = cfg.local_restarts;
            cc.local_max_iters = cfg.local_max_iters;
            cc.exhaustive_budget = cfg.exhaustive_budget;
            return clean_up(inst, lmat, inst.K, cc).estimate;
        }
    }
}

// Run `trials` independent instances of the configured pipeline.  The
// result is a pure function of (point, trials, master_seed).
inline TrialStats run_trials(const ParamPoint& point, int trials, std::uint64_t master_seed,
                             int threads = 0) {
    if (trials < 1) throw std::invalid_argument("run_trials: trials must be >= 1");
    std::vector<int> symdiff(trials, 0);
    parallel_for(
        static_cast<std::size_t>(trials), threads,
        [&](std::size_t t) {
            try {
                const std::uint64_t trial_seed = derive_seed(master_seed, t);
                Rng gen(derive_seed(trial_seed, seed_stream::kInstance));
                const Instance inst = sample_instance(point.n, point.K, point.pair, gen,
                                                      point.diag, trial_seed);
                const LlrMatrix lmat = llr_matrix(inst, point.pair);
                const Estimate est = run_pipeline(inst, lmat, point.pipeline, trial_seed);
                symdiff[t] = sym_diff_size(est.community, inst.community);
            } catch (const std::exception& e) {
                throw std::runtime_error("trial " + std::to_string(t) + ": " + e.what());
            }
        });
    TrialStats s;
    s.trials = trials;
    double sum_frac = 0.0, sum_diff = 0.0;
    for (int t = 0; t < trials; ++t) {
        if (symdiff[t] == 0) ++s.exact_successes;
        sum_diff += symdiff[t];
        sum_frac += static_cast<double>(symdiff[t]) / point.K;
    }
    s.exact_rate = static_cast<double>(s.exact_successes) / trials;
    s.mean_symdiff = sum_diff / trials;
    s.mean_hamming_frac = sum_frac / trials;
    s.ci95 = wilson_interval(s.exact_successes, trials, kZ95);
    return s;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepConfig {
    nlohmann::json raw;  // echoed into the output header
    std::vector<int> n_grid;
    std::vector<int> k_grid;             // used when k_rule is absent
    std::optional<double> k_rho;         // K = round(rho n / log^{s-1} n)
    double k_s = 1.0;
    std::string kind;                    // bernoulli | gaussian
    std::vector<double> mu_grid;         // gaussian
    std::vector<double> p_grid, q_grid;  // bernoulli
    DiagMode diag = DiagMode::ZeroDiagonal;
    int trials = 100;
    std::uint64_t master_seed = 0;
    PipelineConfig pipeline;
};

namespace detail {
inline std::vector<double> number_list(const nlohmann::json& j) {
    std::vector<double> v;
    if (j.is_array())
        for (const auto& x : j) v.push_back(x.get<double>());
    else
        v.push_back(j.get<double>());
    return v;
}
}  // namespace detail

inline SweepConfig parse_sweep_config(const nlohmann::json& j) {
    SweepConfig c;
    c.raw = j;
    for (const auto& x : detail::number_list(j.at("n"))) c.n_grid.push_back(static_cast<int>(x));
    if (j.contains("k_rule")) {
        c.k_rho = j["k_rule"].at("rho").get<double>();
        c.k_s = j["k_rule"].value("s", 1.0);
    } else {
        for (const auto& x : detail::number_list(j.at("K")))
            c.k_grid.push_back(static_cast<int>(x));
    }
    const auto& pj = j.at("pair");
    c.kind = pj.at("kind").get<std::string>();
    if (c.kind == "gaussian") {
        c.mu_grid = detail::number_list(pj.at("mu"));
    } else if (c.kind == "bernoulli") {
        c.p_grid = detail::number_list(pj.at("p"));
        c.q_grid = detail::number_list(pj.at("q"));
    } else {
        throw std::invalid_argument("sweep: pair kind must be gaussian or bernoulli");
    }
    c.diag = diag_mode_from_string(j.value("diag", "zero"));
    c.trials = j.value("trials", 100);
    c.master_seed = j.value("seed", std::uint64_t{0});
    c.pipeline.method = method_from_string(j.value("method", "exhaustive"));
    if (j.contains("local")) {
        c.pipeline.local_restarts = j["local"].value("restarts", 5);
        c.pipeline.local_max_iters = j["local"].value("max_iters", 1000);
    }
    c.pipeline.exhaustive_budget = j.value("budget", std::uint64_t{10000000});
    if (j.contains("cleanup")) {
        c.pipeline.cleanup_delta = j["cleanup"].value("delta", 1.0 / 3.0);
        c.pipeline.cleanup_weak =
            weak_method_from_string(j["cleanup"].value("weak", "exhaustive"));
    }
    if (c.n_grid.empty() || (!c.k_rho && c.k_grid.empty()))
        throw std::invalid_argument("sweep: n and K grids must be nonempty");
    if (c.kind == "gaussian" ? c.mu_grid.empty() : (c.p_grid.empty() || c.q_grid.empty()))
        throw std::invalid_argument("sweep: pair parameter grid must be nonempty");
    if (c.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
    return c;
}

struct SweepRow {
    int point = 0;
    int n = 0;
    int K = 0;
    DistPair pair;
    std::optional<ThresholdReport> report;
    std::optional<TrialStats> stats;
    std::string error;
};

inline int k_from_rule(int n, double rho, double s) {
    const double k = rho * n / std::pow(std::log(static_cast<double>(n)), s - 1.0);
    return std::max(2, static_cast<int>(std::llround(k)));
}

// One row per grid point; per-point failures land in the error column and
// the sweep continues.  Progress (including wall-clock per point) goes to
// the log stream, never into the table, so output files are reproducible.
inline std::vector<SweepRow> phase_diagram(const SweepConfig& cfg, int threads = 0,
                                           std::ostream* log = nullptr) {
    std::vector<std::pair<int, DistPair>> points;  // (n, pair)
    std::vector<int> ks;
    auto push_point = [&](int n, int K, const DistPair& pr) {
        points.emplace_back(n, pr);
        ks.push_back(K);
    };
    for (int n : cfg.n_grid) {
        std::vector<int> k_list =
            cfg.k_rho ? std::vector<int>{k_from_rule(n, *cfg.k_rho, cfg.k_s)} : cfg.k_grid;
        for (int K : k_list) {
            if (cfg.kind == "gaussian") {
                for (double mu : cfg.mu_grid) push_point(n, K, DistPair::gaussian(mu));
            } else {
                for (double p : cfg.p_grid)
                    for (double q : cfg.q_grid) push_point(n, K, DistPair::bernoulli(p, q));
            }
        }
    }
    std::vector<SweepRow> rows;
    rows.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        SweepRow row{static_cast<int>(i), points[i].first, ks[i], points[i].second, {}, {}, {}};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            row.report = evaluate_thresholds(row.n, row.K, row.pair,
                                             cfg.diag == DiagMode::InformativeDiagonal);
            ParamPoint pt{row.n, row.K, row.pair, cfg.diag, cfg.pipeline};
            row.stats = run_trials(pt, cfg.trials, derive_seed(cfg.master_seed, i), threads);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        if (log) {
            const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
            (*log) << "point " << i << "/" << points.size() << " n=" << row.n
                   << " K=" << row.K << " pair=" << row.pair.describe() << " wall_ms=" << ms
                   << (row.error.empty() ? "" : (" error=" + row.error)) << "\n";
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols = {
        "point",        "n",
        "K",            "kind",
        "mu",           "p",
        "q",            "kd",
        "weak_ratio",   "weak_ratio_k",
        "weak_verdict", "gamma",
        "exact_ratio",  "exact_verdict",
        "tau_star",     "bern_ratio",
        "gauss_ratio",  "mu_plus_sq",
        "mu_minus_sq",  "trials",
        "exact_successes", "exact_rate",
        "ci95_lo",      "ci95_hi",
        "mean_hamming_frac", "mean_symdiff",
        "error"};
    return cols;
}

inline std::vector<std::string> sweep_row_cells(const SweepRow& r) {
    auto fd = [](double x) { return format_double(x); };
    std::vector<std::string> c;
    c.push_back(std::to_string(r.point));
    c.push_back(std::to_string(r.n));
    c.push_back(std::to_string(r.K));
    const DistKind kind = r.pair.kind();
    c.push_back(kind == DistKind::Gaussian ? "gaussian"
                                           : (kind == DistKind::Bernoulli ? "bernoulli" : "finite"));
    c.push_back(kind == DistKind::Gaussian ? fd(r.pair.gauss_mu()) : "");
    c.push_back(kind == DistKind::Bernoulli ? fd(r.pair.bern_p()) : "");
    c.push_back(kind == DistKind::Bernoulli ? fd(r.pair.bern_q()) : "");
    if (r.report) {
        const ThresholdReport& t = *r.report;
        c.push_back(fd(t.weak.kd));
        c.push_back(fd(t.weak.ratio));
        c.push_back(fd(t.weak.ratio_k));
        c.push_back(to_string(t.weak.verdict));
        c.push_back(fd(t.exact.gamma));
        c.push_back(fd(t.exact.ratio));
        c.push_back(to_string(t.exact.verdict));
        c.push_back(t.bern ? fd(t.bern->tau_star) : "");
        c.push_back(t.bern ? fd(t.bern->ratio) : "");
        c.push_back(t.gauss_exact_ratio ? fd(*t.gauss_exact_ratio) : "");
        c.push_back(t.gauss_critical ? fd(t.gauss_critical->mu_plus_sq) : "");
        c.push_back(t.gauss_critical ? fd(t.gauss_critical->mu_minus_sq) : "");
    } else {
        for (int i = 0; i < 12; ++i) c.push_back("");
    }
    if (r.stats) {
        const TrialStats& s = *r.stats;
        c.push_back(std::to_string(s.trials));
        c.push_back(std::to_string(s.exact_successes));
        c.push_back(fd(s.exact_rate));
        c.push_back(fd(s.ci95.lo));
        c.push_back(fd(s.ci95.hi));
        c.push_back(fd(s.mean_hamming_frac));
        c.push_back(fd(s.mean_symdiff));
    } else {
        for (int i = 0; i < 7; ++i) c.push_back("");
    }
    c.push_back(r.error);
    return c;
}

// ---------------------------------------------------------------------------
// Tail-bound verification

struct BoundsCheck {
    int n = 0;
    double gamma = 0.0;
    double delta = 0.0;
    int replicates = 0;
    int hits = 0;
    double p_hat = 0.0;
    WilsonInterval ci99;
    double lower = 0.0;
    bool lower_vacuous = false;
    double upper = 0.0;
    bool sandwich_ok = false;
};

// Monte Carlo estimate of Q[sum_{k<=n} L_k >= n gamma] with a 99% Wilson
// interval, checked for consistency against the analytic bracket
// [ld_lower_bound, chernoff_tail_upper]: the interval must not refute
// either side.
inline BoundsCheck verify_bounds(const DistPair& pair, int n, double gamma, double delta,
                                 int replicates, std::uint64_t seed, int threads = 0) {
    if (n < 1 || replicates < 1)
        throw std::invalid_argument("verify_bounds: n and replicates must be >= 1");
    BoundsCheck b;
    b.n = n;
    b.gamma = gamma;
    b.delta = delta;
    b.replicates = replicates;
    const TailLowerBound lb = ld_lower_bound(pair, n, gamma, delta);
    b.lower = lb.value;
    b.lower_vacuous = lb.vacuous;
    b.upper = chernoff_tail_upper(pair, n, gamma, TailSide::QUpper);
    std::vector<char> hit(replicates, 0);
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += pair.llr(pair.sample(Measure::UnderQ, rng));
        hit[r] = sum >= n * gamma ? 1 : 0;
    });
    for (char h : hit) b.hits += h;
    b.p_hat = static_cast<double>(b.hits) / replicates;
    b.ci99 = wilson_interval(b.hits, replicates, kZ99);
    b.sandwich_ok = (b.ci99.hi >= b.lower) && (b.ci99.lo <= b.upper);
    return b;
}

// Exact binomial upper tail P[X >= k], X ~ Binom(n, p).
inline double binom_upper_tail(int n, double p, int k) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    double s = 0.0;
    for (int i = k; i <= n; ++i) {
        const double logterm = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                               std::lgamma(n - i + 1.0) + i * std::log(p) +
                               (n - i) * std::log1p(-p);
        s += std::exp(logterm);
    }
    return std::min(s, 1.0);
}

struct BinomCheckRow {
    int n = 0;
    double p = 0.0;
    double eta = 0.0;
    double upper_exact = 0.0;  // P[X >= (1+eta) n p]
    double upper_bound = 0.0;  // exp(-eta^2 n p / 3)
    bool upper_ok = false;
    double lower_exact = 0.0;  // P[X <= (1-eta) n p]
    double lower_bound = 0.0;  // exp(-eta^2 n p / 2)
    bool lower_ok = false;
};

// Quadratic binomial Chernoff bounds against exact tail sums, for
// 0 <= eta <= 1.
inline BinomCheckRow check_binomial_bounds(int n, double p, double eta) {
    BinomCheckRow r;
    r.n = n;
    r.p = p;
    r.eta = eta;
    const double np = n * p;
    r.upper_exact = binom_upper_tail(n, p, static_cast<int>(std::ceil((1.0 + eta) * np - 1e-12)));
    r.upper_bound = std::exp(-eta * eta * np / 3.0);
    r.upper_ok = r.upper_exact <= r.upper_bound;
    const int kl = static_cast<int>(std::floor((1.0 - eta) * np + 1e-12));
    r.lower_exact = 1.0 - binom_upper_tail(n, p, kl + 1);
    r.lower_bound = std::exp(-eta * eta * np / 2.0);
    r.lower_ok = r.lower_exact <= r.lower_bound;
    return r;
}

}  // namespace hcm
