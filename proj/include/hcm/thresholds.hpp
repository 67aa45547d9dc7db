// Sharp recovery conditions evaluated at a concrete (n, K, pair) point,
// reported as signed margins with three-way verdicts.  All conditions are
// asymptotic in origin; a single-n verdict is a labeled finite-n margin,
// and sweeps over n are the intended way to read trends.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hcm/rate.hpp"

namespace hcm {

enum class Verdict { Sufficient, NecessaryOnly, Fails };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Sufficient: return "SUFFICIENT";
        case Verdict::NecessaryOnly: return "NECESSARY_ONLY";
        default: return "FAILS";
    }
}

// Strict comparison against the boundary: the boundary itself maps to
// NECESSARY_ONLY, mirroring the gap between the strict sufficient
// conditions and the weak-inequality necessary conditions.
inline Verdict verdict_from_margin(double value, double boundary) {
    if (value > boundary) return Verdict::Sufficient;
    if (value < boundary) return Verdict::Fails;
    return Verdict::NecessaryOnly;
}

// Lattice meet with Fails < NecessaryOnly < Sufficient; used to layer the
// exact-recovery condition on top of the weak one.
inline Verdict meet(Verdict a, Verdict b) {
    auto rank = [](Verdict v) {
        return v == Verdict::Fails ? 0 : (v == Verdict::NecessaryOnly ? 1 : 2);
    };
    return rank(a) <= rank(b) ? a : b;
}

namespace detail {
inline void check_nk(std::int64_t n, std::int64_t K) {
    if (K < 2) throw std::domain_error("thresholds: K must be >= 2");
    if (K >= n) throw std::domain_error("thresholds: K must be < n");
}
}  // namespace detail

struct WeakMargin {
    double kd = 0.0;          // K * D(P||Q), the divergence budget
    double factor = 0.0;      // K-1 (zero diagonal) or K+1 (informative diagonal)
    double ratio = 0.0;       // factor * D(P||Q) / log(n/K), compared against 2
    double ratio_k = 0.0;     // same with K in place of the factor (bounded-LLR variant)
    Verdict verdict = Verdict::Fails;
};

inline WeakMargin weak_margin(std::int64_t n, std::int64_t K, const DistPair& pair,
                              bool informative_diag = false) {
    detail::check_nk(n, K);
    const double d = pair.kl_pq();
    const double lognk = std::log(static_cast<double>(n) / static_cast<double>(K));
    WeakMargin w;
    w.kd = static_cast<double>(K) * d;
    w.factor = static_cast<double>(informative_diag ? K + 1 : K - 1);
    w.ratio = w.factor * d / lognk;
    w.ratio_k = static_cast<double>(K) * d / lognk;
    w.verdict = verdict_from_margin(w.ratio, 2.0);
    return w;
}

struct ExactMargin {
    double gamma = 0.0;  // (1/K) log(n/K), clamped into the valid theta range
    bool gamma_clamped = false;
    double ratio = 0.0;  // K * E_Q(gamma) / log n, compared against 1
    Verdict verdict = Verdict::Fails;  // layered on the weak verdict
};

inline ExactMargin exact_margin(std::int64_t n, std::int64_t K, const DistPair& pair,
                                bool informative_diag = false) {
    detail::check_nk(n, K);
    const double gamma =
        std::log(static_cast<double>(n) / static_cast<double>(K)) / static_cast<double>(K);
    const RateEval r = rate_e_q(pair, gamma);
    ExactMargin e;
    e.gamma = r.theta;
    e.gamma_clamped = r.clamped;
    e.ratio = static_cast<double>(K) * r.e_q / std::log(static_cast<double>(n));
    e.verdict = meet(verdict_from_margin(e.ratio, 1.0),
                     weak_margin(n, K, pair, informative_diag).verdict);
    return e;
}

struct BernoulliExact {
    double tau_star = 0.0;  // per-edge threshold, on the original (p,q) scale
    bool degenerate = false;  // p == q, or tau* outside the open interval between q and p
    bool swapped = false;     // computed on the complemented scale because p < q
    double ratio = 0.0;       // K d(tau*||q) / log n with tau* clamped into [q,p]
    Verdict verdict = Verdict::Fails;
};

// The per-edge threshold
//   tau* = (log(qbar/pbar) + (1/K) log(n/K)) / log(p qbar / (q pbar))
// in the orientation p > q; for p < q both distributions are complemented
// (x -> 1-x), which preserves the model and the divergences.  The reported
// ratio evaluates d(.||q) with tau* clamped into [q, p] so that it agrees
// with the clamped general rate-function route at every point.
inline BernoulliExact bern_tau_star(std::int64_t n, std::int64_t K, double p, double q) {
    detail::check_nk(n, K);
    if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0))
        throw std::domain_error("bern_tau_star: p, q must lie in (0,1)");
    BernoulliExact b;
    if (p == q) {
        b.degenerate = true;
        b.tau_star = std::numeric_limits<double>::quiet_NaN();
        return b;
    }
    double pe = p, qe = q;
    if (p < q) {
        b.swapped = true;
        pe = 1.0 - p;
        qe = 1.0 - q;
    }
    const double gamma =
        std::log(static_cast<double>(n) / static_cast<double>(K)) / static_cast<double>(K);
    const double denom = std::log(pe * (1.0 - qe) / (qe * (1.0 - pe)));
    const double tau_e = (std::log((1.0 - qe) / (1.0 - pe)) + gamma) / denom;
    b.tau_star = b.swapped ? 1.0 - tau_e : tau_e;
    b.degenerate = !(tau_e > qe && tau_e < pe);
    const double tau_eval = std::min(std::max(tau_e, qe), pe);
    b.ratio = static_cast<double>(K) * bern_divergence(tau_eval, qe) /
              std::log(static_cast<double>(n));
    b.verdict = meet(verdict_from_margin(b.ratio, 1.0),
                     weak_margin(n, K, DistPair::bernoulli(p, q)).verdict);
    return b;
}

// K mu^2 / (sqrt(2 log n) + sqrt(2 log K))^2, compared against 1.
inline double gauss_exact_margin(std::int64_t n, std::int64_t K, double mu) {
    detail::check_nk(n, K);
    if (mu == 0.0) throw std::domain_error("gauss_exact_margin: mu must be nonzero");
    const double s = std::sqrt(2.0 * std::log(static_cast<double>(n))) +
                     std::sqrt(2.0 * std::log(static_cast<double>(K)));
    return static_cast<double>(K) * mu * mu / (s * s);
}

struct GaussCritical {
    double mu_plus_sq = 0.0;   // larger root of E_Q((1/K) log(n/K)) = log n / K
    double mu_minus_sq = 0.0;  // smaller root
};

// mu_pm^2 = (2/K) (sqrt(log n) +/- sqrt(log K))^2.
inline GaussCritical gauss_mu_critical(std::int64_t n, std::int64_t K) {
    detail::check_nk(n, K);
    const double rn = std::sqrt(std::log(static_cast<double>(n)));
    const double rk = std::sqrt(std::log(static_cast<double>(K)));
    GaussCritical c;
    c.mu_plus_sq = 2.0 / static_cast<double>(K) * (rn + rk) * (rn + rk);
    c.mu_minus_sq = 2.0 / static_cast<double>(K) * (rn - rk) * (rn - rk);
    return c;
}

// I(x, y) = x - y log(e x / y) for x, y > 0.
inline double cap_i(double x, double y) {
    if (!(x > 0.0 && y > 0.0)) throw std::domain_error("cap_i: arguments must be positive");
    return x - y * std::log(std::exp(1.0) * x / y);
}

// tau0 = (a - b) / log(a/b).
inline double regime_tau0(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("regime_tau0: arguments must be positive");
    if (a == b) throw std::domain_error("regime_tau0: a == b is degenerate");
    return (a - b) / std::log(a / b);
}

// Exact-recovery predicate value for the regime K = rho n / log^{s-1} n,
// p = a log^s n / n, q = b log^s n / n: recovery boundary at rho I(b, tau0) = 1.
inline double regime_exact_value(double rho, double a, double b) {
    return rho * cap_i(b, regime_tau0(a, b));
}

struct ThresholdReport {
    std::int64_t n = 0;
    std::int64_t K = 0;
    bool informative_diag = false;
    WeakMargin weak;
    ExactMargin exact;
    std::optional<BernoulliExact> bern;
    std::optional<double> gauss_exact_ratio;
    std::optional<GaussCritical> gauss_critical;
};

inline ThresholdReport evaluate_thresholds(std::int64_t n, std::int64_t K, const DistPair& pair,
                                           bool informative_diag = false) {
    ThresholdReport r;
    r.n = n;
    r.K = K;
    r.informative_diag = informative_diag;
    r.weak = weak_margin(n, K, pair, informative_diag);
    r.exact = exact_margin(n, K, pair, informative_diag);
    if (pair.kind() == DistKind::Bernoulli)
        r.bern = bern_tau_star(n, K, pair.bern_p(), pair.bern_q());
    if (pair.kind() == DistKind::Gaussian) {
        r.gauss_exact_ratio = gauss_exact_margin(n, K, pair.gauss_mu());
        r.gauss_critical = gauss_mu_critical(n, K);
    }
    return r;
}

inline nlohmann::json to_json(const ThresholdReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["K"] = r.K;
    j["informative_diag"] = r.informative_diag;
    j["kd"] = r.weak.kd;
    j["weak"] = {{"ratio", r.weak.ratio},
                 {"ratio_k", r.weak.ratio_k},
                 {"factor", r.weak.factor},
                 {"verdict", to_string(r.weak.verdict)}};
    j["exact"] = {{"gamma", r.exact.gamma},
                  {"gamma_clamped", r.exact.gamma_clamped},
                  {"ratio", r.exact.ratio},
                  {"verdict", to_string(r.exact.verdict)}};
    if (r.bern) {
        j["bern"] = {{"tau_star", r.bern->tau_star},
                     {"degenerate", r.bern->degenerate},
                     {"swapped", r.bern->swapped},
                     {"ratio", r.bern->ratio},
                     {"verdict", to_string(r.bern->verdict)}};
    }
    if (r.gauss_exact_ratio) {
        j["gauss"] = {{"ratio", *r.gauss_exact_ratio},
                      {"mu_plus_sq", r.gauss_critical->mu_plus_sq},
                      {"mu_minus_sq", r.gauss_critical->mu_minus_sq}};
    }
    return j;
}

}  // namespace hcm
