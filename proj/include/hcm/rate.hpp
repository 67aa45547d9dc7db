// Large-deviation machinery: rate functions via Legendre transform of the
// LLR log-MGF, Chernoff index, tail bounds from both sides, and regularity
// certificates.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

#include "hcm/dist_pair.hpp"

namespace hcm {

// Grid sizes used by the certifiers below.  These are implementation
// choices, not model parameters; they are echoed into output metadata by
// the CLI so results are reproducible.
inline constexpr int kPsi2GridPoints = 400;
inline constexpr int kExpFamGridPoints = 400;
inline constexpr double kLegendreTol = 1e-12;

struct RateEval {
    double theta = 0.0;        // evaluated threshold (after clamping, if any)
    double e_q = 0.0;          // E_Q(theta) >= 0
    double e_p = 0.0;          // E_P(theta) = E_Q(theta) - theta
    double lambda_star = 0.0;  // maximizer in [0,1]
    bool clamped = false;      // theta was outside [-D(Q||P), D(P||Q)]
};

namespace detail {

// Maximize a concave function on [0,1] by golden-section search.
inline void golden_max(const std::function<double(double)>& f, double& xbest, double& fbest) {
    const double invphi = 0.6180339887498948482;
    double a = 0.0, b = 1.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > kLegendreTol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    xbest = 0.5 * (a + b);
    fbest = f(xbest);
}

}  // namespace detail

// E_Q(theta) = sup_{lambda in [0,1]} lambda*theta - psi_Q(lambda).
// theta outside [-D(Q||P), D(P||Q)] clamps with a flag when allow_clamp,
// otherwise raises.  The Gaussian kind uses the closed form
// E_Q(theta) = (mu + 2 theta / mu)^2 / 8 unless force_numeric is set.
inline RateEval rate_e_q(const DistPair& pair, double theta, bool allow_clamp = true,
                         bool force_numeric = false) {
    const double hi = pair.kl_pq();
    const double lo = -pair.kl_qp();
    RateEval r;
    r.clamped = false;
    double t = theta;
    if (t < lo || t > hi) {
        if (!allow_clamp) throw std::domain_error("rate_e_q: theta outside [-D(Q||P), D(P||Q)]");
        t = std::min(std::max(t, lo), hi);
        r.clamped = true;
    }
    r.theta = t;
    if (pair.kind() == DistKind::Gaussian && !force_numeric) {
        const double mu = pair.gauss_mu();
        const double s = mu + 2.0 * t / mu;
        r.e_q = s * s / 8.0;
        r.lambda_star = std::min(std::max(0.5 + t / (mu * mu), 0.0), 1.0);
    } else {
        double lam = 0.0, val = 0.0;
        detail::golden_max([&](double l) { return l * t - pair.psi_q(l); }, lam, val);
        r.lambda_star = lam;
        r.e_q = std::max(val, 0.0);
    }
    r.e_p = r.e_q - t;
    return r;
}

// Chernoff index C(P,Q) = E_Q(0) = sup_{0<=lambda<=1} -psi_Q(lambda).
inline double chernoff_index(const DistPair& pair) { return rate_e_q(pair, 0.0).e_q; }

enum class TailSide { QUpper, PLower };

// Chernoff bounds: Q[sum L_k >= n theta] <= exp(-n E_Q(theta)) and
// P[sum L_k <= n theta] <= exp(-n E_P(theta)).
inline double chernoff_tail_upper(const DistPair& pair, std::int64_t n, double theta,
                                  TailSide side) {
    if (n < 1) throw std::invalid_argument("chernoff_tail_upper: n must be >= 1");
    const RateEval r = rate_e_q(pair, theta, /*allow_clamp=*/false);
    const double e = (side == TailSide::QUpper) ? r.e_q : r.e_p;
    return std::exp(-static_cast<double>(n) * e);
}

// sup of psi_Q'' over [lo, hi] on an even grid.
inline double sup_psi_qpp(const DistPair& pair, double lo, double hi,
                          int points = kPsi2GridPoints) {
    double s = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double lam = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        s = std::max(s, pair.psi_qpp(lam));
    }
    return s;
}

struct TailLowerBound {
    double value = 0.0;
    bool vacuous = false;  // denominator <= 0: the bound carries no information
};

// Non-asymptotic lower bound on Q[sum L_k >= n gamma]:
//   exp( -(n E_Q(gamma+delta) + log 2) / (1 - sup_{0<=l<=1} psi_Q''(l) / (n delta^2)) ).
inline TailLowerBound ld_lower_bound(const DistPair& pair, std::int64_t n, double gamma,
                                     double delta) {
    if (n < 1) throw std::invalid_argument("ld_lower_bound: n must be >= 1");
    if (!(delta > 0.0)) throw std::domain_error("ld_lower_bound: delta must be positive");
    if (gamma < -pair.kl_qp() || gamma + delta > pair.kl_pq())
        throw std::domain_error("ld_lower_bound: need -D(Q||P) <= gamma < gamma+delta <= D(P||Q)");
    const double sup2 = sup_psi_qpp(pair, 0.0, 1.0);
    const double denom = 1.0 - sup2 / (static_cast<double>(n) * delta * delta);
    TailLowerBound b;
    if (denom <= 0.0) {
        b.value = 0.0;
        b.vacuous = true;
        return b;
    }
    const double eq = rate_e_q(pair, gamma + delta).e_q;
    b.value = std::exp(-(static_cast<double>(n) * eq + std::log(2.0)) / denom);
    return b;
}

struct AssumptionReport {
    double sup_psi2 = 0.0;    // sup of psi_Q'' over lambda in [-1,1] (grid)
    double min_div = 0.0;     // min{D(P||Q), D(Q||P)}
    double c_required = 0.0;  // their ratio: smallest constant certified on the grid
    std::optional<double> llr_bound;        // B = max|L| for bounded-LLR kinds
    std::optional<double> bounded_llr_constant;  // 2 e^{5B}

    bool holds_with(double c) const { return c >= c_required; }
};

// Certify the variance-domination regularity condition
// psi_Q''(lambda) <= C min{D(P||Q), D(Q||P)} on lambda in [-1,1].
inline AssumptionReport check_assumption1(const DistPair& pair) {
    AssumptionReport rep;
    rep.sup_psi2 = sup_psi_qpp(pair, -1.0, 1.0);
    rep.min_div = std::min(pair.kl_pq(), pair.kl_qp());
    rep.c_required = rep.sup_psi2 / rep.min_div;
    if (pair.bounded_llr()) {
        const double b = pair.max_abs_llr();
        rep.llr_bound = b;
        rep.bounded_llr_constant = 2.0 * std::exp(5.0 * b);
    }
    return rep;
}

// Exponential-family sufficient condition: the ratio
//   max_{theta in J} A''(theta) / min_{theta in I} A''(theta),
// where I has endpoints theta0, theta1 and J has endpoints
// theta0 +/- (theta1 - theta0).  Returns +inf when the minimum vanishes.
inline double expfam_condition(const std::function<double(double)>& a_second_deriv, double theta0,
                               double theta1, int points = kExpFamGridPoints) {
    const double radius = std::abs(theta1 - theta0);
    const double ilo = std::min(theta0, theta1), ihi = std::max(theta0, theta1);
    const double jlo = theta0 - radius, jhi = theta0 + radius;
    double num = -std::numeric_limits<double>::infinity();
    double den = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        num = std::max(num, a_second_deriv(jlo + (jhi - jlo) * f));
        den = std::min(den, a_second_deriv(ilo + (ihi - ilo) * f));
    }
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

// Direct grid test of the quadratic divergence lower bounds
//   E_P((1-eta) D(P||Q)) >= eta^2/(2C) D(P||Q)
//   E_Q(-(1-eta) D(Q||P)) >= eta^2/(2C) D(Q||P)   for eta in [0,1].
inline bool check_divergence_quadratic(const DistPair& pair, double c, int points = 101) {
    const double dpq = pair.kl_pq();
    const double dqp = pair.kl_qp();
    for (int i = 0; i < points; ++i) {
        const double eta = static_cast<double>(i) / (points - 1);
        const double rhs_p = eta * eta / (2.0 * c) * dpq;
        const double rhs_q = eta * eta / (2.0 * c) * dqp;
        if (rate_e_q(pair, (1.0 - eta) * dpq).e_p < rhs_p - 1e-12) return false;
        if (rate_e_q(pair, -(1.0 - eta) * dqp).e_q < rhs_q - 1e-12) return false;
    }
    return true;
}

}  // namespace hcm
