// The distribution pair (P, Q): sampling, log-likelihood ratios, KL
// divergences and log moment generating functions of the LLR.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hcm/rng.hpp"

namespace hcm {

enum class Measure { UnderP, UnderQ };
enum class DistKind { Bernoulli, Gaussian, FiniteSupport };

// Immutable after construction; safe to share across threads.  Sampling
// requires a caller-owned Rng.
class DistPair {
public:
    static constexpr double kPsiLambdaMin = -2.0;
    static constexpr double kPsiLambdaMax = 2.0;

    static DistPair bernoulli(double p, double q) {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bernoulli: p must be in (0,1)");
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("bernoulli: q must be in (0,1)");
        if (p == q) throw std::invalid_argument("bernoulli: p == q gives a degenerate pair");
        return DistPair(Bern{p, q});
    }

    static DistPair gaussian(double mu) {
        if (!(std::isfinite(mu)) || mu == 0.0)
            throw std::invalid_argument("gaussian: mu must be finite and nonzero");
        return DistPair(Gauss{mu});
    }

    static DistPair finite_support(std::vector<double> p_masses, std::vector<double> q_masses) {
        if (p_masses.size() != q_masses.size())
            throw std::invalid_argument("finite_support: mass vectors must share an alphabet");
        if (p_masses.size() < 2)
            throw std::invalid_argument("finite_support: alphabet needs at least two atoms");
        double sp = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < p_masses.size(); ++i) {
            if (!(p_masses[i] > 0.0) || !(q_masses[i] > 0.0))
                throw std::invalid_argument(
                    "finite_support: every atom needs strictly positive mass under P and Q");
            sp += p_masses[i];
            sq += q_masses[i];
        }
        if (std::abs(sp - 1.0) > 1e-12 || std::abs(sq - 1.0) > 1e-12)
            throw std::invalid_argument("finite_support: masses must sum to 1 (tol 1e-12)");
        if (p_masses == q_masses)
            throw std::invalid_argument("finite_support: p == q gives a degenerate pair");
        Finite f;
        f.pm = std::move(p_masses);
        f.qm = std::move(q_masses);
        f.llr.resize(f.pm.size());
        for (std::size_t i = 0; i < f.pm.size(); ++i)
            f.llr[i] = std::log(f.pm[i]) - std::log(f.qm[i]);
        return DistPair(std::move(f));
    }

    DistKind kind() const {
        if (std::holds_alternative<Bern>(v_)) return DistKind::Bernoulli;
        if (std::holds_alternative<Gauss>(v_)) return DistKind::Gaussian;
        return DistKind::FiniteSupport;
    }

    // L(x) = log dP/dQ (x).  Observations are stored as doubles: {0,1} for
    // Bernoulli, alphabet indices for FiniteSupport, reals for Gaussian.
    double llr(double x) const {
        if (const auto* b = std::get_if<Bern>(&v_)) {
            if (x == 1.0) return std::log(b->p / b->q);
            if (x == 0.0) return std::log((1.0 - b->p) / (1.0 - b->q));
            throw std::domain_error("llr: Bernoulli observation must be 0 or 1");
        }
        if (const auto* g = std::get_if<Gauss>(&v_)) {
            if (!std::isfinite(x)) throw std::domain_error("llr: non-finite Gaussian observation");
            return g->mu * (x - g->mu / 2.0);
        }
        const auto& f = std::get<Finite>(v_);
        const double r = std::floor(x);
        if (r != x || x < 0.0 || x >= static_cast<double>(f.pm.size()))
            throw std::domain_error("llr: observation is not a valid alphabet index");
        return f.llr[static_cast<std::size_t>(r)];
    }

    double kl_pq() const {  // D(P || Q)
        if (const auto* b = std::get_if<Bern>(&v_)) return bern_kl(b->p, b->q);
        if (const auto* g = std::get_if<Gauss>(&v_)) return g->mu * g->mu / 2.0;
        const auto& f = std::get<Finite>(v_);
        double s = 0.0;
        for (std::size_t i = 0; i < f.pm.size(); ++i) s += f.pm[i] * f.llr[i];
        return s;
    }

    double kl_qp() const {  // D(Q || P)
        if (const auto* b = std::get_if<Bern>(&v_)) return bern_kl(b->q, b->p);
        if (const auto* g = std::get_if<Gauss>(&v_)) return g->mu * g->mu / 2.0;
        const auto& f = std::get<Finite>(v_);
        double s = 0.0;
        for (std::size_t i = 0; i < f.pm.size(); ++i) s -= f.qm[i] * f.llr[i];
        return s;
    }

    // psi_Q(lambda) = log E_Q[exp(lambda L)], lambda in [-2, 2].
    double psi_q(double lambda) const {
        check_lambda(lambda);
        if (const auto* g = std::get_if<Gauss>(&v_)) {
            const double m2 = g->mu * g->mu;
            return (lambda * lambda - lambda) * m2 / 2.0;
        }
        if (const auto* b = std::get_if<Bern>(&v_)) {
            const double l1 = std::log(b->p / b->q);
            const double l0 = std::log((1.0 - b->p) / (1.0 - b->q));
            const double w[2] = {b->q, 1.0 - b->q};
            const double a[2] = {lambda * l1, lambda * l0};
            return log_sum_exp(w, a, 2);
        }
        const auto& f = std::get<Finite>(v_);
        std::vector<double> a(f.llr.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = lambda * f.llr[i];
        return log_sum_exp(f.qm.data(), a.data(), a.size());
    }

    // psi_P(lambda) = psi_Q(lambda + 1).
    double psi_p(double lambda) const { return psi_q(lambda + 1.0); }

    // Second derivative of psi_Q.  Closed form (tilted variance) for the
    // Bernoulli and Gaussian kinds; central differences with h = 1e-4 for
    // FiniteSupport.
    double psi_qpp(double lambda) const {
        if (const auto* g = std::get_if<Gauss>(&v_)) return g->mu * g->mu;
        if (const auto* b = std::get_if<Bern>(&v_)) {
            check_lambda(lambda);
            const double l1 = std::log(b->p / b->q);
            const double l0 = std::log((1.0 - b->p) / (1.0 - b->q));
            const double psi = psi_q(lambda);
            const double w1 = b->q * std::exp(lambda * l1 - psi);
            const double w0 = (1.0 - b->q) * std::exp(lambda * l0 - psi);
            const double m = w1 * l1 + w0 * l0;
            return w1 * l1 * l1 + w0 * l0 * l0 - m * m;
        }
        const double h = 1e-4;
        check_lambda(lambda - h);
        check_lambda(lambda + h);
        return (psi_q(lambda + h) - 2.0 * psi_q(lambda) + psi_q(lambda - h)) / (h * h);
    }

    double sample(Measure m, Rng& rng) const {
        if (const auto* b = std::get_if<Bern>(&v_)) {
            const double prob = (m == Measure::UnderP) ? b->p : b->q;
            return rng.uniform01() < prob ? 1.0 : 0.0;
        }
        if (const auto* g = std::get_if<Gauss>(&v_)) {
            const double z = rng.normal();
            return (m == Measure::UnderP) ? g->mu + z : z;
        }
        const auto& f = std::get<Finite>(v_);
        const auto& masses = (m == Measure::UnderP) ? f.pm : f.qm;
        const double u = rng.uniform01();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < masses.size(); ++i) {
            cum += masses[i];
            if (u < cum) return static_cast<double>(i);
        }
        return static_cast<double>(masses.size() - 1);
    }

    bool bounded_llr() const { return kind() != DistKind::Gaussian; }

    // max_x |L(x)| for bounded-LLR kinds.
    double max_abs_llr() const {
        if (const auto* b = std::get_if<Bern>(&v_)) {
            return std::max(std::abs(std::log(b->p / b->q)),
                            std::abs(std::log((1.0 - b->p) / (1.0 - b->q))));
        }
        if (std::holds_alternative<Gauss>(v_))
            throw std::domain_error("max_abs_llr: Gaussian LLR is unbounded");
        const auto& f = std::get<Finite>(v_);
        double m = 0.0;
        for (double l : f.llr) m = std::max(m, std::abs(l));
        return m;
    }

    // Accessors for the kind-specific parameters.
    double bern_p() const { return std::get<Bern>(v_).p; }
    double bern_q() const { return std::get<Bern>(v_).q; }
    double gauss_mu() const { return std::get<Gauss>(v_).mu; }
    const std::vector<double>& finite_p() const { return std::get<Finite>(v_).pm; }
    const std::vector<double>& finite_q() const { return std::get<Finite>(v_).qm; }
    const std::vector<double>& finite_llr() const { return std::get<Finite>(v_).llr; }

    std::string describe() const {
        std::ostringstream os;
        if (const auto* b = std::get_if<Bern>(&v_)) {
            os << "bernoulli(p=" << b->p << ";q=" << b->q << ")";
        } else if (const auto* g = std::get_if<Gauss>(&v_)) {
            os << "gaussian(mu=" << g->mu << ")";
        } else {
            os << "finite(m=" << std::get<Finite>(v_).pm.size() << ")";
        }
        return os.str();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        if (const auto* b = std::get_if<Bern>(&v_)) {
            j["kind"] = "bernoulli";
            j["p"] = b->p;
            j["q"] = b->q;
        } else if (const auto* g = std::get_if<Gauss>(&v_)) {
            j["kind"] = "gaussian";
            j["mu"] = g->mu;
        } else {
            const auto& f = std::get<Finite>(v_);
            j["kind"] = "finite";
            j["p"] = f.pm;
            j["q"] = f.qm;
        }
        return j;
    }

    static DistPair from_json(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "bernoulli")
            return bernoulli(j.at("p").get<double>(), j.at("q").get<double>());
        if (kind == "gaussian") return gaussian(j.at("mu").get<double>());
        if (kind == "finite")
            return finite_support(j.at("p").get<std::vector<double>>(),
                                  j.at("q").get<std::vector<double>>());
        throw std::invalid_argument("pair json: unknown kind '" + kind + "'");
    }

private:
    struct Bern { double p, q; };
    struct Gauss { double mu; };
    struct Finite { std::vector<double> pm, qm, llr; };

    explicit DistPair(Bern b) : v_(b) {}
    explicit DistPair(Gauss g) : v_(g) {}
    explicit DistPair(Finite f) : v_(std::move(f)) {}

    static void check_lambda(double lambda) {
        if (!(lambda >= kPsiLambdaMin && lambda <= kPsiLambdaMax))
            throw std::domain_error("psi_q: lambda outside [-2, 2]");
    }

    static double bern_kl(double x, double y) {
        return x * std::log(x / y) + (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
    }

    static double log_sum_exp(const double* w, const double* a, std::size_t m) {
        double amax = a[0];
        for (std::size_t i = 1; i < m; ++i) amax = std::max(amax, a[i]);
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += w[i] * std::exp(a[i] - amax);
        return amax + std::log(s);
    }

    std::variant<Bern, Gauss, Finite> v_;
};

// d(x || y) = D(Bern(x) || Bern(y)); convention 0 log 0 = 0.
inline double bern_divergence(double x, double y) {
    if (!(y > 0.0 && y < 1.0)) throw std::domain_error("bern_divergence: y must be in (0,1)");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("bern_divergence: x must be in [0,1]");
    double s = 0.0;
    if (x > 0.0) s += x * std::log(x / y);
    if (x < 1.0) s += (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
    return s;
}

}  // namespace hcm
