#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "hcm/model.hpp"

using hcm::DiagMode;
using hcm::DistPair;
using hcm::Instance;
using hcm::Rng;

TEST_CASE("forced community at n = K is rejected, n = K+1 works") {
    const DistPair pair = DistPair::bernoulli(0.5, 0.25);
    Rng rng(1);
    CHECK_THROWS_AS(hcm::sample_instance(2, 2, pair, rng), std::domain_error);
    const Instance inst = hcm::sample_instance(3, 2, pair, rng);
    CHECK(inst.community.size() == 2);
    for (int c : inst.community) {
        CHECK(c >= 0);
        CHECK(c < 3);
    }
}

TEST_CASE("observations live in the pair's support and the diagonal obeys the mode") {
    const DistPair pair = DistPair::bernoulli(0.6, 0.2);
    Rng rng(7);
    const Instance z = hcm::sample_instance(20, 5, pair, rng, DiagMode::ZeroDiagonal);
    for (int i = 0; i < z.n; ++i) {
        CHECK(z.values(i, i) == 0.0);
        for (int j = 0; j < z.n; ++j) {
            CHECK(z.values(i, j) == z.values(j, i));
            if (i != j) CHECK((z.values(i, j) == 0.0 || z.values(i, j) == 1.0));
        }
    }
    Rng rng2(7);
    const Instance inf = hcm::sample_instance(20, 5, pair, rng2, DiagMode::InformativeDiagonal);
    int diag_ones = 0;
    for (int i = 0; i < inf.n; ++i) {
        CHECK((inf.values(i, i) == 0.0 || inf.values(i, i) == 1.0));
        diag_ones += inf.values(i, i) == 1.0;
    }
    CHECK(diag_ones > 0);  // seeded; the informative diagonal actually carries draws
}

TEST_CASE("seeded determinism, bit for bit") {
    const DistPair pair = DistPair::gaussian(1.0);
    Rng a(42), b(42), c(43);
    const Instance ia = hcm::sample_instance(30, 6, pair, a);
    const Instance ib = hcm::sample_instance(30, 6, pair, b);
    const Instance ic = hcm::sample_instance(30, 6, pair, c);
    CHECK(ia.community == ib.community);
    CHECK(ia.values == ib.values);
    CHECK(ia.values == ib.values);
    bool differs = !(ia.community == ic.community);
    for (int i = 0; i < 30 && !differs; ++i)
        for (int j = i + 1; j < 30 && !differs; ++j) differs = ia.values(i, j) != ic.values(i, j);
    CHECK(differs);
}

TEST_CASE("within and outside community edge densities") {
    const DistPair pair = DistPair::bernoulli(0.5, 0.1);
    const int n = 500, K = 50, reps = 100;
    Rng rng(99);
    long in_ones = 0, out_ones = 0;
    long in_tot = 0, out_tot = 0;
    for (int r = 0; r < reps; ++r) {
        const Instance inst = hcm::sample_instance(n, K, pair, rng);
        std::vector<char> in(n, 0);
        for (int c : inst.community) in[c] = 1;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const bool inside = in[i] && in[j];
                (inside ? in_tot : out_tot) += 1;
                if (inst.values(i, j) == 1.0) (inside ? in_ones : out_ones) += 1;
            }
        }
    }
    CHECK(std::abs(static_cast<double>(in_ones) / in_tot - 0.5) <= 0.01);
    CHECK(std::abs(static_cast<double>(out_ones) / out_tot - 0.1) <= 0.003);
}

TEST_CASE("community membership is uniform across indices") {
    const DistPair pair = DistPair::bernoulli(0.9, 0.1);
    const int n = 50, K = 10, reps = 10000;
    std::vector<int> counts(n, 0);
    Rng rng(123);
    for (int r = 0; r < reps; ++r) {
        for (int c : hcm::sample_subset(n, K, rng)) ++counts[c];
    }
    const double expect = static_cast<double>(K) / n;
    const double se = std::sqrt(expect * (1 - expect) / reps);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(static_cast<double>(counts[i]) / reps - expect) <= 5 * se);
}

TEST_CASE("llr matrix closed forms") {
    SECTION("bernoulli has exactly two off-diagonal values") {
        const DistPair pair = DistPair::bernoulli(0.5, 0.25);
        Rng rng(5);
        const Instance inst = hcm::sample_instance(25, 6, pair, rng);
        const hcm::LlrMatrix L = hcm::llr_matrix(inst, pair);
        std::set<double> vals;
        for (int i = 0; i < 25; ++i)
            for (int j = i + 1; j < 25; ++j) vals.insert(L.values(i, j));
        CHECK(vals == std::set<double>{std::log(2.0 / 3.0), std::log(2.0)});
    }

    SECTION("gaussian is an affine map of the observations") {
        const DistPair pair = DistPair::gaussian(2.0);
        Rng rng(6);
        const Instance inst = hcm::sample_instance(15, 4, pair, rng);
        const hcm::LlrMatrix L = hcm::llr_matrix(inst, pair);
        for (int i = 0; i < 15; ++i) {
            CHECK(L.values(i, i) == 0.0);
            for (int j = i + 1; j < 15; ++j)
                CHECK(L.values(i, j) ==
                      Catch::Approx(2.0 * (inst.values(i, j) - 1.0)).margin(1e-14));
        }
    }

    SECTION("support violations are rejected") {
        const DistPair pair = DistPair::bernoulli(0.5, 0.25);
        Rng rng(8);
        Instance inst = hcm::sample_instance(10, 3, pair, rng);
        inst.values.set(2, 7, 0.5);
        CHECK_THROWS_AS(hcm::llr_matrix(inst, pair), std::domain_error);
    }
}

TEST_CASE("within-community LLR total matches its expectation") {
    // mean of sum_{i<j in C*} L_ij over 200 gaussian instances is
    // (K choose 2) D(P||Q) within 5 standard errors.
    const DistPair pair = DistPair::gaussian(1.0);
    const int n = 60, K = 12, reps = 200;
    const double pairs = K * (K - 1) / 2.0;
    Rng rng(2718);
    double total = 0.0;
    for (int r = 0; r < reps; ++r) {
        const Instance inst = hcm::sample_instance(n, K, pair, rng);
        const hcm::LlrMatrix L = hcm::llr_matrix(inst, pair);
        for (std::size_t a = 0; a < inst.community.size(); ++a)
            for (std::size_t b = a + 1; b < inst.community.size(); ++b)
                total += L.values(inst.community[a], inst.community[b]);
    }
    const double mean = total / reps;
    const double expect = pairs * pair.kl_pq();
    // var of one instance total = (K choose 2) var_P(L) = pairs * psi''_Q(1)
    const double se = std::sqrt(pairs * pair.psi_qpp(1.0) / reps);
    CHECK(std::abs(mean - expect) <= 5 * se);
}

TEST_CASE("sym_diff_size") {
    CHECK(hcm::sym_diff_size({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(hcm::sym_diff_size({1, 2, 3}, {2, 3, 4}) == 2);
    CHECK(hcm::sym_diff_size({}, {2, 3}) == 2);
    CHECK(hcm::sym_diff_size({0, 9}, {1, 2}) == 4);
}
