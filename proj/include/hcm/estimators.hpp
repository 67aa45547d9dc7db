// Likelihood statistics and community estimators: exhaustive MLE over all
// size-K subsets, a swap-based local-search surrogate, and the linear-time
// degree-thresholding baseline.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcm/model.hpp"

namespace hcm {

struct Estimate {
    std::vector<int> community;  // sorted, 0-based, |community| = K
    double score = 0.0;          // e(C,C), recomputed from scratch
    std::string method;
    int iterations = 0;          // applied swaps (local search only)
};

// e(S,T): sum of L_ij over pairs i < j with (i,j) in (S x T) u (T x S).
// In informative-diagonal mode the diagonal entries indexed by S n T are
// included as well.
inline double e_stat(const LlrMatrix& lmat, const std::vector<int>& s,
                     const std::vector<int>& t) {
    const int n = lmat.n;
    std::vector<unsigned char> f(n, 0);
    for (int i : s) {
        if (i < 0 || i >= n) throw std::out_of_range("e_stat: index outside [0,n)");
        f[i] |= 1;
    }
    for (int i : t) {
        if (i < 0 || i >= n) throw std::out_of_range("e_stat: index outside [0,n)");
        f[i] |= 2;
    }
    std::vector<int> members;
    members.reserve(s.size() + t.size());
    for (int i = 0; i < n; ++i)
        if (f[i]) members.push_back(i);
    double sum = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a) {
        const int i = members[a];
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            const int j = members[b];
            if ((f[i] & 1 && f[j] & 2) || (f[i] & 2 && f[j] & 1)) sum += lmat.values(i, j);
        }
    }
    if (lmat.diag_mode == DiagMode::InformativeDiagonal) {
        for (int i : members)
            if (f[i] == 3) sum += lmat.values(i, i);
    }
    return sum;
}

// C(n,k), capped: returns cap + 1 as soon as the count exceeds cap.
inline std::uint64_t count_combinations_capped(int n, int k, std::uint64_t cap) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > cap) return cap + 1;
    }
    return static_cast<std::uint64_t>(r);
}

// Enumerate all k-subsets of {0,...,n-1} in revolving-door order: each
// successive combination swaps exactly one element.  The visitor is called
// once per combination with the sorted current subset and the (out, in)
// delta from the previous one (out = in = -1 for the first visit).
inline void for_each_combination_revolving(
    int n, int k,
    const std::function<void(const std::vector<int>&, int out, int in)>& visit) {
    if (k < 0 || k > n) throw std::invalid_argument("combinations: need 0 <= k <= n");
    std::vector<int> set(k);
    std::iota(set.begin(), set.end(), 0);
    visit(set, -1, -1);
    if (k == 0 || k == n) return;
    if (k == 1) {
        for (int x = 1; x < n; ++x) {
            set[0] = x;
            visit(set, x - 1, x);
        }
        return;
    }
    // Knuth's revolving-door scheme, 1-based with a sentinel c[k+1] = n.
    std::vector<int> c(k + 2);
    for (int j = 1; j <= k; ++j) c[j] = j - 1;
    c[k + 1] = n;
    const bool odd = (k % 2 != 0);
    auto emit = [&](int out, int in) {
        for (int j = 1; j <= k; ++j) set[j - 1] = c[j];
        visit(set, out, in);
    };
    for (;;) {
        if (odd) {
            if (c[1] + 1 < c[2]) {
                const int out = c[1];
                ++c[1];
                emit(out, c[1]);
                continue;
            }
        } else {
            if (c[1] > 0) {
                const int out = c[1];
                --c[1];
                emit(out, c[1]);
                continue;
            }
        }
        int j = 2;
        bool decrease = odd;
        bool moved = false;
        while (j <= k) {
            if (decrease) {
                if (c[j] >= j) {
                    const int out = c[j];
                    c[j] = c[j - 1];
                    c[j - 1] = j - 2;
                    emit(out, j - 2);
                    moved = true;
                    break;
                }
            } else {
                if (c[j] + 1 < c[j + 1]) {
                    const int out = c[j - 1];
                    c[j - 1] = c[j];
                    ++c[j];
                    emit(out, c[j]);
                    moved = true;
                    break;
                }
            }
            ++j;
            decrease = !decrease;
        }
        if (!moved) return;
    }
}

// Exhaustive MLE: the size-K subset maximizing e(C,C), enumerated in
// revolving-door order with O(K) incremental score updates.  Ties break to
// the lexicographically smallest index set.  Refuses to run past `budget`
// subsets.
inline Estimate mle_exhaustive(const LlrMatrix& lmat, int K,
                               std::uint64_t budget = 10000000ULL) {
    const int n = lmat.n;
    if (K < 1 || K > n) throw std::invalid_argument("mle_exhaustive: need 1 <= K <= n");
    if (count_combinations_capped(n, K, budget) > budget)
        throw std::runtime_error(
            "mle_exhaustive: C(n,K) exceeds the subset budget; use the local-search estimator");
    const bool diag = lmat.diag_mode == DiagMode::InformativeDiagonal;
    double score = 0.0;
    bool have_score = false;
    double best_score = 0.0;
    std::vector<int> best;
    for_each_combination_revolving(n, K, [&](const std::vector<int>& set, int out, int in) {
        if (!have_score) {
            std::vector<int> v(set);
            score = 0.0;
            for (std::size_t a = 0; a < v.size(); ++a)
                for (std::size_t b = a + 1; b < v.size(); ++b) score += lmat.values(v[a], v[b]);
            if (diag)
                for (int i : v) score += lmat.values(i, i);
            have_score = true;
        } else {
            double delta = diag ? lmat.values(in, in) - lmat.values(out, out) : 0.0;
            for (int v : set) {
                if (v == in) continue;  // `set` already reflects the swap
                delta += lmat.values(in, v) - lmat.values(out, v);
            }
            score += delta;
        }
        if (best.empty() || score > best_score ||
            (score == best_score &&
             std::lexicographical_compare(set.begin(), set.end(), best.begin(), best.end()))) {
            best_score = score;
            best = set;
        }
    });
    Estimate e;
    e.community = std::move(best);
    e.score = e_stat(lmat, e.community, e.community);
    e.method = "exhaustive";
    return e;
}

namespace detail {

inline std::vector<double> community_row_sums(const LlrMatrix& lmat,
                                              const std::vector<int>& community) {
    std::vector<double> r(lmat.n, 0.0);
    for (int v = 0; v < lmat.n; ++v)
        for (int c : community) r[v] += lmat.values(v, c);
    return r;
}

}  // namespace detail

// Greedy swap local search: repeatedly scans all (i in C, j not in C)
// swaps, applies the best strictly-improving one (ties to the smallest
// (i,j)), and stops at a local optimum or after max_iters swaps.
inline Estimate mle_local_search(const LlrMatrix& lmat, int K, std::vector<int> init,
                                 int max_iters = 1000) {
    const int n = lmat.n;
    if (static_cast<int>(init.size()) != K)
        throw std::invalid_argument("mle_local_search: |init| must equal K");
    std::sort(init.begin(), init.end());
    const bool diag = lmat.diag_mode == DiagMode::InformativeDiagonal;
    std::vector<char> in(n, 0);
    for (int c : init) {
        if (c < 0 || c >= n) throw std::out_of_range("mle_local_search: init index");
        in[c] = 1;
    }
    std::vector<double> rowsum = detail::community_row_sums(lmat, init);
    std::vector<int> current = init;
    int iters = 0;
    while (iters < max_iters) {
        double best_gain = 0.0;
        int best_i = -1, best_j = -1;
        for (int i : current) {
            // gain of swapping i out for j: sum over C\{i} of L_j. - L_i.
            const double base_i = rowsum[i] - lmat.values(i, i);
            for (int j = 0; j < n; ++j) {
                if (in[j]) continue;
                double gain = (rowsum[j] - lmat.values(j, i)) - base_i;
                if (diag) gain += lmat.values(j, j) - lmat.values(i, i);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_i < 0) break;
        in[best_i] = 0;
        in[best_j] = 1;
        for (int v = 0; v < n; ++v)
            rowsum[v] += lmat.values(v, best_j) - lmat.values(v, best_i);
        current.erase(std::find(current.begin(), current.end(), best_i));
        current.insert(std::upper_bound(current.begin(), current.end(), best_j), best_j);
        ++iters;
    }
    Estimate e;
    e.community = std::move(current);
    e.score = e_stat(lmat, e.community, e.community);
    e.method = "local";
    e.iterations = iters;
    return e;
}

// Baseline: the K indices with the largest LLR row sums, ties to the
// smaller index.
inline Estimate degree_threshold(const LlrMatrix& lmat, int K) {
    const int n = lmat.n;
    if (K < 1 || K > n) throw std::invalid_argument("degree_threshold: need 1 <= K <= n");
    std::vector<std::pair<double, int>> rows(n);
    for (int v = 0; v < n; ++v) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += lmat.values(v, j);
        rows[v] = {s, v};
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    Estimate e;
    e.community.resize(K);
    for (int i = 0; i < K; ++i) e.community[i] = rows[i].second;
    std::sort(e.community.begin(), e.community.end());
    e.score = e_stat(lmat, e.community, e.community);
    e.method = "degree";
    return e;
}

// Local search with restarts: the first start is the degree-thresholding
// output, the rest are random size-K subsets.  Returns the best final
// estimate (ties to the lexicographically smaller set).
inline Estimate local_search_restarts(const LlrMatrix& lmat, int K, int restarts, int max_iters,
                                      Rng& rng) {
    if (restarts < 1) throw std::invalid_argument("local_search_restarts: restarts must be >= 1");
    Estimate best;
    for (int r = 0; r < restarts; ++r) {
        std::vector<int> init = (r == 0) ? degree_threshold(lmat, K).community
                                         : sample_subset(lmat.n, K, rng);
        Estimate e = mle_local_search(lmat, K, std::move(init), max_iters);
        if (best.community.empty() || e.score > best.score ||
            (e.score == best.score &&
             std::lexicographical_compare(e.community.begin(), e.community.end(),
                                          best.community.begin(), best.community.end()))) {
            best = std::move(e);
        }
    }
    return best;
}

}  // namespace hcm
