// Voting cleanup with successive withholding: randomly partition the
// indices, run a weak-recovery estimator on each reduced set, classify the
// withheld block by LLR voting, and keep the K best-voted indices overall.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcm/estimators.hpp"
#include "hcm/model.hpp"

namespace hcm {

enum class WeakMethod { Exhaustive, Local, Degree };

inline const char* to_string(WeakMethod m) {
    switch (m) {
        case WeakMethod::Exhaustive: return "exhaustive";
        case WeakMethod::Local: return "local";
        default: return "degree";
    }
}

inline WeakMethod weak_method_from_string(const std::string& s) {
    if (s == "exhaustive") return WeakMethod::Exhaustive;
    if (s == "local") return WeakMethod::Local;
    if (s == "degree") return WeakMethod::Degree;
    throw std::invalid_argument("weak method: expected exhaustive|local|degree");
}

struct CleanupConfig {
    double delta = 1.0 / 3.0;
    WeakMethod weak_method = WeakMethod::Exhaustive;
    std::uint64_t partition_seed = 0;
    std::uint64_t estimator_seed = 0;  // local-search restarts only
    int local_restarts = 5;
    int local_max_iters = 1000;
    std::uint64_t exhaustive_budget = 10000000ULL;
};

struct PartitionResult {
    std::vector<std::vector<int>> blocks;  // disjoint, sorted, union = [n]
    bool rounded = false;  // 1/delta or n*delta was non-integral
};

// Uniformly random partition of [n] into round(1/delta) blocks whose sizes
// differ by at most one.
inline PartitionResult partition_indices(int n, double delta, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("partition_indices: delta must lie in (0,1)");
    const int blocks = static_cast<int>(std::llround(1.0 / delta));
    if (blocks < 2) throw std::domain_error("partition_indices: delta too large, need >= 2 blocks");
    if (blocks > n) throw std::domain_error("partition_indices: more blocks than indices");
    PartitionResult res;
    res.rounded = std::abs(1.0 / delta - blocks) > 1e-9 ||
                  std::abs(n * delta - std::llround(n * delta)) > 1e-9;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
        std::swap(idx[i], idx[j]);
    }
    const int base = n / blocks;
    const int rem = n % blocks;
    res.blocks.resize(blocks);
    int pos = 0;
    for (int b = 0; b < blocks; ++b) {
        const int sz = base + (b < rem ? 1 : 0);
        res.blocks[b].assign(idx.begin() + pos, idx.begin() + pos + sz);
        std::sort(res.blocks[b].begin(), res.blocks[b].end());
        pos += sz;
    }
    return res;
}

// Voting scores r_i = sum_{j in chat} L_ij for i in s_k.  The estimate and
// the withheld block must be disjoint; that is what makes the votes
// independent of the estimation step.
inline std::map<int, double> vote_scores(const LlrMatrix& lmat, const std::vector<int>& chat,
                                         const std::vector<int>& s_k) {
    std::vector<char> in_chat(lmat.n, 0);
    for (int j : chat) {
        if (j < 0 || j >= lmat.n) throw std::out_of_range("vote_scores: chat index");
        in_chat[j] = 1;
    }
    for (int i : s_k) {
        if (i < 0 || i >= lmat.n) throw std::out_of_range("vote_scores: block index");
        if (in_chat[i])
            throw std::invalid_argument("vote_scores: estimate overlaps the withheld block");
    }
    std::map<int, double> r;
    for (int i : s_k) {
        double s = 0.0;
        for (int j : chat) s += lmat.values(i, j);
        r[i] = s;
    }
    return r;
}

struct BlockReport {
    int block = 0;
    int withheld_size = 0;
    int weak_target = 0;             // community size handed to the weak estimator
    int sym_diff_vs_truth = -1;      // |chat_k triangle (C* \ S_k)|; -1 when truth unknown
};

struct CleanupResult {
    Estimate estimate;
    std::vector<BlockReport> blocks;
    bool partition_rounded = false;
    double voting_gamma = 0.0;      // (1/K) log(n/K), diagnostic only
    double voting_threshold = 0.0;  // K (1-delta) gamma, diagnostic only
};

namespace detail {

inline LlrMatrix restrict_llr(const LlrMatrix& full, const std::vector<int>& keep) {
    LlrMatrix sub;
    sub.n = static_cast<int>(keep.size());
    sub.diag_mode = full.diag_mode;
    sub.values = SymMatrix(sub.n);
    for (int a = 0; a < sub.n; ++a)
        for (int b = a; b < sub.n; ++b) sub.values.set(a, b, full.values(keep[a], keep[b]));
    return sub;
}

inline Estimate run_weak(const LlrMatrix& lmat, int K, const CleanupConfig& cfg, Rng& rng) {
    switch (cfg.weak_method) {
        case WeakMethod::Exhaustive: return mle_exhaustive(lmat, K, cfg.exhaustive_budget);
        case WeakMethod::Local:
            return local_search_restarts(lmat, K, cfg.local_restarts, cfg.local_max_iters, rng);
        default: return degree_threshold(lmat, K);
    }
}

}  // namespace detail

// The two-step procedure on a precomputed LLR matrix.  For each block S_k,
// the weak estimator sees only the reduced matrix on [n] \ S_k with target
// size ceil(K (1 - delta)); the withheld indices are then scored by voting
// into the block's estimate, and the K top-voted indices overall win.
inline CleanupResult clean_up(const Instance& inst, const LlrMatrix& lmat, int K,
                              const CleanupConfig& cfg) {
    const int n = inst.n;
    if (K < 1 || K >= n) throw std::invalid_argument("clean_up: need 1 <= K < n");
    PartitionResult part = partition_indices(n, cfg.delta, cfg.partition_seed);
    const int k_weak = static_cast<int>(std::ceil(K * (1.0 - cfg.delta) - 1e-9));
    CleanupResult res;
    res.partition_rounded = part.rounded;
    res.voting_gamma = std::log(static_cast<double>(n) / K) / K;
    res.voting_threshold = K * (1.0 - cfg.delta) * res.voting_gamma;

    std::vector<double> votes(n, 0.0);
    std::vector<char> in_truth(n, 0);
    for (int c : inst.community) in_truth[c] = 1;

    for (std::size_t k = 0; k < part.blocks.size(); ++k) {
        const std::vector<int>& s_k = part.blocks[k];
        std::vector<char> withheld(n, 0);
        for (int i : s_k) withheld[i] = 1;
        std::vector<int> reduced;
        reduced.reserve(n - s_k.size());
        for (int i = 0; i < n; ++i)
            if (!withheld[i]) reduced.push_back(i);
        if (static_cast<int>(reduced.size()) < k_weak)
            throw std::runtime_error("clean_up: block too small to host the reduced community");

        LlrMatrix sub = detail::restrict_llr(lmat, reduced);
        Rng est_rng(derive_seed(cfg.estimator_seed, static_cast<std::uint64_t>(k)));
        Estimate weak = detail::run_weak(sub, k_weak, cfg, est_rng);
        std::vector<int> chat(weak.community.size());
        for (std::size_t i = 0; i < chat.size(); ++i) chat[i] = reduced[weak.community[i]];

        for (const auto& [i, r] : vote_scores(lmat, chat, s_k)) votes[i] = r;

        BlockReport br;
        br.block = static_cast<int>(k);
        br.withheld_size = static_cast<int>(s_k.size());
        br.weak_target = k_weak;
        if (!inst.community.empty()) {
            std::vector<int> truth_k;
            for (int i : reduced)
                if (in_truth[i]) truth_k.push_back(i);
            br.sym_diff_vs_truth = sym_diff_size(chat, truth_k);
        }
        res.blocks.push_back(br);
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (votes[a] != votes[b]) return votes[a] > votes[b];
        return a < b;
    });
    res.estimate.community.assign(order.begin(), order.begin() + K);
    std::sort(res.estimate.community.begin(), res.estimate.community.end());
    res.estimate.score = e_stat(lmat, res.estimate.community, res.estimate.community);
    res.estimate.method = "cleanup";
    return res;
}

inline CleanupResult clean_up(const Instance& inst, int K, const DistPair& pair,
                              const CleanupConfig& cfg) {
    const LlrMatrix lmat = llr_matrix(inst, pair);
    return clean_up(inst, lmat, K, cfg);
}

}  // namespace hcm
