// Instance generation for the hidden community model and the derived
// matrix of pairwise log-likelihood ratios.
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcm/dist_pair.hpp"
#include "hcm/rng.hpp"
#include "hcm/sym_matrix.hpp"

namespace hcm {

enum class DiagMode { ZeroDiagonal, InformativeDiagonal };

inline const char* to_string(DiagMode m) {
    return m == DiagMode::ZeroDiagonal ? "zero" : "informative";
}

inline DiagMode diag_mode_from_string(const std::string& s) {
    if (s == "zero") return DiagMode::ZeroDiagonal;
    if (s == "informative") return DiagMode::InformativeDiagonal;
    throw std::invalid_argument("diag_mode: expected 'zero' or 'informative'");
}

struct Instance {
    int n = 0;
    int K = 0;
    DiagMode diag_mode = DiagMode::ZeroDiagonal;
    std::uint64_t seed = 0;       // provenance tag, echoed into file headers
    std::vector<int> community;   // ground truth, sorted, 0-based
    SymMatrix values;             // observations A
};

struct LlrMatrix {
    int n = 0;
    DiagMode diag_mode = DiagMode::ZeroDiagonal;
    SymMatrix values;  // L_ij; zero diagonal unless informative
};

// Uniformly random size-K subset of {0,...,n-1}, sorted.
inline std::vector<int> sample_subset(int n, int K, Rng& rng) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < K; ++i) {
        const int j = i + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(K);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Community uniform over size-K subsets; for i < j, A_ij ~ P iff both
// endpoints are in the community, else ~ Q.  The diagonal is zero, or in
// informative mode A_ii ~ P iff i is a member.
inline Instance sample_instance(int n, int K, const DistPair& pair, Rng& rng,
                                DiagMode diag_mode = DiagMode::ZeroDiagonal,
                                std::uint64_t seed_tag = 0) {
    if (K < 2 || K >= n) throw std::domain_error("sample_instance: need 2 <= K < n");
    Instance inst;
    inst.n = n;
    inst.K = K;
    inst.diag_mode = diag_mode;
    inst.seed = seed_tag;
    inst.community = sample_subset(n, K, rng);
    inst.values = SymMatrix(n);
    std::vector<char> in(n, 0);
    for (int c : inst.community) in[c] = 1;
    for (int i = 0; i < n; ++i) {
        if (diag_mode == DiagMode::InformativeDiagonal) {
            inst.values.set(i, i,
                            pair.sample(in[i] ? Measure::UnderP : Measure::UnderQ, rng));
        }
        for (int j = i + 1; j < n; ++j) {
            const Measure m = (in[i] && in[j]) ? Measure::UnderP : Measure::UnderQ;
            inst.values.set(i, j, pair.sample(m, rng));
        }
    }
    return inst;
}

// L_ij = llr(A_ij) for i != j; observations outside the pair's support
// raise a domain error.
inline LlrMatrix llr_matrix(const Instance& inst, const DistPair& pair) {
    LlrMatrix m;
    m.n = inst.n;
    m.diag_mode = inst.diag_mode;
    m.values = SymMatrix(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        if (inst.diag_mode == DiagMode::InformativeDiagonal)
            m.values.set(i, i, pair.llr(inst.values(i, i)));
        for (int j = i + 1; j < inst.n; ++j) m.values.set(i, j, pair.llr(inst.values(i, j)));
    }
    return m;
}

// |A triangle B| for sorted index sets.
inline int sym_diff_size(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t ia = 0, ib = 0;
    int diff = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] == b[ib]) {
            ++ia;
            ++ib;
        } else if (a[ia] < b[ib]) {
            ++diff;
            ++ia;
        } else {
            ++diff;
            ++ib;
        }
    }
    diff += static_cast<int>((a.size() - ia) + (b.size() - ib));
    return diff;
}

}  // namespace hcm
