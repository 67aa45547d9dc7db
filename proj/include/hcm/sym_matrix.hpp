// Dense symmetric matrix, packed lower triangle (diagonal included).
#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hcm {

class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n)
        : n_(n), v_(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2, 0.0) {
        if (n < 0) throw std::invalid_argument("SymMatrix: negative size");
    }

    int size() const { return n_; }

    double operator()(int i, int j) const { return v_[index(i, j)]; }

    void set(int i, int j, double x) { v_[index(i, j)] = x; }

    bool operator==(const SymMatrix& other) const { return n_ == other.n_ && v_ == other.v_; }

private:
    std::size_t index(int i, int j) const {
        if (i < 0 || j < 0 || i >= n_ || j >= n_) throw std::out_of_range("SymMatrix: index");
        if (i < j) std::swap(i, j);
        return static_cast<std::size_t>(i) * (static_cast<std::size_t>(i) + 1) / 2 +
               static_cast<std::size_t>(j);
    }

    int n_ = 0;
    std::vector<double> v_;
};

}  // namespace hcm
