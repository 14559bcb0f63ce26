// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace urllc {

struct Dims {
    int users = 0;        // K
    int subcarriers = 0;  // M
    int slots = 0;        // N

    int resource_elements() const { return subcarriers * slots; }
    std::size_t total() const {
        return static_cast<std::size_t>(users) * subcarriers * slots;
    }
    bool operator==(const Dims&) const = default;
};

/// Dense K x M x N array of doubles, user-major then subcarrier then slot.
class Grid3 {
public:
    Grid3() = default;
    explicit Grid3(Dims dims, double fill = 0.0) : dims_(dims), data_(dims.total(), fill) {}

    Dims dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int k, int m, int n) const {
        return (static_cast<std::size_t>(k) * dims_.subcarriers + m) * dims_.slots + n;
    }
    double& operator()(int k, int m, int n) { return data_[index(k, m, n)]; }
    double operator()(int k, int m, int n) const { return data_[index(k, m, n)]; }

    /// The M*N entries of user k, subcarrier-major.
    std::span<double> user(int k) {
        return {data_.data() + index(k, 0, 0), static_cast<std::size_t>(dims_.resource_elements())};
    }
    std::span<const double> user(int k) const {
        return {data_.data() + index(k, 0, 0), static_cast<std::size_t>(dims_.resource_elements())};
    }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool operator==(const Grid3&) const = default;

private:
    Dims dims_{};
    std::vector<double> data_;
};

}  // namespace urllc
