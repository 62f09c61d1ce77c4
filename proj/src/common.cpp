#include "radolearn/common.hpp"

#include <iostream>
#include <mutex>

namespace rado {

std::vector<int> stratified_folds(std::span<const double> labels, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_folds: need k >= 2");
    Rng rng(seed);
    std::vector<int> fold(labels.size(), -1);
    for (double cls : {+1.0, -1.0}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) idx.push_back(i);
        }
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }
    for (int f : fold) {
        if (f < 0) throw std::logic_error("stratified_folds: label outside {-1,+1}");
    }
    return fold;
}

std::vector<int> plain_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("plain_folds: need k >= 1");
    Rng rng(seed);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i) {
        fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fold;
}

void warn(const std::string& message) {
    static std::mutex mu;
    std::scoped_lock lock(mu);
    std::cerr << "warning: " << message << "\n";
}

}  // namespace rado
