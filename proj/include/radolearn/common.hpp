#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rado {

// Deterministic RNG wrapper. mt19937_64 has a pinned output sequence, and the
// bounded/shuffle primitives are hand-rolled so results do not depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform integer in [0, n) by rejection sampling.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::bounded: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return v % n;
    }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[bounded(i)]);
        }
    }

    // First k entries of a random permutation of [0, n): sample without replacement.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(idx[i], idx[i + bounded(n - i)]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 eng_;
};

// splitmix64 finalizer; used to derive independent child seeds so results do
// not depend on task scheduling order.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = mix_seed(base ^ 0x243f6a8885a308d3ULL);
    s = mix_seed(s ^ a);
    s = mix_seed(s ^ b);
    s = mix_seed(s ^ c);
    return s;
}

// Sum after sorting the addends: the result depends only on the multiset of
// values, never on the order they were collected in.
inline double sorted_sum(std::vector<double> addends) {
    std::sort(addends.begin(), addends.end());
    double s = 0.0;
    for (double v : addends) s += v;
    return s;
}

// Stratified k-fold assignment: indices of each class are shuffled with the
// seed and dealt round-robin, so every fold gets a proportional class mix.
std::vector<int> stratified_folds(std::span<const double> labels, int k, std::uint64_t seed);

// Plain (unstratified) k-fold assignment over n items.
std::vector<int> plain_folds(std::size_t n, int k, std::uint64_t seed);

void warn(const std::string& message);

}  // namespace rado
