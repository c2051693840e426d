#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace treelab {

// Deterministic splitmix64 generator. Standard-library distributions are
// implementation-defined, so seeded runs would not replay across toolchains;
// everything here is fixed arithmetic.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). pre: n > 0.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: empty range");
        // Rejection sampling on the top bits keeps the draw unbiased while
        // staying reproducible.
        std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        for (;;) {
            std::uint64_t v = next();
            if (v < bound) return v % n;
        }
    }

    // Uniform integer in [lo, hi]. pre: lo <= hi.
    int range(int lo, int hi) {
        if (lo > hi) throw std::invalid_argument("Rng::range: lo > hi");
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // True with probability roughly p (53-bit resolution).
    bool chance(double p) {
        double u = static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
        return u < p;
    }

    template <typename T>
    const T& pick(const std::vector<T>& xs) {
        if (xs.empty()) throw std::invalid_argument("Rng::pick: empty vector");
        return xs[static_cast<std::size_t>(below(xs.size()))];
    }

    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(xs[i - 1], xs[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace treelab
