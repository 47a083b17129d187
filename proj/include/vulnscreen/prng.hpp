#ifndef VULNSCREEN_PRNG_HPP
#define VULNSCREEN_PRNG_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace vulnscreen {

// SplitMix64 (Steele, Lea & Flood), the project's single random source.
// Every consumer below is specified in docs/formats.md so seeded splits,
// forests and synthetic datasets reproduce bit-for-bit in any language.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Plain modulo; the bias is immaterial for n << 2^64.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // Uniform in [0, 1) built from the top 53 bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Stream seed for sub-task `salt` of `base` (a class of a split, a grid cell,
// a tree of a forest). Equal to output number salt+1 of SplitMix64(base).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    SplitMix64 g(base + salt * 0x9e3779b97f4a7c15ULL);
    return g.next_u64();
}

// In-place Fisher-Yates: for i = n-1 .. 1, swap a[i] with a[rng.next_below(i+1)].
template <typename T>
void fisher_yates_shuffle(std::vector<T>& a, SplitMix64& rng) {
    for (std::size_t i = a.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(a[i - 1], a[j]);
    }
}

}  // namespace vulnscreen

#endif  // VULNSCREEN_PRNG_HPP
