#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random number generation. Every random object in the library
// is a pure function of a 64-bit seed; parallel consumers derive disjoint
// streams by mixing purpose tags and site coordinates into the seed, so no
// two logical streams ever share state.
namespace glab {

/// SplitMix64 finalizer. Good avalanche behaviour, two multiplies.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derive an independent child seed from (seed, tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return mix64(seed + 0x9E3779B97F4A7C15ull * (tag + 1));
}

/// Fold one more 64-bit key component into a stream seed.
inline std::uint64_t fold_seed(std::uint64_t h, std::uint64_t v) noexcept {
    return mix64(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
}

// Purpose tags; keep distinct so field draws and disorder draws never collide.
inline constexpr std::uint64_t kTagGff      = 0x47464601ull;
inline constexpr std::uint64_t kTagDisorder = 0x44495301ull;
inline constexpr std::uint64_t kTagWalk     = 0x57414C4Bull;
inline constexpr std::uint64_t kTagReplica  = 0x5245504Cull;

/// Minimal splittable generator (SplitMix64 sequence).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        return mix64(z);
    }

    /// Uniform on the open interval (0,1).
    double uniform01() noexcept {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on (-1,1).
    double uniform_sym() noexcept { return 2.0 * uniform01() - 1.0; }

    bool coin() noexcept { return (next() >> 63) != 0; }

    /// Standard normal via Box-Muller; spare value cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.28318530717958647692 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace glab
