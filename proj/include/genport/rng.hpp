#pragma once

#include <cstdint>

#include "genport/special.hpp"

namespace genport {

// Counter-based random streams. A stream is a key plus a counter; the i-th
// output is mix64(key + i*GOLDEN), i.e. SplitMix64 over an arbitrary key.
// Streams derived from (master, id...) are independent of scheduling order,
// which is what makes parallel backtest paths reproducible.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Purpose tags keep substreams for different uses of the same (path, step)
// from colliding.
enum class RngPurpose : std::uint64_t {
    Scenario = 1,
    Optimizer = 2,
    Synthetic = 3,
    Folds = 4,
    Test = 99,
};

namespace detail {
inline std::uint64_t chain(std::uint64_t key, std::uint64_t id) {
    return mix64(key ^ mix64(id + kGolden));
}
}  // namespace detail

template <typename... Ids>
std::uint64_t substream(std::uint64_t master, Ids... ids) {
    std::uint64_t k = mix64(master + kGolden);
    ((k = detail::chain(k, static_cast<std::uint64_t>(ids))), ...);
    return k;
}

class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return mix64(key_ + (++n_) * kGolden); }

    // uniform on the open interval (0,1); never returns an endpoint
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() { return normal_ppf(uniform()); }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t key_;
    std::uint64_t n_ = 0;
};

}  // namespace genport
