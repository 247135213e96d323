#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <system_error>

#include "crisp/errors.hpp"

namespace crisp {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wraps an angle into [0, 2*pi).
inline double wrap_two_pi(double a) {
    double w = a - kTwoPi * std::floor(a / kTwoPi);
    if (w >= kTwoPi) w -= kTwoPi;
    if (w < 0.0) w = 0.0;
    return w;
}

// Signed wrapped difference in [-pi, pi]: the geodesic representative of a mod 2*pi.
inline double wrap_signed(double a) {
    return std::remainder(a, kTwoPi);
}

// Locale-free shortest round-trip formatting.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Locale-free formatting with 17 significant digits (round-trip exact, reprint stable).
inline std::string format_double_17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw DataError("not a number: '" + std::string(text) + "' (" + context + ")");
    }
    return v;
}

// FNV-1a 64-bit, used for dataset/model provenance hashes and file checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t seed = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(std::string_view s) {
    return fnv1a(s.data(), s.size());
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// splitmix64: cheap stateless mixer used to derive per-sample RNG streams, so that
// sample i's draws do not depend on how samples are batched across threads.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic counter-based stream: value t of stream (seed, stream_id).
// Bit-reproducible across platforms, unlike std::uniform_real_distribution.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream_id)
        : state_(splitmix64(seed ^ splitmix64(stream_id + 0x632be59bd9b4e019ull))) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_in(double lo, double hi) {
        return lo + next_unit() * (hi - lo);
    }

private:
    std::uint64_t state_;
};

} // namespace crisp
