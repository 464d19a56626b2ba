// Core value types and error hierarchy shared across the library.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace facedyn {

// A scalar time series sampled at a fixed rate. Missing samples are quiet
// NaN; every transform in the library preserves that convention.
using Series = std::vector<double>;

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

inline std::size_t count_valid(const Series& s) {
    std::size_t n = 0;
    for (double v : s)
        if (!is_missing(v)) ++n;
    return n;
}

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedRecord : Error { using Error::Error; };
struct DuplicateFrame : Error { using Error::Error; };
struct NonMonotonicIndex : Error { using Error::Error; };
struct NoValidSamples : Error { using Error::Error; };
struct DegenerateConfiguration : Error { using Error::Error; };
struct SeriesTooShort : Error { using Error::Error; };
struct EmptyTrajectory : Error { using Error::Error; };
struct MalformedRow : Error { using Error::Error; };
struct UnknownSubtask : Error { using Error::Error; };
struct AllFeaturesDropped : Error { using Error::Error; };
struct SingleClassTraining : Error { using Error::Error; };
struct ClassMissingInSplit : Error { using Error::Error; };
struct SingleParticipant : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };

// FNV-1a, used for config/input hashing in the stage cache. Stable across
// platforms, unlike std::hash.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s,
                           std::uint64_t seed = 0xcbf29ce484222325ull) {
    return fnv1a(s.data(), s.size(), seed);
}

}  // namespace facedyn
