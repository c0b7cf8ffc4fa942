#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfs {

inline constexpr const char* kVersion = "0.1.0";

// ============================================================================
// Errors
// ============================================================================

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/binding shape disagreement.
struct ShapeError : Error {
    using Error::Error;
};

// A documented precondition was violated by the caller.
struct ContractError : Error {
    using Error::Error;
};

// A configuration value is out of its legal range.
struct ArgumentError : Error {
    using Error::Error;
};

// NaN/Inf encountered where finite values are required.
struct NumericError : Error {
    using Error::Error;
};

// Malformed input file; carries a 1-based line number when known.
struct ParseError : Error {
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_number(line) {}
    explicit ParseError(const std::string& what) : Error(what), line_number(0) {}
    std::size_t line_number;
};

struct IoError : Error {
    using Error::Error;
};

// ============================================================================
// Seeding and deterministic random draws
// ============================================================================

// SplitMix64 finalizer. Used both as a bit mixer for seed derivation and to
// expand one user seed into well-separated stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

// Deterministic draws on top of std::mt19937_64. The std::* distributions are
// implementation-defined, so the mappings are done by hand here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Box-Muller; consumes exactly two uniforms per pair of normals.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace sfs
