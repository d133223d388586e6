// Shared plumbing for the havoc libraries: error types, the seeded random
// stream used by every simulation, and the digest helper used for
// reproducibility checks.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace havoc {

// ---- Errors ----

// Base class for every error raised by the library. CLI layers catch this
// and turn it into a one-line diagnostic plus a nonzero exit code.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input document (topology, flow, config, log line).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

// Structurally valid input that violates a semantic rule. The message names
// the offending entity.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// Malformed wire header. The message names the offending clause.
class DecodeError : public Error {
public:
    explicit DecodeError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// ---- Seeded random stream ----

// Deterministic random stream. All draws are hand-rolled on top of a
// SplitMix64 core so that sequences are identical across platforms and
// standard library versions; std::uniform_*_distribution is deliberately
// avoided because its output is implementation defined.
class SeededStream {
public:
    explicit SeededStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi]. Modulo bias is irrelevant for the ranges
    // used here (jitter windows, index picks).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

private:
    std::uint64_t state_;
};

// Derives a per-index seed from a master seed. Used by scenario generation so
// that every scenario owns an independent, reproducible stream.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

// ---- Digests ----

// FNV-1a 64-bit. Stable content digest for logs and archives.
class Fnv1a64 {
public:
    void update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            hash_ ^= c;
            hash_ *= 0x100000001b3ULL;
        }
    }

    std::uint64_t value() const { return hash_; }
    std::string hex() const;

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string fnv1a_hex(std::string_view bytes);

// ---- Small string helpers ----

std::vector<std::string> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);

// Shortest round-trip decimal form of a double ("0.5", "1", "0.05").
std::string format_double(double v);

// Strict double parse of an entire token; throws DecodeError on trailing
// garbage or empty input.
double parse_double_strict(std::string_view token, const std::string& context);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace havoc
