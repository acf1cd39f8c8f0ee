#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaynet {

// Node indexing convention: 0 is the source, 1..n are relays, n+1 is the
// destination. Only nodes 0..n transmit; nodes 1..n+1 receive.
enum class VarKind : uint8_t { Input, Output, Compression };

struct Var {
    VarKind kind;
    int node;

    friend bool operator==(const Var& a, const Var& b) {
        return a.kind == b.kind && a.node == b.node;
    }
    friend bool operator<(const Var& a, const Var& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.node < b.node;
    }
};

std::string to_string(const Var& v);

// A set of registered variables, as a bitmask over registry positions.
// The registry never holds more than 3n+2 variables, so 64 bits suffice
// for every network within the enumeration bounds.
using VarSet = uint64_t;

inline constexpr VarSet kEmptySet = 0;

inline bool set_contains(VarSet s, int pos) { return (s >> pos) & 1u; }
inline VarSet set_with(VarSet s, int pos) { return s | (VarSet{1} << pos); }
inline int set_size(VarSet s) { return __builtin_popcountll(s); }

// Thrown when a computation would exceed a configured resource cap
// (state-space size, subset pool size, schedule block count).
class CapExceeded : public std::runtime_error {
public:
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when the union of qualifying subsets fails re-verification,
// which signals numerical degeneracy of the instance.
class UniquenessViolation : public std::runtime_error {
public:
    explicit UniquenessViolation(const std::string& what) : std::runtime_error(what) {}
};

// Exact rational with automatic reduction; used for schedule fractions.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d) : num(n), den(d) { reduce(); }

    void reduce() {
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
};

// All subsets of {0,..,poolSize-1} ordered by increasing cardinality and
// lexicographically within each cardinality. This is the canonical
// enumeration order for every subset search in the library; reported
// binding/maximizing subsets are the first ones reached in this order.
std::vector<uint32_t> subsets_by_cardinality(int poolSize);

// Positions of set bits, ascending.
std::vector<int> mask_to_positions(uint32_t mask);

}  // namespace relaynet
