// Bitmask subsets of qubit positions. Bit q addresses qubit q+1 in
// one-based user-facing notation.
#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace randcorr {

struct SubsetMask {
    std::uint32_t bits = 0;

    constexpr SubsetMask() = default;
    constexpr explicit SubsetMask(std::uint32_t b) : bits(b) {}

    constexpr bool empty() const { return bits == 0; }
    constexpr int size() const { return std::popcount(bits); }
    constexpr bool contains(int qubit) const { return (bits >> qubit) & 1u; }
    constexpr bool subset_of(SubsetMask other) const { return (bits & ~other.bits) == 0; }

    constexpr friend bool operator==(SubsetMask a, SubsetMask b) { return a.bits == b.bits; }
    constexpr friend bool operator<(SubsetMask a, SubsetMask b) { return a.bits < b.bits; }

    static constexpr SubsetMask full(int n) { return SubsetMask((1u << n) - 1u); }

    std::vector<int> qubits() const {
        std::vector<int> out;
        for (int q = 0; q < 32; ++q)
            if (contains(q)) out.push_back(q);
        return out;
    }

    // One-based comma-free label, e.g. {1,2,4} -> "124".
    std::string label() const {
        std::string s;
        for (int q : qubits()) s += std::to_string(q + 1);
        return s.empty() ? "-" : s;
    }

    static SubsetMask from_label(const std::string& s, int n) {
        SubsetMask m;
        for (char c : s) {
            if (c < '1' || c > '0' + n)
                throw std::invalid_argument("bad qubit in subset label: " + s);
            m.bits |= 1u << (c - '1');
        }
        return m;
    }
};

inline void require_nonempty(SubsetMask m, const char* what) {
    if (m.empty()) throw std::invalid_argument(std::string(what) + ": empty subset");
}

inline void require_within(SubsetMask m, int n, const char* what) {
    if (m.bits >= (1u << n))
        throw std::invalid_argument(std::string(what) + ": subset exceeds qubit count");
}

}  // namespace randcorr
