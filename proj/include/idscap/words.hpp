// Variable-length output strings and their canonical indexing.
//
// All serialized laws order outputs length-major, then lexicographically
// within a length, so every dump and report is byte-stable. The canonical
// index of a word w of length L over an alphabet of size q is
//   offset(L) + value(w),  offset(L) = 1 + q + ... + q^(L-1),
// with value(w) reading w as a base-q number, most significant symbol first.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idscap/errors.hpp"

namespace idscap {

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

inline std::uint64_t word_space_size(unsigned alphabet, unsigned max_len) {
    // 1 + q + ... + q^max_len, i.e. the number of words of length <= max_len.
    std::uint64_t total = 0, pw = 1;
    for (unsigned l = 0; l <= max_len; ++l) {
        total += pw;
        pw *= alphabet;
    }
    return total;
}

inline std::uint64_t word_index(const Word& w, unsigned alphabet) {
    std::uint64_t offset = 0, pw = 1;
    for (std::size_t l = 0; l < w.size(); ++l) {
        offset += pw;
        pw *= alphabet;
    }
    std::uint64_t value = 0;
    for (Symbol s : w) {
        if (s >= alphabet) throw ValidationError("word_index: symbol outside alphabet");
        value = value * alphabet + s;
    }
    return offset + value;
}

inline Word index_word(std::uint64_t index, unsigned alphabet) {
    unsigned len = 0;
    std::uint64_t offset = 0, pw = 1;
    while (offset + pw <= index) {
        offset += pw;
        pw *= alphabet;
        ++len;
    }
    std::uint64_t value = index - offset;
    Word w(len);
    for (unsigned i = len; i-- > 0;) {
        w[i] = static_cast<Symbol>(value % alphabet);
        value /= alphabet;
    }
    return w;
}

/// Fixed-length input block x in X^k, canonically indexed by its base-q value.
inline std::uint64_t block_index(const Word& x, unsigned alphabet) {
    std::uint64_t value = 0;
    for (Symbol s : x) {
        if (s >= alphabet) throw ValidationError("block_index: symbol outside alphabet");
        value = value * alphabet + s;
    }
    return value;
}

inline Word index_block(std::uint64_t index, unsigned alphabet, unsigned k) {
    Word x(k);
    for (unsigned i = k; i-- > 0;) {
        x[i] = static_cast<Symbol>(index % alphabet);
        index /= alphabet;
    }
    return x;
}

inline std::string word_to_string(const Word& w) {
    std::string s;
    s.reserve(w.size());
    for (Symbol v : w) s += static_cast<char>('0' + v);
    return s;
}

} // namespace idscap
