#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "treelab/errors.hpp"

namespace treelab {

// Ordinal in Cantor normal form: w^e1*c1 + ... + w^ek*ck with e1 > ... > ek
// and every ci >= 1. Exponents are ordinals themselves, so values well beyond
// the default working ceiling w^(w+1) are representable; the ceiling is a
// config knob enforced where new ordinals are produced.
class Ordinal {
public:
    using Term = std::pair<Ordinal, std::uint64_t>; // (exponent, coefficient)

    Ordinal() = default; // zero

    static Ordinal nat(std::uint64_t n);
    static Ordinal omega();
    // w^e * c; c = 0 gives zero.
    static Ordinal omega_pow(const Ordinal& e, std::uint64_t c = 1);

    bool is_zero() const { return terms_.empty(); }
    bool is_finite() const;
    // pre: is_finite()
    std::uint64_t nat_value() const;

    const std::vector<Term>& terms() const { return terms_; }

    // Assembles an ordinal from terms that are already in normal form
    // (exponents strictly descending, coefficients >= 1). Arithmetic and the
    // parser are the only intended callers.
    static Ordinal from_terms(std::vector<Term> t);

    // Canonical rendering, e.g. "0", "5", "w*5+2", "w^2*1", "w^(w*1)*3+w*1+7".
    std::string str() const;
    // Strict inverse of str(): rejects non-canonical spellings.
    static Ordinal parse(const std::string& text);

    friend bool operator==(const Ordinal& a, const Ordinal& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const Ordinal& a, const Ordinal& b) { return !(a == b); }
    friend bool operator<(const Ordinal& a, const Ordinal& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Ordinal& a, const Ordinal& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Ordinal& a, const Ordinal& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Ordinal& a, const Ordinal& b) { return cmp(a, b) >= 0; }

    static int cmp(const Ordinal& a, const Ordinal& b);

private:
    std::vector<Term> terms_;
};

// Ordinal addition (left-absorbing, as usual).
Ordinal operator+(const Ordinal& a, const Ordinal& b);
Ordinal succ(const Ordinal& a);
// Left multiplication by omega: w * a. Sends w^e*c to w^(1+e)*c termwise and
// drops nothing; h and the split levels below are phrased through it.
Ordinal omega_times(const Ordinal& a);

// Default working ceiling w^(w+1): large enough for every height, split level
// and separator value the lab manipulates, small enough to render compactly.
const Ordinal& default_ceiling();

// Throws OverflowError when x >= ceiling.
void require_below_ceiling(const Ordinal& x, const Ordinal& ceiling,
                           const char* what);

// The unique g with w*g <= x < w*(g+1). Total on CNF ordinals.
Ordinal height_of(const Ordinal& x);

// Split levels: the club of d closed under g -> w*(g+1). Analytic test:
// d == 0 or w*d == d (equivalently, every CNF exponent of d is infinite).
// Below the default ceiling these are exactly 0 and w^w*k.
bool is_split_level(const Ordinal& d);

// Least split level strictly above x. Throws OverflowError at the ceiling.
Ordinal next_split_level(const Ordinal& x, const Ordinal& ceiling = default_ceiling());

} // namespace treelab
