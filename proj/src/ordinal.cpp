#include "treelab/ordinal.hpp"

#include <cstdint>
#include <limits>

namespace treelab {

Ordinal Ordinal::nat(std::uint64_t n) {
    Ordinal r;
    if (n > 0) r.terms_.push_back({Ordinal(), n});
    return r;
}

Ordinal Ordinal::omega() { return omega_pow(nat(1)); }

Ordinal Ordinal::omega_pow(const Ordinal& e, std::uint64_t c) {
    Ordinal r;
    if (c > 0) r.terms_.push_back({e, c});
    return r;
}

bool Ordinal::is_finite() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_zero());
}

std::uint64_t Ordinal::nat_value() const {
    if (terms_.empty()) return 0;
    if (!is_finite()) throw PreconditionError("nat_value: ordinal is infinite");
    return terms_[0].second;
}

int Ordinal::cmp(const Ordinal& a, const Ordinal& b) {
    const auto& x = a.terms_;
    const auto& y = b.terms_;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        int ec = cmp(x[i].first, y[i].first);
        if (ec != 0) return ec;
        if (x[i].second != y[i].second) return x[i].second < y[i].second ? -1 : 1;
    }
    if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
    return 0;
}

Ordinal Ordinal::from_terms(std::vector<Term> t) {
    Ordinal r;
    r.terms_ = std::move(t);
    return r;
}

Ordinal operator+(const Ordinal& a, const Ordinal& b) {
    if (b.is_zero()) return a;
    std::vector<Ordinal::Term> terms;
    const Ordinal& lead = b.terms()[0].first;
    for (const auto& t : a.terms()) {
        if (Ordinal::cmp(t.first, lead) > 0) terms.push_back(t);
    }
    // Merge a's term at the leading exponent of b, if present.
    std::uint64_t carry = 0;
    for (const auto& t : a.terms()) {
        if (Ordinal::cmp(t.first, lead) == 0) carry = t.second;
    }
    std::uint64_t c0 = b.terms()[0].second;
    if (carry > std::numeric_limits<std::uint64_t>::max() - c0)
        throw OverflowError("ordinal addition: coefficient overflow");
    terms.push_back({lead, carry + c0});
    for (std::size_t i = 1; i < b.terms().size(); ++i) terms.push_back(b.terms()[i]);
    return Ordinal::from_terms(std::move(terms));
}

Ordinal succ(const Ordinal& a) { return a + Ordinal::nat(1); }

Ordinal omega_times(const Ordinal& a) {
    Ordinal one = Ordinal::nat(1);
    std::vector<Ordinal::Term> terms;
    for (const auto& t : a.terms()) terms.push_back({one + t.first, t.second});
    return Ordinal::from_terms(std::move(terms));
}

const Ordinal& default_ceiling() {
    static const Ordinal c = Ordinal::omega_pow(succ(Ordinal::omega()));
    return c;
}

void require_below_ceiling(const Ordinal& x, const Ordinal& ceiling, const char* what) {
    if (x >= ceiling) throw OverflowError(std::string(what) + ": value " + x.str() +
                                          " reaches the ceiling " + ceiling.str());
}

Ordinal height_of(const Ordinal& x) {
    std::vector<Ordinal::Term> terms;
    for (const auto& t : x.terms()) {
        if (t.first.is_zero()) continue; // finite tail contributes nothing
        if (t.first.is_finite()) {
            terms.push_back({Ordinal::nat(t.first.nat_value() - 1), t.second});
        } else {
            terms.push_back(t); // 1 + e == e for infinite e
        }
    }
    return Ordinal::from_terms(std::move(terms));
}

bool is_split_level(const Ordinal& d) {
    for (const auto& t : d.terms()) {
        if (t.first.is_finite()) return false;
    }
    return true;
}

Ordinal next_split_level(const Ordinal& x, const Ordinal& ceiling) {
    std::vector<Ordinal::Term> prefix;
    for (const auto& t : x.terms()) {
        if (t.first.is_finite()) break; // CNF exponents descend: finite ones trail
        prefix.push_back(t);
    }
    Ordinal r = Ordinal::from_terms(std::move(prefix)) + Ordinal::omega_pow(Ordinal::omega());
    require_below_ceiling(r, ceiling, "next_split_level");
    return r;
}

// ---- rendering ----

namespace {

void render(const Ordinal& a, std::string& out) {
    if (a.is_zero()) {
        out += '0';
        return;
    }
    bool first = true;
    for (const auto& [e, c] : a.terms()) {
        if (!first) out += '+';
        first = false;
        if (e.is_zero()) {
            out += std::to_string(c);
        } else if (e.is_finite() && e.nat_value() == 1) {
            out += "w*";
            out += std::to_string(c);
        } else if (e.is_finite()) {
            out += "w^";
            out += std::to_string(e.nat_value());
            out += '*';
            out += std::to_string(c);
        } else {
            out += "w^(";
            render(e, out);
            out += ")*";
            out += std::to_string(c);
        }
    }
}

struct Parser {
    const std::string& s;
    std::size_t i = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("ordinal parse: " + why + " at offset " + std::to_string(i) +
                         " in \"" + s + "\"");
    }
    bool done() const { return i >= s.size(); }
    char peek() const { return done() ? '\0' : s[i]; }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++i;
    }

    std::uint64_t parse_nat() {
        if (done() || s[i] < '0' || s[i] > '9') fail("expected a number");
        std::size_t start = i;
        std::uint64_t v = 0;
        while (!done() && s[i] >= '0' && s[i] <= '9') {
            std::uint64_t d = static_cast<std::uint64_t>(s[i] - '0');
            if (v > (std::numeric_limits<std::uint64_t>::max() - d) / 10)
                fail("number too large");
            v = v * 10 + d;
            ++i;
        }
        if (s[start] == '0' && i - start > 1) fail("leading zero");
        return v;
    }

    Ordinal::Term parse_term() {
        if (peek() != 'w') {
            std::uint64_t c = parse_nat();
            if (c == 0) fail("zero term");
            return {Ordinal(), c};
        }
        ++i; // 'w'
        if (peek() == '*') {
            ++i;
            std::uint64_t c = parse_nat();
            if (c == 0) fail("zero coefficient");
            return {Ordinal::nat(1), c};
        }
        expect('^');
        Ordinal e;
        if (peek() == '(') {
            ++i;
            e = parse_sum();
            expect(')');
            if (e.is_finite()) fail("parenthesized exponent must be infinite");
        } else {
            std::uint64_t k = parse_nat();
            if (k < 2) fail("finite exponent below 2 spelled with '^'");
            e = Ordinal::nat(k);
        }
        expect('*');
        std::uint64_t c = parse_nat();
        if (c == 0) fail("zero coefficient");
        return {e, c};
    }

    Ordinal parse_sum() {
        std::vector<Ordinal::Term> terms;
        terms.push_back(parse_term());
        while (peek() == '+') {
            ++i;
            terms.push_back(parse_term());
        }
        for (std::size_t k = 1; k < terms.size(); ++k) {
            if (Ordinal::cmp(terms[k - 1].first, terms[k].first) <= 0)
                fail("exponents not strictly descending");
        }
        return Ordinal::from_terms(std::move(terms));
    }
};

} // namespace

std::string Ordinal::str() const {
    std::string out;
    render(*this, out);
    return out;
}

Ordinal Ordinal::parse(const std::string& text) {
    if (text.empty()) throw ParseError("ordinal parse: empty string");
    if (text == "0") return Ordinal();
    Parser p{text};
    Ordinal r = p.parse_sum();
    if (!p.done()) p.fail("trailing input");
    return r;
}

} // namespace treelab
