#pragma once

#include <string>

#include "treelab/ordinal.hpp"

namespace treelab {

// A point of the index universe: every countable ordinal (kept exact), below
// finitely many numbered stations. Stations stand in for the uncountable
// indices; their attributes live in the universe description, not here.
class UOrd {
public:
    UOrd() = default; // countable 0

    static UOrd countable(Ordinal a) {
        UOrd u;
        u.ord_ = std::move(a);
        return u;
    }
    static UOrd station(int index) {
        if (index < 0) throw PreconditionError("UOrd::station: negative index");
        UOrd u;
        u.station_ = true;
        u.index_ = index;
        return u;
    }

    bool is_station() const { return station_; }
    bool is_countable() const { return !station_; }
    const Ordinal& ordinal() const {
        if (station_) throw PreconditionError("UOrd::ordinal: station point");
        return ord_;
    }
    int station_index() const {
        if (!station_) throw PreconditionError("UOrd::station_index: countable point");
        return index_;
    }

    // All countables (by ordinal value) precede all stations (by index).
    static int cmp(const UOrd& a, const UOrd& b) {
        if (a.station_ != b.station_) return a.station_ ? 1 : -1;
        if (a.station_) return a.index_ == b.index_ ? 0 : (a.index_ < b.index_ ? -1 : 1);
        return Ordinal::cmp(a.ord_, b.ord_);
    }

    friend bool operator==(const UOrd& a, const UOrd& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const UOrd& a, const UOrd& b) { return cmp(a, b) != 0; }
    friend bool operator<(const UOrd& a, const UOrd& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const UOrd& a, const UOrd& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const UOrd& a, const UOrd& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const UOrd& a, const UOrd& b) { return cmp(a, b) >= 0; }

    // Countables render as their ordinal text, stations as "s<index>".
    std::string str() const {
        if (station_) return "s" + std::to_string(index_);
        return ord_.str();
    }
    static UOrd parse(const std::string& text) {
        if (!text.empty() && text[0] == 's') {
            std::string digits = text.substr(1);
            bool ok = !digits.empty() && !(digits.size() > 1 && digits[0] == '0');
            for (char c : digits) ok = ok && c >= '0' && c <= '9';
            if (!ok || digits.size() > 8)
                throw ParseError("universe point parse: bad station \"" + text + "\"");
            return station(std::stoi(digits));
        }
        return countable(Ordinal::parse(text));
    }

private:
    bool station_ = false;
    Ordinal ord_;
    int index_ = 0;
};

} // namespace treelab
