#pragma once

#include <algorithm>
#include <vector>

namespace treelab {

// Small-set algebra on sorted unique vectors. Everything in the lab is a
// finite set with a canonical order, so sorted vectors double as canonical
// serial forms.

template <typename T>
bool sv_contains(const std::vector<T>& v, const T& x) {
    return std::binary_search(v.begin(), v.end(), x);
}

template <typename T>
void sv_insert(std::vector<T>& v, const T& x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
}

template <typename T>
void sv_erase(std::vector<T>& v, const T& x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
}

template <typename T>
std::vector<T> sv_union(const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<T> r;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

template <typename T>
std::vector<T> sv_intersect(const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<T> r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

template <typename T>
std::vector<T> sv_difference(const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<T> r;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

template <typename T>
bool sv_subset(const std::vector<T>& a, const std::vector<T>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

template <typename T>
bool sv_disjoint(const std::vector<T>& a, const std::vector<T>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else return false;
    }
    return true;
}

template <typename T>
std::vector<T> sv_sorted(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

} // namespace treelab
