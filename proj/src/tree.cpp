#include "treelab/tree.hpp"

#include <functional>

namespace treelab {

namespace {

int node_index(const NodeSet& nodes, const Ordinal& x) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
    if (it == nodes.end() || *it != x) return -1;
    return static_cast<int>(it - nodes.begin());
}

void push_violation(std::vector<std::string>& out, const std::string& v) {
    constexpr std::size_t cap = 32;
    if (out.size() < cap) out.push_back(v);
}

} // namespace

bool FiniteTree::less(const Ordinal& x, const Ordinal& y) const {
    int iy = node_index(nodes_, y);
    if (iy < 0) return false;
    return sv_contains(below_[static_cast<std::size_t>(iy)], x);
}

void FiniteTree::add_node(const Ordinal& x) {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
    if (it != nodes_.end() && *it == x) return;
    auto pos = static_cast<std::size_t>(it - nodes_.begin());
    nodes_.insert(it, x);
    below_.insert(below_.begin() + static_cast<std::ptrdiff_t>(pos), NodeSet{});
}

void FiniteTree::add_pair(const Ordinal& x, const Ordinal& y) {
    if (x == y) throw PreconditionError("add_pair: reflexive pair " + x.str());
    int ix = node_index(nodes_, x);
    int iy = node_index(nodes_, y);
    if (ix < 0 || iy < 0)
        throw PreconditionError("add_pair: endpoint not a node: " + x.str() + " < " + y.str());
    sv_insert(below_[static_cast<std::size_t>(iy)], x);
}

const NodeSet& FiniteTree::strictly_below(const Ordinal& x) const {
    int ix = node_index(nodes_, x);
    if (ix < 0) throw PreconditionError("strictly_below: " + x.str() + " is not a node");
    return below_[static_cast<std::size_t>(ix)];
}

std::vector<std::pair<Ordinal, Ordinal>> FiniteTree::pairs() const {
    std::vector<std::pair<Ordinal, Ordinal>> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (const auto& x : below_[i]) out.push_back({x, nodes_[i]});
    }
    std::sort(out.begin(), out.end());
    return out;
}

FiniteTree FiniteTree::from_pairs(const NodeSet& nodes,
                                  const std::vector<std::pair<Ordinal, Ordinal>>& pairs) {
    FiniteTree t;
    for (const auto& n : nodes) t.add_node(n);
    for (const auto& [x, y] : pairs) t.add_pair(x, y);
    return t;
}

TreeReport validate_tree(const FiniteTree& t) {
    TreeReport rep;
    const NodeSet& ns = t.nodes();
    const int n = t.size();

    std::vector<Ordinal> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) h[static_cast<std::size_t>(i)] = height_of(ns[static_cast<std::size_t>(i)]);

    bool standard = true;
    const Ordinal omega = Ordinal::omega();
    for (int i = 0; i < n; ++i) {
        const Ordinal& x = ns[static_cast<std::size_t>(i)];
        if (!x.is_zero() && x < omega) {
            standard = false;
            push_violation(rep.violations, "node " + x.str() + " outside {0} u [w, ...)");
        }
    }
    for (int i = 0; i < n; ++i) {
        const Ordinal& y = ns[static_cast<std::size_t>(i)];
        const NodeSet& by = t.strictly_below(y);
        for (const auto& x : by) {
            if (!t.contains(x)) {
                standard = false;
                push_violation(rep.violations, "order mentions non-node " + x.str());
                continue;
            }
            if (t.less(y, x)) {
                standard = false;
                push_violation(rep.violations, "antisymmetry fails on " + x.str() + ", " + y.str());
            }
            for (const auto& w : t.strictly_below(x)) {
                if (!sv_contains(by, w)) {
                    standard = false;
                    push_violation(rep.violations, "transitivity fails: " + w.str() + " < " +
                                                       x.str() + " < " + y.str());
                }
            }
            if (!(height_of(x) < height_of(y))) {
                standard = false;
                push_violation(rep.violations,
                               "height not monotone on " + x.str() + " < " + y.str());
            }
        }
        for (std::size_t a = 0; a < by.size(); ++a) {
            for (std::size_t b = a + 1; b < by.size(); ++b) {
                if (!t.less(by[a], by[b]) && !t.less(by[b], by[a])) {
                    standard = false;
                    push_violation(rep.violations, "predecessors of " + y.str() +
                                                       " not linear: " + by[a].str() + ", " +
                                                       by[b].str());
                }
            }
        }
    }
    if (n > 0) {
        if (!t.contains(Ordinal())) {
            standard = false;
            push_violation(rep.violations, "nonempty tree without root 0");
        } else {
            for (const auto& x : ns) {
                if (!x.is_zero() && !t.less(Ordinal(), x)) {
                    standard = false;
                    push_violation(rep.violations, "root not below " + x.str());
                }
            }
        }
    }
    rep.is_standard = standard;

    // Downward closure over tree-wide realized heights.
    bool closed = true;
    std::vector<Ordinal> hs = realized_heights(t);
    for (int i = 0; i < n; ++i) {
        const Ordinal& x = ns[static_cast<std::size_t>(i)];
        const Ordinal& hx = h[static_cast<std::size_t>(i)];
        const NodeSet& bx = t.strictly_below(x);
        for (const auto& a : hs) {
            if (!(a < hx)) break;
            bool witnessed = false;
            for (const auto& z : bx) {
                if (height_of(z) == a) {
                    witnessed = true;
                    break;
                }
            }
            if (!witnessed) {
                closed = false;
                push_violation(rep.violations, "node " + x.str() +
                                                   " misses a predecessor at height " + a.str());
            }
        }
    }
    rep.is_downwards_closed = closed;

    // Minimal splits: each incomparable pair branches immediately above its meet.
    bool splits = true;
    for (int i = 0; i < n && splits; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Ordinal& x = ns[static_cast<std::size_t>(i)];
            const Ordinal& y = ns[static_cast<std::size_t>(j)];
            if (t.less(x, y) || t.less(y, x)) continue;
            auto m = meet(t, x, y);
            if (!m) {
                splits = false;
                push_violation(rep.violations, "incomparable " + x.str() + ", " + y.str() +
                                                   " have no largest common lower bound");
                break;
            }
            Ordinal target = succ(height_of(*m));
            auto witness_below = [&](const Ordinal& top) -> bool {
                if (height_of(top) == target && t.less(*m, top)) return true;
                for (const auto& z : t.strictly_below(top)) {
                    if (height_of(z) == target && t.less(*m, z)) return true;
                }
                return false;
            };
            // Witnesses on the two sides are distinct automatically: equal ones
            // would sit below both x and y, contradicting the meet's maximality.
            if (!witness_below(x) || !witness_below(y)) {
                splits = false;
                push_violation(rep.violations, "no split at height " + target.str() +
                                                   " above the meet of " + x.str() + ", " + y.str());
                break;
            }
        }
    }
    rep.has_minimal_splits = splits;
    return rep;
}

FiniteTree restrict_tree(const FiniteTree& t, const Ordinal& delta) {
    FiniteTree r;
    for (const auto& x : t.nodes()) {
        if (x < delta) r.add_node(x);
    }
    for (const auto& y : r.nodes()) {
        for (const auto& x : t.strictly_below(y)) {
            if (x < delta) r.add_pair(x, y);
        }
    }
    return r;
}

bool is_end_extension(const FiniteTree& t, const FiniteTree& u) {
    if (!sv_subset(t.nodes(), u.nodes())) return false;
    for (const auto& y : t.nodes()) {
        const NodeSet& tb = t.strictly_below(y);
        NodeSet ub = sv_intersect(u.strictly_below(y), t.nodes());
        if (tb != ub) return false;
    }
    return true;
}

FiniteTree tree_union(const std::vector<FiniteTree>& parts) {
    if (parts.size() < 2)
        throw PreconditionError("tree_union: need at least two parts");
    FiniteTree r;
    for (const auto& p : parts) {
        for (const auto& x : p.nodes()) r.add_node(x);
    }
    for (const auto& p : parts) {
        for (const auto& y : p.nodes()) {
            for (const auto& x : p.strictly_below(y)) r.add_pair(x, y);
        }
    }
    return r;
}

std::optional<Ordinal> meet(const FiniteTree& t, const Ordinal& x, const Ordinal& y) {
    NodeSet common = sv_intersect(t.strictly_below(x), t.strictly_below(y));
    if (common.empty()) return std::nullopt;
    for (const auto& z : common) {
        bool top = true;
        for (const auto& w : common) {
            if (w != z && !t.less(w, z)) {
                top = false;
                break;
            }
        }
        if (top) return z;
    }
    return std::nullopt;
}

std::vector<Ordinal> realized_heights(const FiniteTree& t) {
    return realized_heights(t, t.nodes());
}

std::vector<Ordinal> realized_heights(const FiniteTree&, const NodeSet& carrier) {
    std::vector<Ordinal> hs;
    hs.reserve(carrier.size());
    for (const auto& x : carrier) hs.push_back(height_of(x));
    return sv_sorted(std::move(hs));
}

int longest_chain(const FiniteTree& t) {
    int best = 0;
    for (const auto& x : t.nodes()) {
        int len = static_cast<int>(t.strictly_below(x).size()) + 1;
        if (len > best) best = len;
    }
    return best;
}

bool is_downwards_closed_in(const FiniteTree& t, const NodeSet& carrier) {
    for (const auto& x : carrier) {
        for (const auto& y : t.strictly_below(x)) {
            if (!sv_contains(carrier, y)) return false;
        }
    }
    return true;
}

NodeSet downward_closure_in(const FiniteTree& t, NodeSet carrier) {
    for (const auto& x : carrier) {
        if (!t.contains(x))
            throw PreconditionError("downward_closure_in: carrier node " + x.str() +
                                    " not in the host tree");
    }
    NodeSet out = carrier;
    for (const auto& x : carrier) {
        for (const auto& y : t.strictly_below(x)) sv_insert(out, y);
    }
    return out;
}

Ordinal alloc_node(const NodeSet& used, const Ordinal& height, const Ordinal& ceiling) {
    if (height.is_zero()) {
        Ordinal root;
        if (sv_contains(used, root)) throw OverflowError("alloc_node: root slot already used");
        return root;
    }
    Ordinal base = omega_times(height);
    for (std::uint64_t k = 0;; ++k) {
        Ordinal cand = base + Ordinal::nat(k);
        if (!sv_contains(used, cand)) {
            require_below_ceiling(cand, ceiling, "alloc_node");
            return cand;
        }
        if (k > (1u << 20))
            throw OverflowError("alloc_node: block exhausted at height " + height.str());
    }
}

Ordinal insert_node_below(FiniteTree& t, const Ordinal& v, const Ordinal& a) {
    if (!t.contains(v)) throw PreconditionError("insert_node_below: node off the tree");
    if (!(a < height_of(v)))
        throw PreconditionError("insert_node_below: target height not below " + v.str());
    NodeSet preds = t.strictly_below(v); // copy before mutation
    for (const auto& w : preds) {
        if (height_of(w) == a)
            throw PreconditionError("insert_node_below: height already realized on the chain");
    }
    NodeSet above;
    for (const auto& u : t.nodes()) {
        if (t.less(v, u)) above.push_back(u);
    }
    Ordinal z = alloc_node(t.nodes(), a);
    t.add_node(z);
    t.add_pair(z, v);
    for (const auto& w : preds) {
        if (height_of(w) < a)
            t.add_pair(w, z);
        else
            t.add_pair(z, w);
    }
    for (const auto& u : above) t.add_pair(z, u);
    return z;
}

Ordinal insert_node_above(FiniteTree& t, const Ordinal& x, const Ordinal& b) {
    if (!t.contains(x)) throw PreconditionError("insert_node_above: node off the tree");
    if (!(height_of(x) < b))
        throw PreconditionError("insert_node_above: target height not above " + x.str());
    NodeSet chain = t.strictly_below(x); // copy before mutation
    Ordinal z = alloc_node(t.nodes(), b);
    t.add_node(z);
    t.add_pair(x, z);
    for (const auto& w : chain) t.add_pair(w, z);
    return z;
}

IncomparableFamily find_incomparable_family(const FiniteTree& t,
                                            const std::vector<NodeSet>& blocks,
                                            int want, int max_chain) {
    TreeReport rep = validate_tree(t);
    if (!rep.is_standard)
        throw PreconditionError("find_incomparable_family: host tree is not standard");
    if (longest_chain(t) > max_chain)
        throw PreconditionError("find_incomparable_family: a chain of length " +
                                std::to_string(longest_chain(t)) +
                                " exceeds the configured bound " + std::to_string(max_chain));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        for (const auto& x : blocks[i]) {
            if (!t.contains(x))
                throw PreconditionError("find_incomparable_family: block node " + x.str() +
                                        " not in the tree");
        }
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            if (!sv_disjoint(blocks[i], blocks[j]))
                throw PreconditionError("find_incomparable_family: blocks " + std::to_string(i) +
                                        " and " + std::to_string(j) + " overlap");
        }
    }

    const int b = static_cast<int>(blocks.size());
    std::vector<std::vector<bool>> compat(static_cast<std::size_t>(b),
                                          std::vector<bool>(static_cast<std::size_t>(b), true));
    for (int i = 0; i < b; ++i) {
        for (int j = i + 1; j < b; ++j) {
            bool ok = true;
            for (const auto& x : blocks[static_cast<std::size_t>(i)]) {
                for (const auto& y : blocks[static_cast<std::size_t>(j)]) {
                    if (t.less(x, y) || t.less(y, x)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
            compat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = ok;
            compat[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = ok;
        }
    }

    IncomparableFamily out;
    std::vector<int> picks;
    std::function<bool(int)> extend = [&](int from) -> bool {
        if (static_cast<int>(picks.size()) == want) return true;
        for (int c = from; c < b; ++c) {
            bool ok = true;
            for (int p : picks) {
                if (!compat[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            picks.push_back(c);
            if (extend(c + 1)) return true;
            picks.pop_back();
        }
        return false;
    };
    if (want <= 0) {
        out.found = true;
        return out;
    }
    if (extend(0)) {
        out.found = true;
        out.picks = picks;
    } else {
        out.failure = "no pairwise incomparable selection of " + std::to_string(want) +
                      " blocks among " + std::to_string(b);
    }
    return out;
}

} // namespace treelab
