#include "treelab/base_condition.hpp"

namespace treelab {

UPair make_upair(const UOrd& a, const UOrd& b) {
    if (a == b) throw PreconditionError("make_upair: equal endpoints " + a.str());
    return a < b ? UPair{a, b} : UPair{b, a};
}

const NodeSet& subtree_of(const BaseCondition& c, const UOrd& eta) {
    static const NodeSet empty;
    auto it = c.subtrees.find(eta);
    return it == c.subtrees.end() ? empty : it->second;
}

std::vector<UOrd> domain_of(const BaseCondition& c) {
    std::vector<UOrd> d;
    d.reserve(c.subtrees.size());
    for (const auto& [eta, w] : c.subtrees) d.push_back(eta);
    return d;
}

BaseReport validate_base(const BaseCondition& c) {
    BaseReport rep;
    if (!validate_tree(c.tree).is_standard)
        rep.violations.push_back("tree is not a standard finite tree");

    for (const auto& [eta, w] : c.subtrees) {
        bool inside = true;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i > 0 && !(w[i - 1] < w[i])) {
                rep.violations.push_back("carrier of " + eta.str() + " not sorted unique");
                inside = false;
                break;
            }
            if (!c.tree.contains(w[i])) {
                rep.violations.push_back("carrier of " + eta.str() + " has non-tree node " +
                                         w[i].str());
                inside = false;
            }
        }
        if (inside && !is_downwards_closed_in(c.tree, w))
            rep.violations.push_back("carrier of " + eta.str() + " not downwards closed");
    }

    for (std::size_t i = 0; i < c.commitments.size(); ++i) {
        const UPair& pr = c.commitments[i];
        if (!(pr.first < pr.second)) {
            rep.violations.push_back("commitment pair not normalized");
            continue;
        }
        if (i > 0 && !(c.commitments[i - 1] < pr))
            rep.violations.push_back("commitments not sorted unique");
        if (c.subtrees.find(pr.first) == c.subtrees.end() ||
            c.subtrees.find(pr.second) == c.subtrees.end())
            rep.violations.push_back("commitment {" + pr.first.str() + "," + pr.second.str() +
                                     "} outside the domain");
    }

    rep.ok = rep.violations.empty();
    return rep;
}

namespace {

void require_valid(const BaseCondition& c, const char* what) {
    BaseReport rep = validate_base(c);
    if (!rep.ok) throw PreconditionError(std::string(what) + ": " + rep.violations.front());
}

} // namespace

bool leq_base(const BaseCondition& q, const BaseCondition& p) {
    require_valid(q, "leq_base (left)");
    require_valid(p, "leq_base (right)");

    if (!is_end_extension(p.tree, q.tree)) return false;
    for (const auto& [eta, w] : p.subtrees) {
        if (q.subtrees.find(eta) == q.subtrees.end()) return false;
        if (!sv_subset(w, subtree_of(q, eta))) return false;
    }
    if (!sv_subset(p.commitments, q.commitments)) return false;

    for (const auto& pr : p.commitments) {
        NodeSet qi = sv_intersect(subtree_of(q, pr.first), subtree_of(q, pr.second));
        NodeSet pi = sv_intersect(subtree_of(p, pr.first), subtree_of(p, pr.second));
        for (const auto& x : qi) {
            bool bounded = false;
            for (const auto& z : pi) {
                if (q.tree.leq(x, z)) {
                    bounded = true;
                    break;
                }
            }
            if (!bounded) return false;
        }
    }
    return true;
}

BaseCondition normalize_base(const BaseCondition& p) {
    require_valid(p, "normalize_base");

    FiniteTree t = p.tree;

    // Every insert_node_below call leaves the old order untouched and keeps an
    // old node above the fresh one whose old predecessors and successors are
    // all reachable — which is what keeps carrier intersections bounded by old
    // witnesses after closure.
    int guard = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        if (++guard > 1000) throw OverflowError("normalize_base: closure did not stabilize");

        // Downward closure over realized heights.
        bool inner = true;
        while (inner) {
            inner = false;
            std::vector<Ordinal> hs = realized_heights(t);
            NodeSet snapshot = t.nodes();
            for (const auto& x : snapshot) {
                Ordinal hx = height_of(x);
                for (const auto& a : hs) {
                    if (!(a < hx)) break;
                    bool has = false;
                    for (const auto& w : t.strictly_below(x)) {
                        if (height_of(w) == a) {
                            has = true;
                            break;
                        }
                    }
                    if (!has) {
                        insert_node_below(t, x, a);
                        inner = true;
                        changed = true;
                    }
                }
            }
        }

        // Minimal splits: each incomparable pair needs witnesses one height
        // above its meet on both sides.
        NodeSet snapshot = t.nodes();
        for (const auto& x : snapshot) {
            for (const auto& y : snapshot) {
                if (!(x < y)) continue;
                if (t.less(x, y) || t.less(y, x)) continue;
                auto m = meet(t, x, y);
                if (!m)
                    throw FidelityError("normalize_base: incomparable pair without a meet in a "
                                        "standard rooted tree");
                Ordinal target = succ(height_of(*m));
                for (const Ordinal& side : {x, y}) {
                    bool has = height_of(side) == target && t.less(*m, side);
                    for (const auto& w : t.strictly_below(side)) {
                        if (has) break;
                        if (height_of(w) == target && t.less(*m, w)) has = true;
                    }
                    if (!has) {
                        insert_node_below(t, side, target);
                        changed = true;
                    }
                }
            }
        }
    }

    BaseCondition q;
    q.tree = t;
    for (const auto& [eta, w] : p.subtrees) q.subtrees[eta] = downward_closure_in(t, w);
    q.commitments = p.commitments;
    return q;
}

std::string split_pair_violation(const BaseCondition& p, const BaseCondition& q,
                                 const Ordinal& dp, const Ordinal& dq) {
    if (!(dp < dq) || !is_split_level(dp) || !is_split_level(dq))
        throw PreconditionError("split_pair: needs split levels dp < dq, got " + dp.str() +
                                ", " + dq.str());
    require_valid(p, "split_pair (first)");
    require_valid(q, "split_pair (second)");

    if (restrict_tree(p.tree, dp) != restrict_tree(q.tree, dq))
        return "clause 1: tree restrictions at the two levels differ";
    for (const auto& x : p.tree.nodes()) {
        if (!(x < dq)) return "clause 2: first tree has node " + x.str() + " not below " + dq.str();
    }

    std::vector<UOrd> shared = sv_intersect(domain_of(p), domain_of(q));
    for (const auto& eta : shared) {
        NodeSet tp, tq;
        for (const auto& x : subtree_of(p, eta)) {
            if (x < dp) tp.push_back(x);
        }
        for (const auto& x : subtree_of(q, eta)) {
            if (x < dq) tq.push_back(x);
        }
        if (tp != tq) return "clause 3: carrier traces differ at " + eta.str();
    }
    for (std::size_t i = 0; i < shared.size(); ++i) {
        for (std::size_t j = i + 1; j < shared.size(); ++j) {
            NodeSet pi = sv_intersect(subtree_of(p, shared[i]), subtree_of(p, shared[j]));
            NodeSet qi = sv_intersect(subtree_of(q, shared[i]), subtree_of(q, shared[j]));
            for (const auto& x : pi) {
                if (!(x < dp))
                    return "clause 4: first condition shares " + x.str() + " at {" +
                           shared[i].str() + "," + shared[j].str() + "} above " + dp.str();
            }
            for (const auto& x : qi) {
                if (!(x < dq))
                    return "clause 4: second condition shares " + x.str() + " at {" +
                           shared[i].str() + "," + shared[j].str() + "} above " + dq.str();
            }
        }
    }
    return "";
}

bool is_split_pair(const BaseCondition& p, const BaseCondition& q, const Ordinal& dp,
                   const Ordinal& dq) {
    return split_pair_violation(p, q, dp, dq).empty();
}

BaseCondition merge_base(const std::vector<BaseCondition>& parts) {
    if (parts.size() < 2) throw PreconditionError("merge_base: need at least two parts");
    std::vector<FiniteTree> trees;
    trees.reserve(parts.size());
    for (const auto& c : parts) trees.push_back(c.tree);

    BaseCondition r;
    r.tree = tree_union(trees);
    for (const auto& c : parts) {
        for (const auto& [eta, w] : c.subtrees) {
            NodeSet& acc = r.subtrees[eta];
            acc = sv_union(acc, w);
        }
        for (const auto& pr : c.commitments) sv_insert(r.commitments, pr);
    }
    return r;
}

AmalgamResult amalgamate_split_family(const std::vector<BaseCondition>& parts,
                                      const std::vector<Ordinal>& deltas) {
    if (parts.size() < 2)
        throw PreconditionError("amalgamate_split_family: need at least two parts");
    if (parts.size() != deltas.size())
        throw PreconditionError("amalgamate_split_family: one split level per part");

    std::vector<std::string> cert;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        for (std::size_t j = i + 1; j < parts.size(); ++j) {
            std::string v = split_pair_violation(parts[i], parts[j], deltas[i], deltas[j]);
            if (!v.empty())
                throw PreconditionError("amalgamate_split_family: parts " + std::to_string(i) +
                                        "," + std::to_string(j) + ": " + v);
            cert.push_back("split(" + std::to_string(i) + "," + std::to_string(j) + ") at " +
                           deltas[i].str() + "," + deltas[j].str());
        }
    }

    std::vector<UOrd> root = sv_intersect(domain_of(parts[0]), domain_of(parts[1]));
    for (std::size_t i = 0; i < parts.size(); ++i) {
        for (std::size_t j = i + 1; j < parts.size(); ++j) {
            if (sv_intersect(domain_of(parts[i]), domain_of(parts[j])) != root)
                throw PreconditionError("amalgamate_split_family: domains of parts " +
                                        std::to_string(i) + "," + std::to_string(j) +
                                        " break the sunflower");
        }
    }
    std::string root_str = "{";
    for (std::size_t i = 0; i < root.size(); ++i)
        root_str += (i ? "," : "") + root[i].str();
    cert.push_back("domain sunflower with root " + root_str + "}");

    AmalgamResult out;
    out.condition = merge_base(parts);
    BaseReport rep = validate_base(out.condition);
    if (!rep.ok)
        throw FidelityError("amalgamate_split_family: merged object invalid: " +
                            rep.violations.front());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!leq_base(out.condition, parts[i]))
            throw FidelityError("amalgamate_split_family: merge does not extend part " +
                                std::to_string(i));
    }
    cert.push_back("merge validated and extends all parts");
    out.certificate = std::move(cert);
    return out;
}

} // namespace treelab
