#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treelab/ordinal.hpp"
#include "treelab/set_util.hpp"

namespace treelab {

// Sorted unique vector of node values; the carrier type for subtrees too.
using NodeSet = std::vector<Ordinal>;

// Candidate finite tree: a finite node set (intended domain {0} u [w, ...))
// together with an arbitrary set of strict-order pairs. The container assumes
// nothing; validate_tree reports against the standard-tree clauses, so raw
// unions and mutation states are first-class values.
class FiniteTree {
public:
    FiniteTree() = default;

    int size() const { return static_cast<int>(nodes_.size()); }
    bool empty() const { return nodes_.empty(); }
    const NodeSet& nodes() const { return nodes_; }
    bool contains(const Ordinal& x) const { return sv_contains(nodes_, x); }

    // True when the pair x <_T y is present.
    bool less(const Ordinal& x, const Ordinal& y) const;
    bool leq(const Ordinal& x, const Ordinal& y) const { return x == y ? contains(x) : less(x, y); }

    void add_node(const Ordinal& x); // idempotent
    // Records x <_T y. pre: both nodes present, x != y.
    void add_pair(const Ordinal& x, const Ordinal& y);

    // Strict lower set {y : y <_T x}, sorted by node value.
    const NodeSet& strictly_below(const Ordinal& x) const;

    // All order pairs (x, y) with x <_T y, sorted; the canonical serial form.
    std::vector<std::pair<Ordinal, Ordinal>> pairs() const;

    static FiniteTree from_pairs(const NodeSet& nodes,
                                 const std::vector<std::pair<Ordinal, Ordinal>>& pairs);

    friend bool operator==(const FiniteTree& a, const FiniteTree& b) {
        return a.nodes_ == b.nodes_ && a.below_ == b.below_;
    }
    friend bool operator!=(const FiniteTree& a, const FiniteTree& b) { return !(a == b); }

private:
    NodeSet nodes_;
    std::vector<NodeSet> below_; // below_[i] = {y : y <_T nodes_[i]}
};

struct TreeReport {
    bool is_standard = false;
    bool is_downwards_closed = false;  // relative realized heights (tree-wide)
    bool has_minimal_splits = false;
    std::vector<std::string> violations;

    bool all() const { return is_standard && is_downwards_closed && has_minimal_splits; }
};

// Checks the standard-tree clauses (node domain, strict partial order, linear
// predecessor chains, height monotonicity, root below everything), tree-wide
// downward closure, and minimal splits. The latter two are evaluated
// literally even when the tree is not standard.
TreeReport validate_tree(const FiniteTree& t);

// T restricted to nodes < delta with the induced order.
FiniteTree restrict_tree(const FiniteTree& t, const Ordinal& delta);

// u end-extends t: t's nodes are u's nodes and the orders agree on t.
bool is_end_extension(const FiniteTree& t, const FiniteTree& u);

// Node-and-pair union of the parts; NOT guaranteed standard. Callers validate.
// pre: at least two parts.
FiniteTree tree_union(const std::vector<FiniteTree>& parts);

// Largest common strict lower bound of two nodes, when one exists.
std::optional<Ordinal> meet(const FiniteTree& t, const Ordinal& x, const Ordinal& y);

// Realized heights h[T], sorted unique.
std::vector<Ordinal> realized_heights(const FiniteTree& t);
std::vector<Ordinal> realized_heights(const FiniteTree& t, const NodeSet& carrier);

// Length of the longest chain. pre: t standard (predecessor sets linear).
int longest_chain(const FiniteTree& t);

// Subtree carriers. A carrier is downwards closed in t when it contains every
// t-predecessor of each of its members (a lower set of the host order). In
// particular every nonempty downwards-closed carrier of a standard tree
// contains the root.
bool is_downwards_closed_in(const FiniteTree& t, const NodeSet& carrier);

// {y : y <=_t x for some x in carrier}, the least downwards-closed superset.
// pre: carrier inside t, else PreconditionError.
NodeSet downward_closure_in(const FiniteTree& t, NodeSet carrier);

// Least unused node value at the given height: block [w*g, w*g + w), except
// that height 0 admits only the root value 0. Throws OverflowError when the
// block is exhausted or the value reaches the ceiling.
Ordinal alloc_node(const NodeSet& used, const Ordinal& height,
                   const Ordinal& ceiling = default_ceiling());

// Fresh node at height a on the chain through v, returned. New order pairs
// only ever involve the fresh node, so the result end-extends the input, and
// the fresh node keeps v as an old node above it. pre: v in t, a < h(v), and
// no predecessor of v already sits at height a.
Ordinal insert_node_below(FiniteTree& t, const Ordinal& v, const Ordinal& a);

// Fresh maximal node at height b wired above x and its whole chain, returned.
// End-extends the input. pre: x in t, h(x) < b.
Ordinal insert_node_above(FiniteTree& t, const Ordinal& x, const Ordinal& b);

struct IncomparableFamily {
    bool found = false;
    std::vector<int> picks;  // block indices, ascending
    std::string failure;     // set when !found
};

// Finds `want` blocks that are pairwise fully incomparable in t (every node
// of one incomparable with every node of the other). Finite stand-in for the
// chain-free selection theorem; max_chain is the explicit finite analogue of
// the no-uncountable-chain hypothesis and is enforced as a precondition.
// Blocks must be subsets of t and pairwise disjoint. Failure is a value.
IncomparableFamily find_incomparable_family(const FiniteTree& t,
                                            const std::vector<NodeSet>& blocks,
                                            int want, int max_chain);

} // namespace treelab
