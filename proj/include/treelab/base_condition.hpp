#pragma once

#include <map>
#include <string>
#include <vector>

#include "treelab/tree.hpp"
#include "treelab/upoint.hpp"

namespace treelab {

// Unordered index pair, stored normalized (first < second).
using UPair = std::pair<UOrd, UOrd>;

// pre: a != b.
UPair make_upair(const UOrd& a, const UOrd& b);

// Base-layer condition: a finite tree, finitely many named subtree carriers,
// and a set of committed index pairs whose subtree intersections the order
// relation freezes. The container assumes nothing; validate_base reports.
struct BaseCondition {
    FiniteTree tree;
    std::map<UOrd, NodeSet> subtrees;  // absent index reads as the empty carrier
    std::vector<UPair> commitments;    // sorted unique, endpoints in the domain

    friend bool operator==(const BaseCondition& a, const BaseCondition& b) {
        return a.tree == b.tree && a.subtrees == b.subtrees && a.commitments == b.commitments;
    }
    friend bool operator!=(const BaseCondition& a, const BaseCondition& b) { return !(a == b); }
};

struct BaseReport {
    bool ok = false;
    std::vector<std::string> violations;
};

// The named carrier, or the empty set off-domain.
const NodeSet& subtree_of(const BaseCondition& c, const UOrd& eta);
std::vector<UOrd> domain_of(const BaseCondition& c);

// Clauses: tree standard; every carrier a downwards-closed subset of the
// tree's nodes; commitments normalized pairs over the domain.
BaseReport validate_base(const BaseCondition& c);

// q extends p: (a) tree end-extension, (b) domain and carriers grow pointwise,
// (c) commitments grow, (d) for committed pairs of p, any shared carrier node
// of q sits below some shared carrier node of p. pre: both valid.
bool leq_base(const BaseCondition& q, const BaseCondition& p);

// Deterministic strengthening: grows the tree until it is downwards closed
// with minimal splits, then replaces each carrier by its downward closure.
// The result extends the input, keeps domain and commitments, and every new
// shared carrier node sits below an old one (so separation bounds survive).
// pre: valid. errors: node-allocation overflow.
BaseCondition normalize_base(const BaseCondition& p);

// The two-level split predicate over split levels dp < dq: (1) equal
// restrictions, (2) first tree below dq, (3) equal carrier traces on the
// shared domain, (4) shared-pair intersections bounded by dp resp. dq.
// pre: dp < dq, both split levels; p, q valid.
bool is_split_pair(const BaseCondition& p, const BaseCondition& q, const Ordinal& dp,
                   const Ordinal& dq);
// Empty when the pair is split; otherwise names the violated clause.
std::string split_pair_violation(const BaseCondition& p, const BaseCondition& q,
                                 const Ordinal& dp, const Ordinal& dq);

// Componentwise union of the parts; NOT necessarily a condition, and even
// when it is, not necessarily an extension of the parts. pre: length >= 2.
BaseCondition merge_base(const std::vector<BaseCondition>& parts);

struct AmalgamResult {
    BaseCondition condition;
    std::vector<std::string> certificate; // hypothesis clauses checked, in order
};

// Merges a pairwise-split family whose domains form a sunflower (all pairwise
// intersections equal). Hypotheses are re-checked and named on failure; the
// merged condition is certified valid and below every part before returning
// (certification failure throws FidelityError; it would refute the theorem
// this operation implements).
AmalgamResult amalgamate_split_family(const std::vector<BaseCondition>& parts,
                                      const std::vector<Ordinal>& deltas);

} // namespace treelab
