#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "treelab/base_condition.hpp"
#include "treelab/universe.hpp"

namespace treelab {

// Base condition decorated with a finite list of models ("side conditions").
// The container assumes nothing: models need not be sorted, adequate, or
// separated. validate_side reports; builder operations emit sorted-unique
// model lists and certify what they claim.
struct SideCondition {
    BaseCondition base;
    std::vector<ModelSet> models;

    friend bool operator==(const SideCondition& a, const SideCondition& b) {
        return a.base == b.base && a.models == b.models;
    }
    friend bool operator!=(const SideCondition& a, const SideCondition& b) { return !(a == b); }
};

// Base support plus every model's trace and stations.
void collect_support(const SideCondition& c, Support& s);

// Separation clause: for every model M in the list and every pair of distinct
// domain indices that both lie in M's hull, each tree node shared by their
// carriers must lie in M's hull as well. Returns "" when separated, else a
// description of the first failure.
std::string a_separation_violation(const BaseCondition& base,
                                   const std::vector<ModelSet>& models);

// Full validity: base clauses, every model valid, the model list adequate,
// and the carrier map separated over the model list.
BaseReport validate_side(const Universe& u, const SideCondition& p);

// q extends p: base extension plus p's models all kept. pre: both valid.
bool leq_side(const Universe& u, const SideCondition& q, const SideCondition& p);

// Restricts every carrier to its own index's level band (base normalization)
// and keeps the models. pre: p valid. Certifies the result valid -- in
// particular still separated; FidelityError otherwise.
SideCondition normalize_side(const Universe& u, const SideCondition& p);

// Adjoins one model n to p. pre: p valid, n a valid model, and p's full
// support inside n's hull. Certifies the result valid; FidelityError if the
// grown list loses adequacy or separation.
SideCondition add_model(const Universe& u, const SideCondition& p, const ModelSet& n);

// Closes p's model list under intersection with n (every member with a lower
// trace contributes its intersection). pre: p valid, n in p's list. Certifies
// the result valid; FidelityError otherwise.
SideCondition closure_extend(const Universe& u, const SideCondition& p, const ModelSet& n);

// Closes p's model list under truncation at a cut station. pre: p valid,
// cut_station a cut. Certifies the result valid and still closed under every
// member it was closed under before; FidelityError otherwise.
SideCondition closure_extend(const Universe& u, const SideCondition& p, int cut_station);

// Componentwise union: merged base plus sorted-unique model union. Raw --
// callers validate. pre: at least two parts.
SideCondition merge_side(const std::vector<SideCondition>& parts);

// Extension-transfer criterion. Hypotheses: r valid, r extends every part,
// and for each pair of parts every two cross-private tree nodes (one in
// part i only, one in part j only) are incomparable in r's tree. Conclusion
// checked when they hold: r extends the merged condition. pre: merge_side of
// the parts validates and extends each part.
UnionCheckVerdict merge_leq_criterion(const Universe& u,
                                      const std::vector<SideCondition>& parts,
                                      const SideCondition& r);

// Matching families for the model-indexed amalgamation: f[{j,i}] carries
// part j's domain onto part i's, g[{j,i}] carries part j's model list onto
// part i's. Only pairs with i < j are consulted.
struct FGFamilies {
    std::map<std::pair<std::size_t, std::size_t>, std::map<UOrd, UOrd>> f;
    std::map<std::pair<std::size_t, std::size_t>, std::map<ModelSet, ModelSet>> g;
};

struct SideAmalgamResult {
    SideCondition condition;
    std::vector<std::string> certificate; // one line per verified obligation
};

// Amalgamation over designated models. parts[i] is valid, models[i] is a
// member of parts[i]'s list with positive trace, the list is closed under
// models[i], and parts[i] lies in models[j]'s hull for i < j. The families
// must be commuting bijections satisfying the six matching clauses (error
// messages name the failed clause "(1)".."(6)"). The merged condition is
// built through the split-family engine and certified to be valid and to
// extend every part; certification failures raise FidelityError.
SideAmalgamResult amalgamate_over_models(const Universe& u,
                                         const std::vector<SideCondition>& parts,
                                         const std::vector<ModelSet>& models,
                                         const FGFamilies& fam);

// Finite fingerprint of a condition over one of its models. Enumerations are
// canonical: domain indices ascending, models in trace-then-stations order.
struct Fingerprint {
    FiniteTree t;                 // tree below the model's trace
    std::vector<UOrd> a;          // domain indices inside the hull
    std::vector<ModelSet> b;      // listed models inside the hull
    std::size_t m = 0;            // domain size
    std::size_t n = 0;            // model-list size
    std::vector<NodeSet> w;       // carrier of index k below the trace
    std::vector<std::size_t> u0;  // positions of indices inside the hull
    std::vector<std::size_t> u1;  // positions of models inside the hull
    std::vector<std::size_t> u2;  // positions of models with lower trace
    std::vector<std::pair<std::size_t, std::size_t>> u3; // index k in model l
    std::vector<Ordinal> h0;      // trace of model l, for l in u2
    std::vector<ModelSet> h1;     // model l truncated to the hull, for l in u2

    friend bool operator==(const Fingerprint& x, const Fingerprint& y) {
        return x.t == y.t && x.a == y.a && x.b == y.b && x.m == y.m && x.n == y.n &&
               x.w == y.w && x.u0 == y.u0 && x.u1 == y.u1 && x.u2 == y.u2 && x.u3 == y.u3 &&
               x.h0 == y.h0 && x.h1 == y.h1;
    }
    friend bool operator!=(const Fingerprint& x, const Fingerprint& y) { return !(x == y); }
};

// Canonical text form; equal strings iff equal fingerprints. Pool key.
std::string fingerprint_key(const Fingerprint& fp);

// Evaluates the fingerprint of p over n. pre: p valid, n in p's list with
// positive trace, list closed under n. Certifies that every component lies
// in n's hull; FidelityError otherwise.
Fingerprint fingerprint_of(const Universe& u, const SideCondition& p, const ModelSet& n);

// Amalgamation from fingerprint equality alone: all pairs (parts[i],
// models[i]) must produce equal fingerprints and parts[i] must lie in
// models[j]'s hull for i < j. The matching families are built positionally
// from the canonical enumerations and handed to amalgamate_over_models; a
// rejection there is a broken derived obligation, so it resurfaces as
// FidelityError. Afterwards the three sunflower facts are certified for
// every part k: pairwise intersections of the trees below the traces, of the
// domains, and of the model lists each equal part k's fingerprint component.
SideAmalgamResult amalgamate_by_fingerprint(const Universe& u,
                                            const std::vector<SideCondition>& parts,
                                            const std::vector<ModelSet>& models);

struct ReflectResult {
    bool found = false;
    SideCondition witness;   // copy inside the hull, when found
    SideCondition combined;  // certified amalgam of witness and the original
    std::string log;         // candidate trail; honest reason when not found
};

// Searches n's hull for a copy of q: a condition q-bar satisfying the
// thirteen matching clauses of the reflection argument (constraint standing
// in for dense-set membership) whose amalgam with q over (copy model, n) is
// certified. pre: q valid, n in q's list with positive trace, list closed
// under n. Candidates scan allocation traces below n's; a null constraint
// accepts everything. Exhaustion is reported via found = false, never by
// weakening a clause.
ReflectResult reflect_into_hull(const Universe& u, const SideCondition& q, const ModelSet& n,
                                const std::function<bool(const SideCondition&)>& constraint = {});

} // namespace treelab
