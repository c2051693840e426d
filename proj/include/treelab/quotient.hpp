#pragma once
// Station-hull projection machinery and quotient-forcing semantics against
// finite filter approximations.
//
// A reflection station theta splits the universe: data below it lies inside
// the station hull, data at or above it is "high". Conditions that carry a
// renaming of their high data into the hull project cleanly, and a finite
// filter approximation (the upward closure of a single generator inside the
// hull) makes every quotient predicate decidable. Divergence from true
// genericity is documented in every report header line.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treelab/ccc.hpp"
#include "treelab/side.hpp"

namespace treelab {

// --- station hulls ---------------------------------------------------------

// Countable data always lies inside a station hull; a station lies inside
// iff it sits strictly below the marker.
bool below_station(int theta, const UOrd& e);
// A model lies inside the hull iff every station it carries does.
bool model_below_station(int theta, const ModelSet& m);
// A condition lies inside the hull iff its whole support does.
bool side_below_station(int theta, const SideCondition& p);

// Subset order on models: trace no higher and stations contained.
bool model_subset(const ModelSet& a, const ModelSet& b);

// Every listed model keeps its truncation at the station in the list.
bool theta_closed(const std::vector<ModelSet>& models, int theta);

// Throws unless the station carries the reflection flag and is a cut (the
// truncation machinery needs the cut structure at the station).
void require_reflection_station(const Universe& u, int theta);

// Least station carrying both the reflection flag and the cut attribute.
// errors: PreconditionError when the universe has none.
int pick_reflection_station(const Universe& u);

// --- projection --------------------------------------------------------

// Restriction of a condition to the station hull: the tree survives whole;
// indices, committed pairs, and models survive iff they lie below the
// station. pre: reflection station, valid condition. The result is valid,
// lies inside the hull, and the input extends it.
SideCondition project_theta(const Universe& u, const SideCondition& p, int theta);

// --- witnessed projectability ------------------------------------------

// A projectable condition carries a renaming of its high data into the hull:
// f sends each high index to a low index with the same carrier, g sends each
// high model to a low model with the same trace absorbing its low part;
// membership patterns, committed pairs, and model nesting must transfer.
struct ThetaWitness {
    std::map<UOrd, UOrd> f;          // high index -> low index
    std::map<ModelSet, ModelSet> g;  // high model -> low model
    bool operator==(const ThetaWitness&) const = default;
};

// Names the first renaming clause (a)-(f) the witness breaks, or returns ""
// when the witness is sound for the condition at the station.
std::string theta_witness_violation(const Universe& u, const SideCondition& p,
                                    int theta, const ThetaWitness& w);

// Searches for the lexicographically least witness (f assignments first,
// then g, domains in canonical order). Returns nothing when the model list
// is not truncation-closed at the station or no renaming exists.
// pre: reflection station, valid condition.
std::optional<ThetaWitness> dtheta_check(const Universe& u, const SideCondition& p,
                                         int theta);

// --- cross-hull amalgamation -------------------------------------------

// Given a condition with a truncation-closed model list and its full mirror
// inside the hull (equal trees, bijections f on indices and g on models,
// identity on the low part, carriers, traces, and membership preserved), the
// componentwise union is a condition below both. Hypothesis breaks name
// their clause (1)-(5); a certification break after verified hypotheses is a
// fidelity failure.
SideAmalgamResult cross_theta_amalgamate(const Universe& u, const SideCondition& mirror,
                                         const SideCondition& q, int theta,
                                         const std::map<UOrd, UOrd>& f,
                                         const std::map<ModelSet, ModelSet>& g);

// --- densification ------------------------------------------------------

struct DensifyResult {
    SideCondition condition;
    ThetaWitness witness;  // canonical witness that the result is projectable
    std::vector<std::string> certificate;
};

// Extends a condition to a projectable one: closes the model list (under the
// optional designated model, then under the station), builds a mirror of the
// high data inside the hull by remapping high stations onto free low ones,
// and certifies the union. The remap scan is exhaustive over injections in
// canonical order; OverflowError reports honest exhaustion. With a
// designated model the result's list additionally stays closed under it.
DensifyResult dtheta_densify(const Universe& u, const SideCondition& q, int theta);
DensifyResult dtheta_densify(const Universe& u, const SideCondition& q, int theta,
                             const ModelSet& n);

// --- extended fingerprints ----------------------------------------------

struct ThetaFingerprint {
    Fingerprint base;
    std::vector<std::pair<UOrd, UOrd>> f_part;       // witness f restricted to the
                                                     // designated model's hull
    std::vector<std::pair<ModelSet, ModelSet>> g_part;  // witness g restricted likewise
    bool operator==(const ThetaFingerprint&) const = default;
};
std::string theta_fingerprint_key(const ThetaFingerprint& z);

// Fingerprint of a projectable condition relative to a designated listed
// model, extended with the canonical witness restricted to that model's
// hull. pre: projectable, model listed, list closed under the model.
ThetaFingerprint fingerprint_theta(const Universe& u, const SideCondition& p,
                                   const ModelSet& n, int theta);

// --- layered membership -------------------------------------------------

struct EthetaReport {
    bool member = false;
    bool direct = false;      // projectable with a nonempty model list
    bool decomposed = false;  // certified amalgam of matched projectable parts
    std::string detail;
};

// Membership in the extended projectable family: either directly projectable
// with a listed model, or a certified amalgam of fingerprint-matched
// projectable parts. The provenance overload verifies a supplied
// decomposition; the blind overload only tries the direct route and reports
// that honestly.
EthetaReport etheta_check(const Universe& u, const SideCondition& p, int theta);
EthetaReport etheta_check(const Universe& u, const SideCondition& p, int theta,
                          const std::vector<SideCondition>& parts,
                          const std::vector<ModelSet>& designated);

// --- projection transfer -------------------------------------------------

// Lifts an extension of the projection back over the original: the result
// keeps the extension's tree and low data and re-anchors the original's
// high carriers by closing them downward in the new tree. pre: the condition
// passes the layered membership check (supply provenance when it is an
// amalgam), the extension is valid, lies inside the hull, and extends the
// condition's projection. Certification failure after verified hypotheses
// is a fidelity counterexample.
SideAmalgamResult quotient_amalgamate(const Universe& u, const SideCondition& p,
                                      const SideCondition& s, int theta);
SideAmalgamResult quotient_amalgamate(const Universe& u, const SideCondition& p,
                                      const SideCondition& s, int theta,
                                      const std::vector<SideCondition>& parts,
                                      const std::vector<ModelSet>& designated);

// --- finite filter approximations ----------------------------------------

// Finite surrogate of a generic filter inside the station hull: the upward
// closure of the last chain element. Immutable once built; checks are pure.
struct FilterApprox {
    int theta = -1;
    std::vector<SideCondition> chain;  // descending, first = weakest
    SideCondition generator;           // last chain element
    FiniteTree tree;                   // the generator's tree == union along the chain
    std::vector<ModelSet> pool;        // models whose truncation at the station is listed
    std::vector<std::string> log;
};

// Assembles and certifies a filter approximation from a descending chain:
// members must be valid, lie inside the hull, and each extend its
// predecessor; every stage keeps the running tree as an end-extension. The
// pool collects the generator's models and their single-station lifts whose
// truncation stays listed.
FilterApprox make_filter(const Universe& u, int theta, std::vector<SideCondition> chain);

// Membership in the filter approximation: the generator extends it.
bool filter_contains(const Universe& u, const FilterApprox& h, const SideCondition& s);

struct FilterConfig {
    SimulatorConfig base;    // growth schedule; indices must lie below the station
    int model_moves = 2;     // scheduled model additions along the chain
    std::uint64_t seed = 1;  // drives the model moves
};

// Builds a descending chain inside the station hull: carriers grow to every
// height under the bound, committed pairs get shared witnesses and land at
// the scheduled round, and model additions enter an ascending tower. Every
// step is certified; starved requirements throw OverflowError.
FilterApprox simulate_ptheta_filter(const Universe& u, int theta, const FilterConfig& cfg);

// Bounded compatibility with the filter approximation: searches for a common
// extension of the condition and the generator (componentwise union first,
// then the projection-transfer route). Exhaustion reports false honestly.
// On success the condition's projection is certified compatible with the
// generator inside the hull.
bool quotient_membership(const Universe& u, const SideCondition& p, const FilterApprox& h);

// Adjoins a pool model to a projectable quotient member and certifies the
// result stays in the quotient: transfers the generator over the condition,
// adjoins the model to the transfer, and validates the combined condition
// below both the generator and the grown condition. pre: projectable member
// of the quotient with a nonempty model list, pool model containing the
// condition, its station marker listed, the generator extending the
// condition's projection and listing the model's truncation.
SideAmalgamResult quotient_add_model(const Universe& u, const SideCondition& p,
                                     const ModelSet& n, int theta, const FilterApprox& h);

// --- centered selections over the quotient -------------------------------

struct QuotientPoolEntry {
    SideCondition q;
    ModelSet n;
};

struct MultiAmalgamResult {
    bool found = false;
    std::vector<std::size_t> picks;  // chosen entry per pool
    SideAmalgamResult amalgam;
    std::string log;
};

// Selects matched representatives across the pools (equal extended
// fingerprints, ascending designated traces, nested hulls, private node
// blocks pairwise incomparable in the filter tree — checked through the
// tree-level incomparable-family finder), amalgamates them, and certifies
// the result stays in the quotient. Honest failure when no selection
// exists: the finite filter tree may wire every candidate's private block
// onto one chain.
MultiAmalgamResult quotient_multi_amalgamate(
    const Universe& u, const std::vector<std::vector<QuotientPoolEntry>>& pools,
    const FilterApprox& h);

} // namespace treelab
