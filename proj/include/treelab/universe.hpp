#pragma once

// Finite surrogate of the side-condition ground structure: a universe of
// station points with club/cofinality attributes, countable models carried as
// (trace ordinal, station set) pairs, support-based hulls standing in for
// Skolem closures, comparison points, adequacy, and the closure operations
// the side-condition forcings consume. True elementarity is not claimed:
// theorem-level facts are checked conditionally and failures surface as
// fidelity errors rather than being repaired.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "treelab/base_condition.hpp"
#include "treelab/errors.hpp"
#include "treelab/ordinal.hpp"
#include "treelab/tree.hpp"
#include "treelab/upoint.hpp"

namespace treelab {

struct StationInfo {
    bool in_lambda0 = false;  // hull-fixed-point club member
    bool cof_gt_omega = false;
    bool in_lambda = false;   // cut point: uncountable-cofinality limit of the club
    bool in_sigma = false;    // reflection stage
};

struct UniverseConfig {
    int stations = 6;
    std::vector<StationInfo> pattern; // explicit; empty = seeded random
    std::uint64_t seed = 1;
    std::vector<Ordinal> deltas;      // model-trace allocation; empty = defaults
};

// Immutable attribute table over finitely many stations, plus the split-level
// allocation table model traces draw from and a canonical deterministic order
// on serialized objects (used where a least witness must be chosen).
class Universe {
public:
    int station_count() const { return static_cast<int>(stations_.size()); }
    // pre: 0 <= i < station_count.
    const StationInfo& station(int i) const;

    std::vector<int> lambda0() const;
    std::vector<int> lambda() const;
    std::vector<int> sigma() const;
    const std::vector<Ordinal>& deltas() const { return deltas_; }

    friend Universe build_universe(const UniverseConfig& cfg);

private:
    std::vector<StationInfo> stations_;
    std::vector<Ordinal> deltas_;
};

// Deterministic construction; validates the attribute pattern.
// errors: PreconditionError on zero stations, empty cut set, empty reflection
// set, or a cut station lacking uncountable cofinality / two club stations
// below it (the finite reading of "limit point").
Universe build_universe(const UniverseConfig& cfg);

// Countable model surrogate: the countable trace is the initial segment below
// delta (a split level), the uncountable part a finite station set.
struct ModelSet {
    Ordinal delta;              // in C_h
    std::vector<int> stations;  // sorted unique station indices

    friend bool operator==(const ModelSet& a, const ModelSet& b) {
        return a.delta == b.delta && a.stations == b.stations;
    }
    friend bool operator!=(const ModelSet& a, const ModelSet& b) { return !(a == b); }
    friend bool operator<(const ModelSet& a, const ModelSet& b) {
        if (a.delta != b.delta) return a.delta < b.delta;
        return a.stations < b.stations;
    }
};

// "" when valid: delta a split level below the ceiling, stations in range and
// sorted unique, and for every station the largest club station below it (if
// any) is also carried — the trace-closure clause.
std::string model_violation(const Universe& u, const ModelSet& m);

// Componentwise intersection: min of traces, common stations.
ModelSet model_intersect(const ModelSet& a, const ModelSet& b);
// Cut below a station: stations strictly below it, trace unchanged (the
// countable trace sits below every station).
ModelSet model_truncate(const ModelSet& m, int cut_station);

// Smallest superset of the stations satisfying the trace-closure clause:
// adds the largest club station below each carried station, recursively.
std::vector<int> close_trace(const Universe& u, std::vector<int> stations);

std::string canonical_key(const ModelSet& m);

// ---- support hulls ----

// Transitive support of a finite artifact value: the countable ordinals and
// stations it mentions. Zero is the distinguished constant and needs no
// support.
struct Support {
    NodeSet countables;
    std::vector<int> stations;
};

void collect_support(const Ordinal& x, Support& s);
void collect_support(const UOrd& u, Support& s);
void collect_support(const UPair& p, Support& s);
void collect_support(const NodeSet& xs, Support& s);
void collect_support(const FiniteTree& t, Support& s);
void collect_support(const BaseCondition& c, Support& s);
void collect_support(const ModelSet& m, Support& s);

template <class T>
Support support_of(const T& obj) {
    Support s;
    collect_support(obj, s);
    return s;
}

// Hull membership: every countable atom below the model's trace, every
// station atom carried by the model.
bool sk_contains(const ModelSet& n, const Support& s);
template <class T>
bool sk_contains(const ModelSet& n, const T& obj) {
    return sk_contains(n, support_of(obj));
}

// Hull below a station cut: countable atoms are unrestricted (they all sit
// below every station), station atoms must lie strictly below the cut.
bool sk_cut_contains(int cut_station, const Support& s);
template <class T>
bool sk_cut_contains(int cut_station, const T& obj) {
    return sk_cut_contains(cut_station, support_of(obj));
}

// ---- comparison and adequacy ----

// Least cut station at or above the top shared point of the two models
// (their common stations if any; otherwise the shared countable trace, which
// sits below every station). Symmetric.
// errors: OverflowError when no cut station qualifies (universe too small).
UOrd comparison_point(const Universe& u, const ModelSet& a, const ModelSet& b);

enum class ModelRel { LT, GT, SIM };

struct PairClass {
    std::size_t i = 0, j = 0;
    ModelRel rel = ModelRel::SIM;
};

struct AdequacyReport {
    bool ok = true;
    std::vector<PairClass> pairs; // classification of each i<j pair when ok
    std::vector<std::string> violations;
};

// Every pair must truncate into the other's hull (one way or the other) or
// truncate equally at its comparison point; the classification is also
// cross-checked against the trace order, and disagreement is reported as a
// violation rather than repaired.
AdequacyReport is_adequate(const Universe& u, const std::vector<ModelSet>& a);

// Is every intersection with n of a strictly-lower model already present?
// pre: models is adequate and contains n.
bool is_model_closed(const Universe& u, const std::vector<ModelSet>& models, const ModelSet& n);
// Is every cut below the station already present? pre: models adequate.
bool is_cut_closed(const Universe& u, const std::vector<ModelSet>& models, int cut_station);

// Adds every intersection with n of a strictly-lower model. The output is
// re-certified adequate and closed under n; a failed certificate is a
// fidelity error, as is any sampled pair where the intersection differs from
// the comparison-point cut (the intersection law).
// pre: a adequate and containing n, else PreconditionError.
std::vector<ModelSet> close_model(const Universe& u, const std::vector<ModelSet>& a,
                                  const ModelSet& n);

// Adds every cut below the station. Re-certified adequate and cut-closed;
// when the input was closed under some of its models, the output must still
// be — the moreover clause — and a failure is a fidelity error.
// pre: a adequate, station a cut point, else PreconditionError.
std::vector<ModelSet> close_cut(const Universe& u, const std::vector<ModelSet>& a,
                                int cut_station);

// ---- conditional union laws ----

struct UnionCheckInput {
    std::vector<std::vector<ModelSet>> sets;
    std::vector<ModelSet> models;
    std::vector<int> cuts;
};

struct UnionCheckVerdict {
    bool hypotheses_hold = false;
    bool conclusion_checked = false; // only when hypotheses hold
    bool conclusion_holds = false;
    std::string detail;
};

// Conditional-property harness for the union laws. Profiles:
//   hull-member-join:    sets[0] adequate inside hull(models[0]) -> union
//                        with the model adequate
//   truncation-superset: sets[1] extends sets[0] by cuts of its members ->
//                        sets[1] adequate
//   model-closed-union:  sets[0] closed under models[0], sets[1] between
//                        sets[0]'s hull part and the hull -> union adequate
//   chain-union:         sets[i] closed under models[i-1], consecutive hull
//                        sandwich -> full union adequate
//   cut-closed-union:    like model-closed-union with a station cut
//   cut-trace-join:      sets[0] inside the cut hull carrying models[0]'s cut
//                        -> union with the model adequate
// Hypotheses are verified first; when they fail the conclusion is not
// asserted. A hypotheses-true/conclusion-false instance is reported in the
// verdict (the caller decides whether that is fatal).
// errors: PreconditionError on a malformed profile or missing inputs.
UnionCheckVerdict union_adequacy_check(const Universe& u, const std::string& profile,
                                       const UnionCheckInput& in);

} // namespace treelab
