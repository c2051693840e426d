#pragma once

#include <string>
#include <vector>

#include "treelab/base_condition.hpp"
#include "treelab/quotient.hpp"
#include "treelab/rng.hpp"
#include "treelab/side.hpp"
#include "treelab/universe.hpp"

namespace treelab {

// ---- trees ----

struct TreeGenConfig {
    int extra_nodes = 12;  // nodes beyond the root
    bool graded = true;    // children sit one height above parents: closure and
                           // minimal splits hold by construction
    int max_jump = 3;      // sparse growth may skip up to this many heights
};

// Standard finite tree; graded trees pass all three validate_tree flags.
FiniteTree gen_tree(Rng& rng, const TreeGenConfig& cfg = {});

// A tree whose named validate_tree clause fails. Other clauses may also fail;
// the contract is only that the named one does.
// clause: "domain", "root", "linearity", "monotone", "closure", "splits".
FiniteTree gen_tree_mutant(Rng& rng, const std::string& clause);

// ---- base conditions ----

struct BaseGenConfig {
    int extra_nodes = 8;
    int indices = 3;   // countable index count
    int stations = 0;  // station index count
    int commitments = 1;
    bool graded = false;
    double carrier_density = 0.5;
};

// Valid base condition: random tree, downward-closed carriers, commitments
// drawn from the domain.
BaseCondition gen_base(Rng& rng, const BaseGenConfig& cfg = {});

// ---- split families ----

struct SplitFamilyConfig {
    int d = 2;
    int shared_extra_nodes = 5;  // shared restriction tree size beyond the root
    int private_chains = 2;      // per part: fresh chains above the shared part
    int private_chain_len = 2;
    int root_indices = 2;   // sunflower root size
    int private_indices = 1;  // per part
    int commitments = 1;      // per part
};

struct SplitFamily {
    std::vector<BaseCondition> parts;
    std::vector<Ordinal> deltas;  // strictly ascending split levels, one per part
};

// Translated copies: a common restriction below the first level plus a private
// template repeated above each part's level, so every pair is split at the
// matching levels and the domains form a sunflower.
SplitFamily gen_split_family(Rng& rng, const SplitFamilyConfig& cfg = {});

// ---- model universes ----

// Seeded universe with a valid station pattern. The top station is always a
// cut, and cut stations are kept off the club, so default models (which close
// their traces under the club) never carry a cut station.
Universe gen_universe(Rng& rng, int stations = 8);

struct ModelGenConfig {
    int max_stations = 3;  // stations drawn before trace closure
    bool allow_cut_stations = false;
};

// Valid model: trace from the allocation table, stations closed under the
// club clause. By default the station pool excludes cut stations.
ModelSet gen_model(Rng& rng, const Universe& u, const ModelGenConfig& cfg = {});

// Adequate set built as a nested tower (strictly ascending traces, growing
// stations) enriched with cut truncations; every addition is re-certified.
std::vector<ModelSet> gen_adequate_set(Rng& rng, const Universe& u, int count,
                                       const ModelGenConfig& cfg = {});

// Planted instance whose hypotheses hold for the named union profile
// (the same names union_adequacy_check accepts).
UnionCheckInput gen_union_check_instance(Rng& rng, const Universe& u,
                                         const std::string& profile);

// ---- side conditions ----

// Valid decorated condition: adequate model list, countable indices lifted
// above every hull so the separation clause is vacuous, optionally one low
// index whose carrier stays at the root.
SideCondition gen_side(Rng& rng, const Universe& u);

struct SideFamily {
    std::vector<SideCondition> parts;
    std::vector<ModelSet> designated;  // one listed model per part, traces ascending
};

// Translated copies over ascending designated models: equal fingerprints and
// each part inside every later hull. Built from a split-family template, so
// the parts amalgamate by construction.
SideFamily gen_fingerprint_family(Rng& rng, const Universe& u, int count);

struct ReflectInstance {
    SideCondition q;
    ModelSet n;
};

// Planted reflection instance: the condition's data below the designated
// trace fits under the first allocation trace, so the hull search always
// recovers a witness.
ReflectInstance gen_reflect_instance(Rng& rng, const Universe& u);

// ---- quotient scenarios ----

// Universe whose geometry supports the station-quotient machinery: clubs only
// at the two lowest stations, an interior cut, a late reflection cut with
// spare plain stations on both sides (room for mirror images below, models
// above), and a top cut so models sharing a high station still compare.
Universe gen_quotient_universe(Rng& rng);

// Planted condition that projects at the station: a low graded tree, one high
// index sharing its carrier with a low one, and one high model whose
// truncation is also listed. Certified projectable before returning.
// errors: PreconditionError when the station is not a reflection cut.
SideCondition gen_dtheta_member(Rng& rng, const Universe& u, int theta);

struct QuotientScenario {
    int theta = -1;
    std::vector<SideCondition> chain;  // descending, ready for make_filter
    std::vector<std::vector<QuotientPoolEntry>> pools;
};

// Fingerprint-matched pools over a filter approximation: translated parts
// with one designated low model each, their certified amalgam as the filter
// generator. Every pool entry passes the bounded membership check.
QuotientScenario gen_quotient_scenario(Rng& rng, const Universe& u);

} // namespace treelab
