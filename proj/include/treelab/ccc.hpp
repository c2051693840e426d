#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "treelab/base_condition.hpp"

namespace treelab {

// Symmetric separator table on index pairs, total via a fallback value. The
// values live in the same ordinal segment as node heights; the working
// ceiling itself serves as the "top" value that bounds every height.
class EFunction {
public:
    EFunction() : fallback_(default_ceiling()) {}
    explicit EFunction(Ordinal fallback) : fallback_(std::move(fallback)) {}

    // pre: a != b. Overwrites.
    void set(const UOrd& a, const UOrd& b, Ordinal v);
    // Symmetric lookup; fallback off the table. pre: a != b.
    const Ordinal& at(const UOrd& a, const UOrd& b) const;

    const std::map<UPair, Ordinal>& table() const { return table_; }
    const Ordinal& fallback() const { return fallback_; }

    friend bool operator==(const EFunction& a, const EFunction& b) {
        return a.fallback_ == b.fallback_ && a.table_ == b.table_;
    }

private:
    std::map<UPair, Ordinal> table_;
    Ordinal fallback_;
};

// Separation: distinct eta, xi in the domain can share a carrier node x only
// when the separator value at the pair bounds its height from above.
// The violation text is empty when separated.
std::string e_separation_violation(const std::map<UOrd, NodeSet>& subtrees, const EFunction& e);
bool is_e_separated(const std::map<UOrd, NodeSet>& subtrees, const EFunction& e);

// Base validity plus separation: membership in the separated suborder.
BaseReport validate_pprime(const BaseCondition& c, const EFunction& e);

// One family = a list of pairwise disjoint finite index sets.
using IndexFamily = std::vector<std::vector<UOrd>>;

struct WeakRhoReport {
    bool ok = true;
    std::size_t family = 0; // first failing family when !ok
    Ordinal gamma;          // and the threshold it fails at
    std::string detail;
};

// Finite reinterpretation of the weak separation property: for every family
// and every threshold, some ordered pair of blocks separates entirely at that
// threshold. pre: each family pairwise disjoint, else PreconditionError.
WeakRhoReport verify_weak_rho(const EFunction& e, const std::vector<IndexFamily>& families,
                              const std::vector<Ordinal>& gammas);

struct WeakRhoSpec {
    std::string kind = "constant-top"; // constant-top | random | adversarial-small
    std::uint64_t seed = 1;            // random
    double top_probability = 0.9;      // random: chance a pair gets the top value
    std::vector<UOrd> universe;        // pairs the table is materialized on
};

// Separator generators. Only constant-top passes verify_weak_rho on every
// input; random tables are reproducible from the seed; adversarial-small is
// constantly zero and fails on any two nonempty blocks at threshold one.
EFunction make_weak_rho(const WeakRhoSpec& spec);

struct CompatResult {
    bool found = false;
    std::size_t i = 0, j = 0;   // input positions, i < j
    BaseCondition amalgam;
    Ordinal level_low, level_high; // split levels used, low side first
    std::string failed_stage;      // empty on success
    std::vector<std::string> log;  // stage narration
};

// Pairwise-compatibility search: (i) bucket each condition's restriction
// signatures over candidate split levels, (ii) extract domain sunflowers
// inside a bucket, (iii) stabilize root positions and compute the separator
// bound, (iv) scan pairs whose cross separator values clear the bound; the
// winning pair is re-checked as a split pair, amalgamated, certified, and the
// amalgam re-checked for separation. Failure reports the deepest stage
// reached; a finite input may genuinely lack a pair.
// pre: every condition valid and separated, else PreconditionError.
CompatResult find_compatible_pair(const std::vector<BaseCondition>& conds, const EFunction& e);

// Density moves. Each returns a strengthening of the input; carriers change
// only by absorbing fresh nodes below members they already have, which keeps
// them separated and keeps committed intersections bounded.
// Fresh node below x at height alpha (alpha < h(x), not realized on x's chain).
BaseCondition extend_below(const BaseCondition& p, const Ordinal& x, const Ordinal& alpha);
// Fresh maximal node above x at height beta > h(x).
BaseCondition extend_above(const BaseCondition& p, const Ordinal& x, const Ordinal& beta);
// Grows the named carrier (and if needed the tree) until it has a node at the
// target height. Fresh nodes only; a fresh node reaches another carrier only
// through downward closure below one of its members, so every pairwise
// intersection that already had members stays bounded by them. A committed
// pair must not still have an empty carrier (growing one would unfreeze its
// empty intersection); the simulator's schedule never produces that state.
BaseCondition grow_subtree(const BaseCondition& p, const UOrd& eta, const Ordinal& alpha);
// Adds the pair to the commitment set, extending the domain with empty
// carriers when needed. pre: eta != xi.
BaseCondition commit_pair(const BaseCondition& p, const UOrd& eta, const UOrd& xi);

struct SimulatorConfig {
    std::vector<UOrd> indices;  // carriers scheduled for growth
    int height_bound = 4;       // realize heights 0..height_bound-1
    std::vector<UPair> pairs;   // commitments to schedule
    int commit_round = 0;       // 0 = before growth; k = after k full rounds
    bool seed_shared_nodes = true; // give each committed pair a shared node
                                   // first, when the separator allows one
    bool widen_subtrees = true; // give each carrier a split, so derived
                                // triple families are nonempty
    int max_rounds = 50;
};

struct GenericApprox {
    std::vector<BaseCondition> chain; // strictly descending, first = weakest
    FiniteTree tree;                  // components of the last element
    std::map<UOrd, NodeSet> subtrees;
    std::vector<UPair> commitments;
    std::vector<std::string> log;
};

// Bounded generic-filter simulator: round-robin over normalization,
// below/above tree extension for every node and height under the bound,
// carrier growth to every height under the bound, and pair commitment.
// Every chain element is validated and separated, and every step descends;
// a violation throws FidelityError. An unmet requirement after max_rounds
// throws OverflowError naming it.
GenericApprox simulate_generic_pprime(const SimulatorConfig& cfg, const EFunction& e);

struct PairCertificate {
    UPair pair;
    bool committed = false;
    std::size_t commit_index = 0; // chain position of the committing element
    NodeSet generators;           // shared carrier nodes at commitment time
    bool certified = false;       // every final shared node bounded by one
    int max_antichain = 0;        // inside the final shared set
    std::string note;
};

struct StrongAdReport {
    std::vector<PairCertificate> pairs; // all domain pairs of the final element
    bool all_committed_certified = true;
};

// Finite generation check: for each committed pair, every shared carrier node
// of the final approximation must sit below one of the finitely many shared
// nodes present when the pair was committed. In a tree order the maximum
// antichain of a finite set equals its number of maximal elements (any
// antichain maps injectively to maximal elements above it along linear
// predecessor chains), which gives the reported antichain width.
StrongAdReport check_strong_almost_disjoint(const GenericApprox& g);

struct TripleFamilyReport {
    // For each index: all {x, y, z} with y, z distinct immediate successors
    // of x inside the carrier. Triples sorted, families sorted.
    std::map<UOrd, std::vector<NodeSet>> families;
    // |families[a] n families[b]| for each domain pair a < b.
    std::vector<std::tuple<UOrd, UOrd, std::size_t>> pair_sizes;
};

// Derives the almost-disjoint family of triples carried by splitting nodes.
TripleFamilyReport derive_triple_family(const FiniteTree& t,
                                        const std::map<UOrd, NodeSet>& subtrees);

} // namespace treelab
