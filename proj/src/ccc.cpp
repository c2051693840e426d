#include "treelab/ccc.hpp"

#include <algorithm>
#include <set>

#include "treelab/rng.hpp"
#include "treelab/set_util.hpp"

namespace treelab {

void EFunction::set(const UOrd& a, const UOrd& b, Ordinal v) {
    table_[make_upair(a, b)] = std::move(v);
}

const Ordinal& EFunction::at(const UOrd& a, const UOrd& b) const {
    auto it = table_.find(make_upair(a, b));
    return it == table_.end() ? fallback_ : it->second;
}

std::string e_separation_violation(const std::map<UOrd, NodeSet>& subtrees, const EFunction& e) {
    for (auto i = subtrees.begin(); i != subtrees.end(); ++i) {
        for (auto j = std::next(i); j != subtrees.end(); ++j) {
            for (const auto& x : sv_intersect(i->second, j->second)) {
                if (e.at(i->first, j->first) < height_of(x))
                    return "carriers of " + i->first.str() + "," + j->first.str() +
                           " share " + x.str() + " above their separator value " +
                           e.at(i->first, j->first).str();
            }
        }
    }
    return "";
}

bool is_e_separated(const std::map<UOrd, NodeSet>& subtrees, const EFunction& e) {
    return e_separation_violation(subtrees, e).empty();
}

BaseReport validate_pprime(const BaseCondition& c, const EFunction& e) {
    BaseReport rep = validate_base(c);
    std::string v = e_separation_violation(c.subtrees, e);
    if (!v.empty()) {
        rep.ok = false;
        rep.violations.push_back(v);
    }
    return rep;
}

WeakRhoReport verify_weak_rho(const EFunction& e, const std::vector<IndexFamily>& families,
                              const std::vector<Ordinal>& gammas) {
    for (std::size_t f = 0; f < families.size(); ++f) {
        std::vector<std::vector<UOrd>> blocks;
        for (const auto& b : families[f]) blocks.push_back(sv_sorted(b));
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            for (std::size_t j = i + 1; j < blocks.size(); ++j) {
                if (!sv_intersect(blocks[i], blocks[j]).empty())
                    throw PreconditionError("verify_weak_rho: family " + std::to_string(f) +
                                            " blocks " + std::to_string(i) + "," +
                                            std::to_string(j) + " overlap");
            }
        }
    }

    WeakRhoReport rep;
    for (std::size_t f = 0; f < families.size(); ++f) {
        const IndexFamily& fam = families[f];
        // The infinitary property quantifies over length-omega_1 sequences;
        // a list too short to contain a block pair carries no content.
        if (fam.size() < 2) continue;
        for (const auto& gamma : gammas) {
            bool found = false;
            for (std::size_t i = 0; i < fam.size() && !found; ++i) {
                for (std::size_t j = i + 1; j < fam.size() && !found; ++j) {
                    bool all = true;
                    for (const auto& eta : fam[i]) {
                        for (const auto& xi : fam[j]) {
                            if (e.at(eta, xi) < gamma) {
                                all = false;
                                break;
                            }
                        }
                        if (!all) break;
                    }
                    if (all) found = true;
                }
            }
            if (!found) {
                rep.ok = false;
                rep.family = f;
                rep.gamma = gamma;
                rep.detail = "family " + std::to_string(f) +
                             ": no block pair separates at threshold " + gamma.str();
                return rep;
            }
        }
    }
    return rep;
}

EFunction make_weak_rho(const WeakRhoSpec& spec) {
    if (spec.kind == "constant-top") return EFunction(default_ceiling());
    if (spec.kind == "adversarial-small") return EFunction(Ordinal());
    if (spec.kind == "random") {
        EFunction e{Ordinal()};
        Rng rng(spec.seed);
        for (std::size_t i = 0; i < spec.universe.size(); ++i) {
            for (std::size_t j = i + 1; j < spec.universe.size(); ++j) {
                Ordinal v = rng.chance(spec.top_probability)
                                ? default_ceiling()
                                : omega_times(Ordinal::nat(rng.below(3))) +
                                      Ordinal::nat(rng.below(4));
                e.set(spec.universe[i], spec.universe[j], std::move(v));
            }
        }
        return e;
    }
    throw PreconditionError("make_weak_rho: unknown kind " + spec.kind);
}

namespace {

Ordinal level_of(std::uint64_t t) {
    return t == 0 ? Ordinal() : Ordinal::omega_pow(Ordinal::omega(), t);
}

// pre: lv = 0 or w^w * m (which is all next_split_level produces below the
// default ceiling).
std::uint64_t level_index(const Ordinal& lv) {
    if (lv.is_zero()) return 0;
    return lv.terms().front().second;
}

std::string tree_sig(const FiniteTree& t) {
    std::string s;
    for (const auto& x : t.nodes()) s += x.str() + ";";
    s += "|";
    for (const auto& [a, b] : t.pairs()) s += a.str() + "<" + b.str() + ";";
    return s;
}

std::string nodeset_sig(const NodeSet& w) {
    std::string s;
    for (const auto& x : w) s += x.str() + ";";
    return s;
}

std::string uords_sig(const std::vector<UOrd>& us) {
    std::string s;
    for (const auto& u : us) s += u.str() + ";";
    return s;
}

} // namespace

CompatResult find_compatible_pair(const std::vector<BaseCondition>& conds, const EFunction& e) {
    CompatResult out;
    for (std::size_t k = 0; k < conds.size(); ++k) {
        BaseReport rep = validate_pprime(conds[k], e);
        if (!rep.ok)
            throw PreconditionError("find_compatible_pair: condition " + std::to_string(k) +
                                    ": " + rep.violations.front());
    }
    if (conds.size() < 2) {
        out.failed_stage = "stage (i): fewer than two conditions";
        return out;
    }

    // Candidate split levels w^w * t, one past the least level containing
    // every node, so the top restriction class always has two usable levels.
    Ordinal global_max;
    for (const auto& c : conds) {
        if (!c.tree.empty() && global_max < c.tree.nodes().back())
            global_max = c.tree.nodes().back();
    }
    std::uint64_t tmax = 1;
    while (!(global_max < level_of(tmax))) ++tmax;
    ++tmax;

    std::vector<std::vector<UOrd>> doms;
    doms.reserve(conds.size());
    for (const auto& c : conds) doms.push_back(domain_of(c));

    // Stage (i): signature buckets. The signature of a condition at a level is
    // its restriction tree, its domain size, and the position-wise carrier
    // traces; equal signatures occupy a contiguous level interval because
    // restrictions and traces only grow with the level.
    struct Range {
        std::uint64_t lo, hi;
    };
    std::map<std::string, std::map<std::size_t, Range>> buckets;
    for (std::size_t k = 0; k < conds.size(); ++k) {
        // Level 0 only seats empty trees: a nonempty standard tree contains
        // the root, so two of them can never have empty intersection.
        for (std::uint64_t t = conds[k].tree.empty() ? 0 : 1; t <= tmax; ++t) {
            Ordinal lv = level_of(t);
            std::string sig = tree_sig(restrict_tree(conds[k].tree, lv)) +
                              "#n=" + std::to_string(doms[k].size());
            for (const auto& eta : doms[k]) {
                NodeSet tr;
                for (const auto& x : subtree_of(conds[k], eta)) {
                    if (x < lv) tr.push_back(x);
                }
                sig += "#w:" + nodeset_sig(tr);
            }
            auto& members = buckets[sig];
            auto it = members.find(k);
            if (it == members.end())
                members[k] = {t, t};
            else
                it->second.hi = t;
        }
    }

    int deepest = 0;
    for (const auto& [sig, members] : buckets) {
        if (members.size() < 2) continue;
        if (deepest < 1) {
            deepest = 1;
            out.log.push_back("stage (i): bucket with " + std::to_string(members.size()) +
                              " conditions");
        }
        std::vector<std::size_t> K;
        for (const auto& [k, rg] : members) K.push_back(k);
        FiniteTree T = restrict_tree(conds[K.front()].tree,
                                     level_of(members.at(K.front()).lo));

        // Stage (ii): domain sunflowers, one candidate root per distinct
        // pairwise intersection, grown greedily in index order.
        std::set<std::string> seen_roots;
        for (std::size_t a = 0; a < K.size(); ++a) {
            for (std::size_t b = a + 1; b < K.size(); ++b) {
                std::vector<UOrd> root = sv_intersect(doms[K[a]], doms[K[b]]);
                if (!seen_roots.insert(uords_sig(root)).second) continue;
                std::vector<std::size_t> family;
                for (std::size_t k : K) {
                    bool fits = true;
                    for (std::size_t m : family) {
                        if (sv_intersect(doms[k], doms[m]) != root) {
                            fits = false;
                            break;
                        }
                    }
                    if (fits) family.push_back(k);
                }
                if (family.size() < 2) continue;
                if (deepest < 2) {
                    deepest = 2;
                    out.log.push_back("stage (ii): sunflower of " +
                                      std::to_string(family.size()) + " domains, root {" +
                                      uords_sig(root) + "}");
                }

                // Stage (iii): stabilize the root positions; conditions whose
                // root elements occupy the same sorted-domain positions carry
                // them with equal values. Then bound the shared content: the
                // separator bound exceeds the common restriction tree and
                // every sub-top separator value on the root (top values are
                // excluded — the clause they control is re-checked directly
                // on each candidate pair).
                std::map<std::string, std::vector<std::size_t>> groups;
                for (std::size_t k : family) {
                    std::string xs;
                    for (std::size_t pos = 0; pos < doms[k].size(); ++pos) {
                        if (sv_contains(root, doms[k][pos])) xs += std::to_string(pos) + ",";
                    }
                    groups[xs].push_back(k);
                }
                Ordinal zmax;
                for (const auto& x : T.nodes()) {
                    if (zmax < x) zmax = x;
                }
                for (std::size_t ri = 0; ri < root.size(); ++ri) {
                    for (std::size_t rj = ri + 1; rj < root.size(); ++rj) {
                        const Ordinal& v = e.at(root[ri], root[rj]);
                        if (v < default_ceiling()) {
                            if (zmax < v) zmax = v;
                        }
                    }
                }
                Ordinal zeta = next_split_level(zmax);
                std::uint64_t tz = level_index(zeta);

                for (const auto& [xs, group] : groups) {
                    if (group.size() < 2) continue;
                    std::vector<std::size_t> survivors;
                    for (std::size_t k : group) {
                        if (std::max(members.at(k).lo, tz) <= members.at(k).hi)
                            survivors.push_back(k);
                    }
                    if (survivors.size() < 2) continue;
                    if (deepest < 3) {
                        deepest = 3;
                        out.log.push_back("stage (iii): " + std::to_string(survivors.size()) +
                                          " conditions above the bound " + zeta.str());
                    }

                    // Stage (iv): ordered pairs at their maximal usable levels
                    // (clause 4 of the split predicate only relaxes as the
                    // levels grow within a signature class).
                    for (std::size_t ka : survivors) {
                        for (std::size_t kb : survivors) {
                            if (ka == kb) continue;
                            std::uint64_t th = members.at(kb).hi;
                            std::uint64_t tl = std::min(members.at(ka).hi, th - 1);
                            if (tl < std::max(members.at(ka).lo, tz)) continue;
                            if (th < std::max(members.at(kb).lo, tz)) continue;
                            Ordinal dl = level_of(tl), dh = level_of(th);
                            if (!conds[ka].tree.empty() &&
                                !(conds[ka].tree.nodes().back() < dh))
                                continue;
                            if (deepest < 4) deepest = 4;

                            std::vector<UOrd> pa = sv_difference(doms[ka], root);
                            std::vector<UOrd> pb = sv_difference(doms[kb], root);
                            bool clear = true;
                            for (const auto& eta : pa) {
                                for (const auto& xi : pb) {
                                    if (e.at(eta, xi) < zeta) {
                                        clear = false;
                                        break;
                                    }
                                }
                                if (!clear) break;
                            }
                            if (!clear) {
                                out.log.push_back("pair (" + std::to_string(ka) + "," +
                                                  std::to_string(kb) +
                                                  "): cross separator under the bound");
                                continue;
                            }

                            std::string sv = split_pair_violation(conds[ka], conds[kb], dl, dh);
                            if (!sv.empty()) {
                                out.log.push_back("pair (" + std::to_string(ka) + "," +
                                                  std::to_string(kb) + "): " + sv);
                                continue;
                            }
                            AmalgamResult am =
                                amalgamate_split_family({conds[ka], conds[kb]}, {dl, dh});
                            std::string ev = e_separation_violation(am.condition.subtrees, e);
                            if (!ev.empty()) {
                                out.log.push_back("pair (" + std::to_string(ka) + "," +
                                                  std::to_string(kb) + "): amalgam: " + ev);
                                continue;
                            }
                            out.found = true;
                            out.i = std::min(ka, kb);
                            out.j = std::max(ka, kb);
                            out.amalgam = am.condition;
                            out.level_low = dl;
                            out.level_high = dh;
                            out.log.push_back("stage (iv): split pair (" + std::to_string(ka) +
                                              "," + std::to_string(kb) + ") at levels " +
                                              dl.str() + " < " + dh.str() +
                                              "; amalgam certified and separated");
                            return out;
                        }
                    }
                }
            }
        }
    }

    switch (deepest) {
    case 0: out.failed_stage = "stage (i): no two conditions share a restriction signature"; break;
    case 1: out.failed_stage = "stage (ii): no bucket carries a domain sunflower"; break;
    case 2: out.failed_stage = "stage (iii): root positions or the separator bound starved "
                               "every sunflower";
        break;
    default: out.failed_stage = "stage (iv): separation scan exhausted without a certified pair";
    }
    return out;
}

// ---- density moves ----

BaseCondition extend_below(const BaseCondition& p, const Ordinal& x, const Ordinal& alpha) {
    BaseCondition q = p;
    insert_node_below(q.tree, x, alpha);
    // Carriers holding anything above the fresh node must absorb it to stay
    // downwards closed; every new shared member is bounded by an old shared
    // member on the same chain, so separation and commitments survive.
    for (auto& [eta, w] : q.subtrees) w = downward_closure_in(q.tree, w);
    return q;
}

BaseCondition extend_above(const BaseCondition& p, const Ordinal& x, const Ordinal& beta) {
    BaseCondition q = p;
    insert_node_above(q.tree, x, beta);
    return q;
}

BaseCondition grow_subtree(const BaseCondition& p, const UOrd& eta, const Ordinal& alpha) {
    BaseCondition q = p;
    if (q.tree.empty()) q.tree.add_node(Ordinal());
    NodeSet& w = q.subtrees[eta];
    if (w.empty()) sv_insert(w, Ordinal());
    for (const auto& x : w) {
        if (height_of(x) == alpha) return q;
    }
    Ordinal hmax = height_of(w.back());
    if (hmax < alpha) {
        // Grow upward from the least node of maximal height.
        for (const auto& x : w) {
            if (height_of(x) == hmax) {
                Ordinal z = insert_node_above(q.tree, x, alpha);
                sv_insert(w, z);
                return q;
            }
        }
    }
    // The target height is skipped inside the carrier; since the carrier is
    // downwards closed, the chain below its least node above the target skips
    // that height in the tree as well, so a fresh node fits there.
    for (const auto& x : w) {
        if (alpha < height_of(x)) {
            Ordinal xcopy = x; // closure below mutates the carrier vector
            Ordinal z = insert_node_below(q.tree, xcopy, alpha);
            sv_insert(q.subtrees[eta], z);
            for (auto& [other, ow] : q.subtrees) ow = downward_closure_in(q.tree, ow);
            return q;
        }
    }
    throw FidelityError("grow_subtree: unreachable carrier state");
}

BaseCondition commit_pair(const BaseCondition& p, const UOrd& eta, const UOrd& xi) {
    BaseCondition q = p;
    UPair pr = make_upair(eta, xi);
    q.subtrees[pr.first];
    q.subtrees[pr.second];
    sv_insert(q.commitments, pr);
    return q;
}

// ---- generic-filter simulator ----

GenericApprox simulate_generic_pprime(const SimulatorConfig& cfg, const EFunction& e) {
    if (cfg.height_bound < 1)
        throw PreconditionError("simulate_generic_pprime: height bound must be at least 1");

    GenericApprox g;
    BaseCondition start;
    start.tree.add_node(Ordinal());
    for (const auto& eta : cfg.indices) start.subtrees[eta] = {Ordinal()};
    g.chain.push_back(std::move(start));
    g.log.push_back("start: root with " + std::to_string(cfg.indices.size()) + " carriers");

    auto step = [&](BaseCondition next, const std::string& what) {
        BaseReport rep = validate_pprime(next, e);
        if (!rep.ok)
            throw FidelityError("simulate: step '" + what + "' left the separated order: " +
                                rep.violations.front());
        if (!leq_base(next, g.chain.back()))
            throw FidelityError("simulate: step '" + what + "' does not extend its predecessor");
        if (next == g.chain.back()) return;
        g.chain.push_back(std::move(next));
        g.log.push_back(what);
    };

    auto commit_all = [&]() {
        if (cfg.seed_shared_nodes) {
            // Shared witnesses land before any commitment exists, so no
            // frozen intersection is disturbed.
            for (const auto& pr : cfg.pairs) {
                if (e.at(pr.first, pr.second) < Ordinal::nat(1)) continue;
                BaseCondition next = g.chain.back();
                NodeSet inter =
                    sv_intersect(subtree_of(next, pr.first), subtree_of(next, pr.second));
                bool tall = false;
                for (const auto& x : inter) {
                    if (!height_of(x).is_zero()) tall = true;
                }
                if (tall) continue;
                Ordinal z = insert_node_above(next.tree, Ordinal(), Ordinal::nat(1));
                for (const UOrd* u : {&pr.first, &pr.second}) {
                    NodeSet& w = next.subtrees[*u];
                    sv_insert(w, Ordinal());
                    sv_insert(w, z);
                }
                step(std::move(next),
                     "shared witness for {" + pr.first.str() + "," + pr.second.str() + "}");
            }
        }
        for (const auto& pr : cfg.pairs)
            step(commit_pair(g.chain.back(), pr.first, pr.second),
                 "commit {" + pr.first.str() + "," + pr.second.str() + "}");
    };

    int committed_at = cfg.pairs.empty() ? 0 : -1;
    if (committed_at < 0 && cfg.commit_round <= 0) {
        commit_all();
        committed_at = 0;
    }

    Ordinal top = Ordinal::nat(static_cast<std::uint64_t>(cfg.height_bound - 1));
    for (int round = 1; round <= cfg.max_rounds; ++round) {
        std::size_t before = g.chain.size();
        step(normalize_base(g.chain.back()), "normalize");

        for (const auto& eta : cfg.indices) {
            for (int a = 0; a < cfg.height_bound; ++a) {
                Ordinal alpha = Ordinal::nat(static_cast<std::uint64_t>(a));
                bool has = false;
                for (const auto& x : subtree_of(g.chain.back(), eta)) {
                    if (height_of(x) == alpha) {
                        has = true;
                        break;
                    }
                }
                if (!has)
                    step(grow_subtree(g.chain.back(), eta, alpha),
                         "grow " + eta.str() + " to height " + alpha.str());
            }
            if (cfg.widen_subtrees && cfg.height_bound >= 3) {
                const NodeSet& w = subtree_of(g.chain.back(), eta);
                int at2 = 0;
                Ordinal below1;
                bool have1 = false;
                for (const auto& x : w) {
                    if (height_of(x) == Ordinal::nat(2)) ++at2;
                    if (!have1 && height_of(x) == Ordinal::nat(1)) {
                        below1 = x;
                        have1 = true;
                    }
                }
                if (at2 < 2 && have1) {
                    BaseCondition next = g.chain.back();
                    Ordinal z = insert_node_above(next.tree, below1, Ordinal::nat(2));
                    sv_insert(next.subtrees[eta], z);
                    step(std::move(next), "widen " + eta.str());
                }
            }
        }

        NodeSet snapshot = g.chain.back().tree.nodes();
        for (const auto& x : snapshot) {
            Ordinal hx = height_of(x);
            for (int a = 0; a < cfg.height_bound; ++a) {
                Ordinal alpha = Ordinal::nat(static_cast<std::uint64_t>(a));
                if (!(alpha < hx)) break;
                bool has = false;
                for (const auto& y : g.chain.back().tree.strictly_below(x)) {
                    if (height_of(y) == alpha) {
                        has = true;
                        break;
                    }
                }
                if (!has)
                    step(extend_below(g.chain.back(), x, alpha),
                         "witness below " + x.str() + " at height " + alpha.str());
            }
        }

        // A successor at the top height is enough: once every height under the
        // bound is realized, normalization gives that successor predecessors
        // at each of them, and those sit above x along its chain.
        snapshot = g.chain.back().tree.nodes();
        for (const auto& x : snapshot) {
            Ordinal hx = height_of(x);
            if (!(hx < top)) continue;
            bool has = false;
            for (const auto& y : g.chain.back().tree.nodes()) {
                if (height_of(y) == top && g.chain.back().tree.less(x, y)) {
                    has = true;
                    break;
                }
            }
            if (!has)
                step(extend_above(g.chain.back(), x, top), "cap " + x.str() + " to the top");
        }

        if (committed_at < 0 && round >= cfg.commit_round) {
            commit_all();
            committed_at = round;
        }
        if (g.chain.size() == before && committed_at >= 0) break;
    }

    // Requirement audit: the loop must have converged, not merely stalled.
    const BaseCondition& last = g.chain.back();
    for (const auto& eta : cfg.indices) {
        for (int a = 0; a < cfg.height_bound; ++a) {
            Ordinal alpha = Ordinal::nat(static_cast<std::uint64_t>(a));
            bool has = false;
            for (const auto& x : subtree_of(last, eta)) {
                if (height_of(x) == alpha) has = true;
            }
            if (!has)
                throw OverflowError("simulate: starved carrier requirement " + eta.str() +
                                    " at height " + alpha.str());
        }
    }
    for (const auto& pr : cfg.pairs) {
        if (!sv_contains(last.commitments, pr))
            throw OverflowError("simulate: starved commitment {" + pr.first.str() + "," +
                                pr.second.str() + "}");
    }
    if (!validate_tree(last.tree).all())
        throw OverflowError("simulate: tree closure requirements starved");
    for (const auto& x : last.tree.nodes()) {
        for (int b = 0; b < cfg.height_bound; ++b) {
            Ordinal beta = Ordinal::nat(static_cast<std::uint64_t>(b));
            if (!(height_of(x) < beta)) continue;
            bool has = false;
            for (const auto& y : last.tree.nodes()) {
                if (height_of(y) == beta && last.tree.less(x, y)) has = true;
            }
            if (!has)
                throw OverflowError("simulate: starved extension above " + x.str() +
                                    " at height " + beta.str());
        }
    }

    g.tree = last.tree;
    g.subtrees = last.subtrees;
    g.commitments = last.commitments;
    return g;
}

StrongAdReport check_strong_almost_disjoint(const GenericApprox& g) {
    StrongAdReport rep;
    if (g.chain.empty()) return rep;
    const BaseCondition& last = g.chain.back();
    std::vector<UOrd> dom = domain_of(last);
    for (std::size_t i = 0; i < dom.size(); ++i) {
        for (std::size_t j = i + 1; j < dom.size(); ++j) {
            PairCertificate c;
            c.pair = make_upair(dom[i], dom[j]);
            NodeSet inter =
                sv_intersect(subtree_of(last, dom[i]), subtree_of(last, dom[j]));
            for (std::size_t q = 0; q < g.chain.size(); ++q) {
                if (sv_contains(g.chain[q].commitments, c.pair)) {
                    c.committed = true;
                    c.commit_index = q;
                    c.generators = sv_intersect(subtree_of(g.chain[q], dom[i]),
                                                subtree_of(g.chain[q], dom[j]));
                    break;
                }
            }
            if (c.committed) {
                c.certified = true;
                for (const auto& x : inter) {
                    bool bounded = false;
                    for (const auto& z : c.generators) {
                        if (last.tree.leq(x, z)) {
                            bounded = true;
                            break;
                        }
                    }
                    if (!bounded) {
                        c.certified = false;
                        c.note = "shared node " + x.str() + " escapes the commitment-time set";
                        rep.all_committed_certified = false;
                        break;
                    }
                }
            } else {
                c.note = "no certificate: pair never committed";
            }
            int maximal = 0;
            for (const auto& x : inter) {
                bool is_max = true;
                for (const auto& y : inter) {
                    if (last.tree.less(x, y)) {
                        is_max = false;
                        break;
                    }
                }
                if (is_max) ++maximal;
            }
            c.max_antichain = maximal;
            rep.pairs.push_back(std::move(c));
        }
    }
    return rep;
}

TripleFamilyReport derive_triple_family(const FiniteTree& t,
                                        const std::map<UOrd, NodeSet>& subtrees) {
    TripleFamilyReport rep;
    for (const auto& [eta, u] : subtrees) {
        std::vector<NodeSet> triples;
        for (const auto& x : u) {
            NodeSet succs;
            for (const auto& y : u) {
                if (!t.less(x, y)) continue;
                bool immediate = true;
                for (const auto& z : u) {
                    if (t.less(x, z) && t.less(z, y)) {
                        immediate = false;
                        break;
                    }
                }
                if (immediate) succs.push_back(y);
            }
            for (std::size_t i = 0; i < succs.size(); ++i) {
                for (std::size_t j = i + 1; j < succs.size(); ++j) {
                    NodeSet tr;
                    sv_insert(tr, x);
                    sv_insert(tr, succs[i]);
                    sv_insert(tr, succs[j]);
                    triples.push_back(std::move(tr));
                }
            }
        }
        std::sort(triples.begin(), triples.end());
        rep.families[eta] = std::move(triples);
    }
    for (auto i = rep.families.begin(); i != rep.families.end(); ++i) {
        for (auto j = std::next(i); j != rep.families.end(); ++j) {
            std::vector<NodeSet> common;
            std::set_intersection(i->second.begin(), i->second.end(), j->second.begin(),
                                  j->second.end(), std::back_inserter(common));
            rep.pair_sizes.emplace_back(i->first, j->first, common.size());
        }
    }
    return rep;
}

} // namespace treelab
