#include "treelab/quotient.hpp"

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "treelab/errors.hpp"
#include "treelab/rng.hpp"
#include "treelab/set_util.hpp"

namespace treelab {

// --- station hulls ---------------------------------------------------------

bool below_station(int theta, const UOrd& e) {
    return !e.is_station() || e.station_index() < theta;
}

bool model_below_station(int theta, const ModelSet& m) {
    return m.stations.empty() || m.stations.back() < theta;
}

bool side_below_station(int theta, const SideCondition& p) {
    Support s;
    collect_support(p, s);
    for (int st : s.stations)
        if (st >= theta) return false;
    return true;
}

bool model_subset(const ModelSet& a, const ModelSet& b) {
    return a.delta <= b.delta && sv_subset(a.stations, b.stations);
}

bool theta_closed(const std::vector<ModelSet>& models, int theta) {
    for (const auto& m : models) {
        ModelSet t = model_truncate(m, theta);
        if (std::find(models.begin(), models.end(), t) == models.end()) return false;
    }
    return true;
}

void require_reflection_station(const Universe& u, int theta) {
    if (theta < 0 || theta >= u.station_count())
        throw PreconditionError("reflection station: s" + std::to_string(theta) +
                                " is out of range");
    const StationInfo& si = u.station(theta);
    if (!si.in_sigma || !si.in_lambda)
        throw PreconditionError("reflection station: s" + std::to_string(theta) +
                                " must carry the reflection flag and be a cut");
}

int pick_reflection_station(const Universe& u) {
    for (int s = 0; s < u.station_count(); ++s)
        if (u.station(s).in_sigma && u.station(s).in_lambda) return s;
    throw PreconditionError("pick_reflection_station: no station carries both the "
                            "reflection flag and the cut attribute");
}

namespace {

std::string first_violation(const BaseReport& rep) {
    return rep.violations.empty() ? std::string("unspecified") : rep.violations.front();
}

void require_valid(const Universe& u, const SideCondition& p, const std::string& who,
                   const std::string& what) {
    BaseReport rep = validate_side(u, p);
    if (!rep.ok) throw PreconditionError(who + ": " + what + " invalid: " + first_violation(rep));
}

std::vector<ModelSet> sorted_models(std::vector<ModelSet> ms) {
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    return ms;
}

bool model_listed(const std::vector<ModelSet>& ms, const ModelSet& m) {
    return std::find(ms.begin(), ms.end(), m) != ms.end();
}

} // namespace

// --- projection --------------------------------------------------------

SideCondition project_theta(const Universe& u, const SideCondition& p, int theta) {
    require_reflection_station(u, theta);
    require_valid(u, p, "project_theta", "condition");
    SideCondition out;
    out.base.tree = p.base.tree;
    for (const auto& [e, w] : p.base.subtrees)
        if (below_station(theta, e)) out.base.subtrees[e] = w;
    for (const auto& pr : p.base.commitments)
        if (below_station(theta, pr.first) && below_station(theta, pr.second))
            out.base.commitments.push_back(pr);
    for (const auto& m : p.models)
        if (model_below_station(theta, m)) out.models.push_back(m);
    BaseReport rep = validate_side(u, out);
    if (!rep.ok)
        throw FidelityError("project_theta: restriction failed validation: " +
                            first_violation(rep));
    return out;
}

// --- witnessed projectability ------------------------------------------

std::string theta_witness_violation(const Universe& u, const SideCondition& p, int theta,
                                    const ThetaWitness& w) {
    (void)u;
    std::vector<UOrd> dom = domain_of(p.base);

    // the maps must cover exactly the high data and land inside the condition
    for (const auto& eta : dom) {
        if (below_station(theta, eta)) continue;
        auto it = w.f.find(eta);
        if (it == w.f.end()) return "(dom) no image for high index " + eta.str();
        const UOrd& img = it->second;
        if (!below_station(theta, img))
            return "(dom) image of " + eta.str() + " is not below the station";
        if (std::find(dom.begin(), dom.end(), img) == dom.end())
            return "(dom) image of " + eta.str() + " is not a domain index";
    }
    for (const auto& m : p.models) {
        if (model_below_station(theta, m)) continue;
        auto it = w.g.find(m);
        if (it == w.g.end()) return "(dom) no image for high model " + canonical_key(m);
        const ModelSet& img = it->second;
        if (!model_below_station(theta, img))
            return "(dom) image of " + canonical_key(m) + " is not below the station";
        if (!model_listed(p.models, img))
            return "(dom) image of " + canonical_key(m) + " is not listed";
    }
    // the maps live on the high data only
    for (const auto& [eta, img] : w.f) {
        (void)img;
        if (below_station(theta, eta) || std::find(dom.begin(), dom.end(), eta) == dom.end())
            return "(dom) unexpected entry " + eta.str() + " in the index map";
    }
    for (const auto& [m, img] : w.g) {
        (void)img;
        if (model_below_station(theta, m) || !model_listed(p.models, m))
            return "(dom) unexpected entry " + canonical_key(m) + " in the model map";
    }

    auto f_ext = [&](const UOrd& e) -> UOrd {
        if (below_station(theta, e)) return e;
        return w.f.at(e);
    };

    // (a) carriers agree with their images'
    for (const auto& [eta, img] : w.f)
        if (subtree_of(p.base, eta) != subtree_of(p.base, img))
            return "(a) carrier of " + eta.str() + " differs from its image's";

    // (b) traces agree and the image absorbs the truncation
    for (const auto& [m, img] : w.g) {
        if (img.delta != m.delta) return "(b) image trace differs for " + canonical_key(m);
        if (!sv_subset(model_truncate(m, theta).stations, img.stations))
            return "(b) image of " + canonical_key(m) + " misses part of the truncation";
    }

    // (c) membership transfers on the high data
    for (const auto& [eta, feta] : w.f)
        for (const auto& [m, gm] : w.g)
            if (sk_contains(m, eta) != sk_contains(gm, feta))
                return "(c) membership of " + eta.str() + " in " + canonical_key(m) +
                       " does not transfer";

    // (d)/(e) committed pairs transfer
    for (const auto& pr : p.base.commitments) {
        bool hi1 = !below_station(theta, pr.first);
        bool hi2 = !below_station(theta, pr.second);
        if (!hi1 && !hi2) continue;
        std::string clause = (hi1 && hi2) ? "(e)" : "(d)";
        UOrd a = f_ext(pr.first);
        UOrd b = f_ext(pr.second);
        if (a == b)
            return clause + " committed pair {" + pr.first.str() + "," + pr.second.str() +
                   "} collapses under the renaming";
        if (!sv_contains(p.base.commitments, make_upair(a, b)))
            return clause + " committed pair {" + pr.first.str() + "," + pr.second.str() +
                   "} has no renamed counterpart";
    }

    // (f) nesting of the high models transfers
    for (const auto& [m1, g1] : w.g) {
        for (const auto& [m2, g2] : w.g) {
            if (m1 == m2) continue;
            if (model_subset(m1, m2) && !model_subset(g1, g2))
                return "(f) nesting of " + canonical_key(m1) + " inside " + canonical_key(m2) +
                       " is not preserved";
        }
    }
    return "";
}

std::optional<ThetaWitness> dtheta_check(const Universe& u, const SideCondition& p, int theta) {
    require_reflection_station(u, theta);
    require_valid(u, p, "dtheta_check", "condition");
    if (!theta_closed(p.models, theta)) return std::nullopt;

    std::vector<UOrd> dom = domain_of(p.base);
    std::vector<UOrd> high_idx, low_idx;
    for (const auto& e : dom) (below_station(theta, e) ? low_idx : high_idx).push_back(e);
    std::vector<ModelSet> high_mod, low_mod;
    for (const auto& m : p.models)
        (model_below_station(theta, m) ? low_mod : high_mod).push_back(m);

    std::vector<std::vector<UOrd>> fc;
    for (const auto& eta : high_idx) {
        std::vector<UOrd> cs;
        for (const auto& xi : low_idx)
            if (subtree_of(p.base, xi) == subtree_of(p.base, eta)) cs.push_back(xi);
        if (cs.empty()) return std::nullopt;
        fc.push_back(std::move(cs));
    }
    std::vector<std::vector<ModelSet>> gc;
    for (const auto& m : high_mod) {
        ModelSet t = model_truncate(m, theta);
        std::vector<ModelSet> cs;
        for (const auto& k : low_mod)
            if (k.delta == m.delta && sv_subset(t.stations, k.stations)) cs.push_back(k);
        if (cs.empty()) return std::nullopt;
        gc.push_back(std::move(cs));
    }

    std::vector<std::size_t> sizes;
    double total = 1.0;
    for (const auto& cs : fc) {
        sizes.push_back(cs.size());
        total *= static_cast<double>(cs.size());
    }
    for (const auto& cs : gc) {
        sizes.push_back(cs.size());
        total *= static_cast<double>(cs.size());
    }
    if (total > 250000.0)
        throw OverflowError("dtheta_check: witness search space exceeds the bound");

    std::vector<std::size_t> at(sizes.size(), 0);
    for (;;) {
        ThetaWitness w;
        for (std::size_t i = 0; i < fc.size(); ++i) w.f[high_idx[i]] = fc[i][at[i]];
        for (std::size_t j = 0; j < gc.size(); ++j) w.g[high_mod[j]] = gc[j][at[fc.size() + j]];
        if (theta_witness_violation(u, p, theta, w).empty()) return w;
        std::size_t k = sizes.size();
        for (;;) {
            if (k == 0) return std::nullopt;
            --k;
            if (++at[k] < sizes[k]) break;
            at[k] = 0;
        }
    }
}

// --- cross-hull amalgamation -------------------------------------------

SideAmalgamResult cross_theta_amalgamate(const Universe& u, const SideCondition& mirror,
                                         const SideCondition& q, int theta,
                                         const std::map<UOrd, UOrd>& f,
                                         const std::map<ModelSet, ModelSet>& g) {
    require_reflection_station(u, theta);
    require_valid(u, q, "cross_theta_amalgamate", "condition");
    require_valid(u, mirror, "cross_theta_amalgamate", "mirror");
    if (!theta_closed(q.models, theta))
        throw PreconditionError(
            "cross_theta_amalgamate: the model list is not truncation-closed at the station");
    if (!side_below_station(theta, mirror))
        throw PreconditionError("cross_theta_amalgamate: the mirror must lie inside the hull");
    if (mirror.base.tree != q.base.tree)
        throw PreconditionError("cross_theta_amalgamate: the mirror must carry the same tree");

    std::vector<UOrd> dq = domain_of(q.base);
    std::vector<UOrd> dm = domain_of(mirror.base);
    {
        std::vector<UOrd> keys, imgs;
        for (const auto& [k, v] : f) {
            keys.push_back(k);
            imgs.push_back(v);
        }
        std::sort(imgs.begin(), imgs.end());
        bool inj = std::adjacent_find(imgs.begin(), imgs.end()) == imgs.end();
        if (keys != dq || imgs != dm || !inj)
            throw PreconditionError(
                "cross_theta_amalgamate: f is not a bijection onto the mirror domain");
    }
    {
        std::vector<ModelSet> keys, imgs;
        for (const auto& [k, v] : g) {
            keys.push_back(k);
            imgs.push_back(v);
        }
        std::sort(imgs.begin(), imgs.end());
        bool inj = std::adjacent_find(imgs.begin(), imgs.end()) == imgs.end();
        if (keys != sorted_models(q.models) || imgs != sorted_models(mirror.models) || !inj)
            throw PreconditionError(
                "cross_theta_amalgamate: g is not a bijection onto the mirror model list");
    }

    for (const auto& [k, v] : f)
        if (below_station(theta, k) && !(v == k))
            throw PreconditionError("cross_theta_amalgamate: (1) f must fix the hull part of "
                                    "the domain, moved " +
                                    k.str());
    for (const auto& [k, v] : g)
        if (model_below_station(theta, k) && !(v == k))
            throw PreconditionError("cross_theta_amalgamate: (2) g must fix the hull part of "
                                    "the model list, moved " +
                                    canonical_key(k));
    for (const auto& [k, v] : f)
        if (subtree_of(q.base, k) != subtree_of(mirror.base, v))
            throw PreconditionError("cross_theta_amalgamate: (3) carrier of " + k.str() +
                                    " is not carried to its image");
    for (const auto& [k, v] : g) {
        if (v.delta != k.delta)
            throw PreconditionError("cross_theta_amalgamate: (4) trace of " + canonical_key(k) +
                                    " changes under g");
        if (!sv_subset(model_truncate(k, theta).stations, v.stations))
            throw PreconditionError("cross_theta_amalgamate: (4) image of " + canonical_key(k) +
                                    " misses part of the truncation");
    }
    for (const auto& [k, fk] : f)
        for (const auto& [m, gm] : g)
            if (sk_contains(m, k) != sk_contains(gm, fk))
                throw PreconditionError("cross_theta_amalgamate: (5) membership of " + k.str() +
                                        " in " + canonical_key(m) + " does not transfer");

    SideCondition r = merge_side({mirror, q});
    std::vector<std::string> cert;
    cert.push_back("mirror clauses (1)-(5) verified");
    BaseReport rep = validate_side(u, r);
    if (!rep.ok)
        throw FidelityError("cross_theta_amalgamate: union failed validation: " +
                            first_violation(rep));
    cert.push_back("union validates: adequacy and separation certified");
    if (!leq_side(u, r, mirror) || !leq_side(u, r, q))
        throw FidelityError("cross_theta_amalgamate: union does not extend both sides");
    cert.push_back("union extends the mirror and the original");
    return {r, cert};
}

// --- densification ------------------------------------------------------

namespace {

DensifyResult densify_impl(const Universe& u, const SideCondition& q, int theta,
                           const ModelSet* n) {
    require_reflection_station(u, theta);
    require_valid(u, q, "dtheta_densify", "condition");
    if (n && !model_listed(q.models, *n))
        throw PreconditionError("dtheta_densify: the designated model must be listed");

    SideCondition p = q;
    std::vector<std::string> cert;
    if (n) {
        p = closure_extend(u, p, *n);
        cert.push_back("model list closed under the designated model");
    }
    if (!p.models.empty()) {
        p = closure_extend(u, p, theta);
        cert.push_back("model list closed under the station cut");
    }
    if (n && !is_model_closed(u, p.models, *n))
        throw FidelityError(
            "dtheta_densify: station closure broke the designated-model closure");

    if (side_below_station(theta, p)) {
        auto w = dtheta_check(u, p, theta);
        if (!w)
            throw FidelityError(
                "dtheta_densify: closed condition inside the hull fails the projectability "
                "check");
        cert.push_back("condition already lies inside the station hull");
        return {p, *w, cert};
    }

    Support sup;
    collect_support(p, sup);
    std::vector<int> high_st;
    for (int s : sup.stations)
        if (s >= theta) high_st.push_back(s);
    std::vector<int> free_lows;
    for (int s = 0; s < theta; ++s)
        if (!sv_contains(sup.stations, s)) free_lows.push_back(s);
    if (free_lows.size() < high_st.size())
        throw OverflowError("dtheta_densify: not enough unused stations below s" +
                            std::to_string(theta) + " to host the high data");

    // all injections high stations -> free low stations, lexicographic
    std::vector<std::vector<int>> remaps;
    {
        std::vector<int> cur(high_st.size(), -1);
        std::vector<bool> taken(free_lows.size(), false);
        std::function<void(std::size_t)> rec = [&](std::size_t pos) {
            if (remaps.size() >= 500000)
                throw OverflowError("dtheta_densify: remap search space exceeds the bound");
            if (pos == high_st.size()) {
                remaps.push_back(cur);
                return;
            }
            for (std::size_t i = 0; i < free_lows.size(); ++i) {
                if (taken[i]) continue;
                taken[i] = true;
                cur[pos] = free_lows[i];
                rec(pos + 1);
                taken[i] = false;
            }
        };
        rec(0);
    }

    std::vector<UOrd> dom = domain_of(p.base);
    std::vector<std::string> trail;
    for (const auto& remap : remaps) {
        std::map<int, int> pi;
        for (std::size_t i = 0; i < high_st.size(); ++i) pi[high_st[i]] = remap[i];
        auto remap_uord = [&](const UOrd& e) {
            return below_station(theta, e) ? e : UOrd::station(pi.at(e.station_index()));
        };
        auto remap_model = [&](const ModelSet& m) {
            if (model_below_station(theta, m)) return m;
            std::vector<int> st;
            for (int s : m.stations) sv_insert(st, s < theta ? s : pi.at(s));
            return ModelSet{m.delta, close_trace(u, st)};
        };
        std::string tag = "remap";
        for (std::size_t i = 0; i < high_st.size(); ++i)
            tag += " s" + std::to_string(high_st[i]) + ">s" + std::to_string(remap[i]);

        SideCondition mirror;
        mirror.base.tree = p.base.tree;
        for (const auto& [e, w] : p.base.subtrees) mirror.base.subtrees[remap_uord(e)] = w;
        if (mirror.base.subtrees.size() != p.base.subtrees.size()) {
            trail.push_back(tag + ": index images collide");
            continue;
        }
        for (const auto& pr : p.base.commitments)
            sv_insert(mirror.base.commitments,
                      make_upair(remap_uord(pr.first), remap_uord(pr.second)));

        std::vector<ModelSet> mirrored;
        for (const auto& m : p.models) mirrored.push_back(remap_model(m));
        if (sorted_models(mirrored).size() != mirrored.size()) {
            trail.push_back(tag + ": model images collide");
            continue;
        }
        mirror.models = mirrored;

        BaseReport rep = validate_side(u, mirror);
        if (!rep.ok) {
            trail.push_back(tag + ": mirror invalid: " + first_violation(rep));
            continue;
        }
        // membership patterns must survive the remap (trace closure can add
        // low stations the original lacked)
        bool patterns = true;
        for (const auto& e : dom) {
            for (std::size_t l = 0; l < p.models.size() && patterns; ++l)
                if (sk_contains(p.models[l], e) != sk_contains(mirrored[l], remap_uord(e)))
                    patterns = false;
            if (!patterns) break;
        }
        if (!patterns) {
            trail.push_back(tag + ": membership pattern breaks");
            continue;
        }
        for (std::size_t l1 = 0; l1 < p.models.size() && patterns; ++l1)
            for (std::size_t l2 = 0; l2 < p.models.size() && patterns; ++l2)
                if (l1 != l2 && model_subset(p.models[l1], p.models[l2]) !=
                                    model_subset(mirrored[l1], mirrored[l2]))
                    patterns = false;
        if (!patterns) {
            trail.push_back(tag + ": nesting pattern breaks");
            continue;
        }

        std::map<UOrd, UOrd> f;
        for (const auto& e : dom) f[e] = remap_uord(e);
        std::map<ModelSet, ModelSet> g;
        for (std::size_t l = 0; l < p.models.size(); ++l) g[p.models[l]] = mirrored[l];

        SideAmalgamResult am;
        try {
            am = cross_theta_amalgamate(u, mirror, p, theta, f, g);
        } catch (const PreconditionError& ex) {
            throw FidelityError(std::string("dtheta_densify: derived mirror failed its own "
                                            "hypotheses: ") +
                                ex.what());
        }
        if (n && !is_model_closed(u, am.condition.models, *n)) {
            trail.push_back(tag + ": union loses the designated-model closure");
            continue;
        }
        if (!theta_closed(am.condition.models, theta))
            throw FidelityError("dtheta_densify: union lost the station closure");
        auto wit = dtheta_check(u, am.condition, theta);
        if (!wit)
            throw FidelityError("dtheta_densify: projectable witness vanished after the union");

        cert.push_back(tag + " accepted after " + std::to_string(trail.size()) +
                       " rejected candidates");
        cert.insert(cert.end(), am.certificate.begin(), am.certificate.end());
        cert.push_back("projectable witness recovered after the union");
        return {am.condition, *wit, cert};
    }
    std::string detail;
    for (const auto& t : trail) detail += "; " + t;
    throw OverflowError("dtheta_densify: no station remap below s" + std::to_string(theta) +
                        " yields a valid mirror (" + std::to_string(remaps.size()) +
                        " candidates tried)" + detail);
}

} // namespace

DensifyResult dtheta_densify(const Universe& u, const SideCondition& q, int theta) {
    return densify_impl(u, q, theta, nullptr);
}

DensifyResult dtheta_densify(const Universe& u, const SideCondition& q, int theta,
                             const ModelSet& n) {
    return densify_impl(u, q, theta, &n);
}

// --- extended fingerprints ----------------------------------------------

std::string theta_fingerprint_key(const ThetaFingerprint& z) {
    std::string s = fingerprint_key(z.base);
    s += "|f[";
    for (const auto& [a, b] : z.f_part) s += a.str() + ">" + b.str() + ";";
    s += "]g[";
    for (const auto& [a, b] : z.g_part) s += canonical_key(a) + ">" + canonical_key(b) + ";";
    s += "]";
    return s;
}

ThetaFingerprint fingerprint_theta(const Universe& u, const SideCondition& p,
                                   const ModelSet& n, int theta) {
    require_reflection_station(u, theta);
    auto wit = dtheta_check(u, p, theta);
    if (!wit)
        throw PreconditionError(
            "fingerprint_theta: the condition is not projectable at the station");
    ThetaFingerprint z;
    z.base = fingerprint_of(u, p, n);
    for (const auto& [eta, img] : wit->f)
        if (sk_contains(n, eta)) z.f_part.emplace_back(eta, img);
    for (const auto& [m, img] : wit->g)
        if (sk_contains(n, m)) z.g_part.emplace_back(m, img);
    return z;
}

// --- layered membership -------------------------------------------------

EthetaReport etheta_check(const Universe& u, const SideCondition& p, int theta) {
    require_reflection_station(u, theta);
    EthetaReport rep;
    if (!validate_side(u, p).ok) {
        rep.detail = "condition invalid";
        return rep;
    }
    auto wit = dtheta_check(u, p, theta);
    if (wit && !p.models.empty()) {
        rep.member = rep.direct = true;
        rep.detail = "projectable with a nonempty model list";
    } else if (wit) {
        rep.detail = "projectable but the model list is empty";
    } else {
        rep.detail = "not directly projectable; the blind check does not search for "
                     "decompositions";
    }
    return rep;
}

EthetaReport etheta_check(const Universe& u, const SideCondition& p, int theta,
                          const std::vector<SideCondition>& parts,
                          const std::vector<ModelSet>& designated) {
    require_reflection_station(u, theta);
    if (parts.size() < 2 || parts.size() != designated.size())
        throw PreconditionError(
            "etheta_check: provenance needs at least two parts, one designated model each");
    EthetaReport rep;
    if (!validate_side(u, p).ok) {
        rep.detail = "condition invalid";
        return rep;
    }
    if (!(merge_side(parts) == p)) {
        rep.detail = "supplied parts do not merge to the condition";
        return rep;
    }
    std::vector<ThetaFingerprint> zs;
    for (std::size_t i = 0; i < parts.size(); ++i)
        zs.push_back(fingerprint_theta(u, parts[i], designated[i], theta));
    for (std::size_t i = 1; i < zs.size(); ++i) {
        if (!(zs[i] == zs[0])) {
            rep.detail = "extended fingerprints differ between part 0 and part " +
                         std::to_string(i);
            return rep;
        }
    }
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = i + 1; j < parts.size(); ++j)
            if (!sk_contains(designated[j], parts[i])) {
                rep.detail = "part " + std::to_string(i) + " does not lie in part " +
                             std::to_string(j) + "'s designated hull";
                return rep;
            }
    rep.member = rep.decomposed = true;
    rep.detail = "certified amalgam of matched projectable parts";
    if (auto w = dtheta_check(u, p, theta); w && !p.models.empty()) rep.direct = true;
    return rep;
}

// --- projection transfer -------------------------------------------------

namespace {

SideAmalgamResult quotient_amalgamate_impl(const Universe& u, const SideCondition& p,
                                           const SideCondition& s, int theta,
                                           const EthetaReport& motive) {
    if (!motive.member)
        throw PreconditionError(
            "quotient_amalgamate: the condition fails the layered membership check: " +
            motive.detail);
    require_valid(u, s, "quotient_amalgamate", "extension");
    if (!side_below_station(theta, s))
        throw PreconditionError(
            "quotient_amalgamate: the extension must lie inside the station hull");
    SideCondition proj = project_theta(u, p, theta);
    if (!leq_side(u, s, proj))
        throw PreconditionError(
            "quotient_amalgamate: the extension must extend the condition's projection");

    SideCondition out;
    out.base.tree = s.base.tree;
    out.base.subtrees = s.base.subtrees;
    for (const auto& [eta, w] : p.base.subtrees)
        if (!out.base.subtrees.count(eta))
            out.base.subtrees[eta] = downward_closure_in(s.base.tree, w);
    out.base.commitments = s.base.commitments;
    for (const auto& pr : p.base.commitments) sv_insert(out.base.commitments, pr);
    {
        std::vector<ModelSet> ms = s.models;
        ms.insert(ms.end(), p.models.begin(), p.models.end());
        out.models = sorted_models(std::move(ms));
    }

    std::vector<std::string> cert;
    cert.push_back("layered membership verified: " + motive.detail);
    cert.push_back("extension verified inside the hull below the projection");
    BaseReport rep = validate_side(u, out);
    if (!rep.ok)
        throw FidelityError("quotient_amalgamate: transfer failed validation: " +
                            first_violation(rep));
    cert.push_back("transfer validates: adequacy and separation certified");
    if (!leq_side(u, out, s))
        throw FidelityError("quotient_amalgamate: transfer does not extend the hull extension");
    if (!leq_side(u, out, p))
        throw FidelityError("quotient_amalgamate: transfer does not extend the original");
    cert.push_back("transfer extends both the extension and the original");
    return {out, cert};
}

} // namespace

SideAmalgamResult quotient_amalgamate(const Universe& u, const SideCondition& p,
                                      const SideCondition& s, int theta) {
    require_reflection_station(u, theta);
    require_valid(u, p, "quotient_amalgamate", "condition");
    return quotient_amalgamate_impl(u, p, s, theta, etheta_check(u, p, theta));
}

SideAmalgamResult quotient_amalgamate(const Universe& u, const SideCondition& p,
                                      const SideCondition& s, int theta,
                                      const std::vector<SideCondition>& parts,
                                      const std::vector<ModelSet>& designated) {
    require_reflection_station(u, theta);
    require_valid(u, p, "quotient_amalgamate", "condition");
    return quotient_amalgamate_impl(u, p, s, theta,
                                    etheta_check(u, p, theta, parts, designated));
}

// --- finite filter approximations ----------------------------------------

FilterApprox make_filter(const Universe& u, int theta, std::vector<SideCondition> chain) {
    require_reflection_station(u, theta);
    if (chain.empty()) throw PreconditionError("make_filter: empty chain");
    FilterApprox h;
    h.theta = theta;
    h.log.push_back("finite filter surrogate: upward closure of a single generator "
                    "(true genericity is not claimed)");
    for (std::size_t i = 0; i < chain.size(); ++i) {
        require_valid(u, chain[i], "make_filter", "chain element " + std::to_string(i));
        if (!side_below_station(theta, chain[i]))
            throw PreconditionError("make_filter: chain element " + std::to_string(i) +
                                    " leaves the station hull");
        if (i > 0 && !leq_side(u, chain[i], chain[i - 1]))
            throw PreconditionError("make_filter: chain element " + std::to_string(i) +
                                    " does not extend its predecessor");
        h.log.push_back("chain element " + std::to_string(i) +
                        " certified (valid, in hull, descending; tree end-extends)");
    }
    h.generator = chain.back();
    h.tree = h.generator.base.tree;
    h.chain = std::move(chain);

    // pool: listed models plus high-station lifts whose truncation stays listed
    std::vector<int> high_stations;
    for (int s = theta; s < u.station_count(); ++s) high_stations.push_back(s);
    for (const auto& m : h.generator.models) {
        if (!model_listed(h.pool, m)) h.pool.push_back(m);
        const std::size_t subsets = std::size_t{1} << high_stations.size();
        for (std::size_t mask = 1; mask < subsets; ++mask) {
            std::vector<int> st = m.stations;
            for (std::size_t b = 0; b < high_stations.size(); ++b)
                if (mask & (std::size_t{1} << b)) sv_insert(st, high_stations[b]);
            ModelSet lift{m.delta, close_trace(u, st)};
            if (!model_violation(u, lift).empty()) continue;
            if (!model_listed(h.generator.models, model_truncate(lift, theta))) continue;
            if (!model_listed(h.pool, lift)) h.pool.push_back(lift);
        }
    }
    std::sort(h.pool.begin(), h.pool.end());
    h.log.push_back("pool: " + std::to_string(h.pool.size()) +
                    " models whose station truncation is listed");
    return h;
}

bool filter_contains(const Universe& u, const FilterApprox& h, const SideCondition& s) {
    if (!validate_side(u, s).ok) return false;
    if (!side_below_station(h.theta, s)) return false;
    return leq_side(u, h.generator, s);
}

FilterApprox simulate_ptheta_filter(const Universe& u, int theta, const FilterConfig& cfg) {
    require_reflection_station(u, theta);
    if (cfg.base.height_bound < 1)
        throw PreconditionError("simulate_ptheta_filter: height bound must be positive");
    for (const auto& e : cfg.base.indices)
        if (!below_station(theta, e))
            throw PreconditionError("simulate_ptheta_filter: index " + e.str() +
                                    " lies at or above the station");
    for (const auto& pr : cfg.base.pairs)
        if (!below_station(theta, pr.first) || !below_station(theta, pr.second))
            throw PreconditionError(
                "simulate_ptheta_filter: committed pair leaves the station hull");
    if (cfg.model_moves < 0 ||
        cfg.model_moves > static_cast<int>(u.deltas().size()))
        throw PreconditionError(
            "simulate_ptheta_filter: model moves exceed the trace allocation table");

    std::vector<SideCondition> chain;
    SideCondition cur;
    cur.base.tree.add_node(Ordinal());
    chain.push_back(cur);
    std::vector<std::string> log{"start: root-only condition"};

    auto step = [&](SideCondition next, const std::string& what) {
        if (next == cur) return;
        BaseReport rep = validate_side(u, next);
        if (!rep.ok)
            throw FidelityError("simulate_ptheta_filter: step '" + what +
                                "' invalid: " + first_violation(rep));
        if (!leq_side(u, next, cur))
            throw FidelityError("simulate_ptheta_filter: step '" + what + "' does not descend");
        if (!is_end_extension(cur.base.tree, next.base.tree))
            throw FidelityError("simulate_ptheta_filter: step '" + what +
                                "' breaks the tree end-extension");
        cur = std::move(next);
        chain.push_back(cur);
        log.push_back(what);
    };

    Rng rng(cfg.seed);
    int model_done = 0;
    std::vector<int> tower_stations;
    auto carriers_ready = [&]() {
        for (const auto& e : cfg.base.indices) {
            std::vector<Ordinal> hs = realized_heights(cur.base.tree, subtree_of(cur.base, e));
            for (int hh = 0; hh < cfg.base.height_bound; ++hh)
                if (!sv_contains(hs, Ordinal::nat(hh))) return false;
        }
        return true;
    };
    auto pairs_ready = [&]() {
        for (const auto& pr : cfg.base.pairs)
            if (!sv_contains(cur.base.commitments, pr)) return false;
        return true;
    };

    for (int round = 0; round < cfg.base.max_rounds; ++round) {
        if (round >= cfg.base.commit_round) {
            for (const auto& pr : cfg.base.pairs) {
                if (sv_contains(cur.base.commitments, pr)) continue;
                SideCondition next = cur;
                if (cfg.base.seed_shared_nodes) {
                    FiniteTree t = next.base.tree;
                    Ordinal w = insert_node_above(t, Ordinal(), Ordinal::nat(1));
                    next.base.tree = t;
                    for (const UOrd& e : {pr.first, pr.second}) {
                        NodeSet ws = subtree_of(next.base, e);
                        sv_insert(ws, Ordinal());
                        sv_insert(ws, w);
                        next.base.subtrees[e] = ws;
                    }
                }
                next.base = commit_pair(next.base, pr.first, pr.second);
                step(next, "commit {" + pr.first.str() + "," + pr.second.str() + "}");
            }
        }
        for (const auto& e : cfg.base.indices) {
            for (int hh = 0; hh < cfg.base.height_bound; ++hh) {
                std::vector<Ordinal> hs =
                    realized_heights(cur.base.tree, subtree_of(cur.base, e));
                if (sv_contains(hs, Ordinal::nat(hh))) continue;
                SideCondition next = cur;
                next.base = grow_subtree(next.base, e, Ordinal::nat(hh));
                step(next, "grow " + e.str() + " to height " + std::to_string(hh));
            }
        }
        if (model_done < cfg.model_moves && carriers_ready() && pairs_ready()) {
            std::size_t di = u.deltas().size() - static_cast<std::size_t>(cfg.model_moves) +
                             static_cast<std::size_t>(model_done);
            Ordinal delta = u.deltas()[di];
            Support sup;
            collect_support(cur, sup);
            std::vector<int> st = sv_union(tower_stations, sup.stations);
            std::vector<int> extras;
            for (int s = 0; s < theta; ++s)
                if (!sv_contains(st, s)) extras.push_back(s);
            if (!extras.empty() && rng.chance(0.7)) sv_insert(st, rng.pick(extras));
            st = close_trace(u, st);
            ModelSet nmodel{delta, st};
            tower_stations = st;
            step(add_model(u, cur, nmodel), "adjoin model " + canonical_key(nmodel));
            ++model_done;
        }
        if (pairs_ready() && carriers_ready() && model_done == cfg.model_moves) break;
    }

    for (const auto& pr : cfg.base.pairs)
        if (!sv_contains(cur.base.commitments, pr))
            throw OverflowError("simulate_ptheta_filter: starved commitment {" +
                                pr.first.str() + "," + pr.second.str() + "}");
    if (!carriers_ready())
        throw OverflowError("simulate_ptheta_filter: starved carrier growth");
    if (model_done < cfg.model_moves)
        throw OverflowError("simulate_ptheta_filter: starved model moves");

    FilterApprox h = make_filter(u, theta, chain);
    h.log.insert(h.log.end(), log.begin(), log.end());
    return h;
}

bool quotient_membership(const Universe& u, const SideCondition& p, const FilterApprox& h) {
    require_valid(u, p, "quotient_membership", "condition");
    auto certify = [&](const SideCondition& ext) -> bool {
        if (!validate_side(u, ext).ok) return false;
        if (!leq_side(u, ext, p) || !leq_side(u, ext, h.generator)) return false;
        // the projected extension witnesses that the condition's projection is
        // compatible with the generator inside the hull (projection laws)
        SideCondition pe = project_theta(u, ext, h.theta);
        if (!leq_side(u, pe, project_theta(u, p, h.theta)) || !leq_side(u, pe, h.generator))
            throw FidelityError(
                "quotient_membership: projected witness fails the compatibility law");
        return true;
    };
    if (certify(merge_side({p, h.generator}))) return true;
    try {
        SideAmalgamResult am = quotient_amalgamate(u, p, h.generator, h.theta);
        if (certify(am.condition)) return true;
    } catch (const PreconditionError&) {
        // transfer route inapplicable; bounded search ends here
    }
    return false;
}

SideAmalgamResult quotient_add_model(const Universe& u, const SideCondition& p,
                                     const ModelSet& n, int theta, const FilterApprox& h) {
    require_reflection_station(u, theta);
    if (theta != h.theta)
        throw PreconditionError(
            "quotient_add_model: station does not match the filter approximation");
    require_valid(u, p, "quotient_add_model", "condition");
    auto wit = dtheta_check(u, p, theta);
    if (!wit)
        throw PreconditionError(
            "quotient_add_model: the condition is not projectable at the station");
    if (p.models.empty())
        throw PreconditionError("quotient_add_model: the condition must list a model");
    if (!quotient_membership(u, p, h))
        throw PreconditionError(
            "quotient_add_model: the condition is not in the quotient approximation");
    if (!model_listed(h.pool, n))
        throw PreconditionError("quotient_add_model: the model is not in the derived pool");
    if (!sk_contains(n, p))
        throw PreconditionError("quotient_add_model: the condition must lie in the model's hull");
    if (!sv_contains(n.stations, theta))
        throw PreconditionError("quotient_add_model: the station marker must lie in the model");
    const SideCondition& t = h.generator;
    if (!leq_side(u, t, project_theta(u, p, theta)))
        throw PreconditionError(
            "quotient_add_model: the generator must extend the condition's projection");
    if (!model_listed(t.models, model_truncate(n, theta)))
        throw PreconditionError(
            "quotient_add_model: the model's truncation must be listed in the generator");

    SideCondition grown = add_model(u, p, n);
    SideAmalgamResult transfer = quotient_amalgamate(u, p, t, theta);
    SideCondition v = transfer.condition;
    {
        std::vector<ModelSet> ms = v.models;
        ms.push_back(n);
        v.models = sorted_models(std::move(ms));
    }
    BaseReport rep = validate_side(u, v);
    if (!rep.ok)
        throw FidelityError("quotient_add_model: combined condition failed validation: " +
                            first_violation(rep));
    if (!leq_side(u, v, t) || !leq_side(u, v, grown))
        throw FidelityError("quotient_add_model: combined condition does not extend the "
                            "generator and the grown condition");

    std::vector<std::string> cert;
    cert.push_back("pool membership, hull containment, and station marker verified");
    cert.insert(cert.end(), transfer.certificate.begin(), transfer.certificate.end());
    cert.push_back("combined condition validates below the generator and the grown condition");
    return {grown, cert};
}

// --- centered selections over the quotient -------------------------------

MultiAmalgamResult quotient_multi_amalgamate(
    const Universe& u, const std::vector<std::vector<QuotientPoolEntry>>& pools,
    const FilterApprox& h) {
    require_reflection_station(u, h.theta);
    if (pools.empty()) throw PreconditionError("quotient_multi_amalgamate: no pools");
    for (std::size_t k = 0; k < pools.size(); ++k)
        if (pools[k].empty())
            throw PreconditionError("quotient_multi_amalgamate: pool " + std::to_string(k) +
                                    " is empty");

    std::optional<ThetaFingerprint> z0;
    for (std::size_t k = 0; k < pools.size(); ++k) {
        for (std::size_t i = 0; i < pools[k].size(); ++i) {
            const QuotientPoolEntry& e = pools[k][i];
            ThetaFingerprint z;
            try {
                z = fingerprint_theta(u, e.q, e.n, h.theta);
            } catch (const PreconditionError& ex) {
                throw PreconditionError("quotient_multi_amalgamate: pool " + std::to_string(k) +
                                        " entry " + std::to_string(i) + ": " + ex.what());
            }
            if (!z0) {
                z0 = z;
            } else if (!(z == *z0)) {
                throw PreconditionError("quotient_multi_amalgamate: extended fingerprints "
                                        "differ at pool " +
                                        std::to_string(k) + " entry " + std::to_string(i));
            }
            if (!quotient_membership(u, e.q, h))
                throw PreconditionError("quotient_multi_amalgamate: pool " + std::to_string(k) +
                                        " entry " + std::to_string(i) +
                                        " is not in the quotient approximation");
            if (!leq_side(u, h.generator, project_theta(u, e.q, h.theta)))
                throw PreconditionError("quotient_multi_amalgamate: the generator must extend "
                                        "the projection of pool " +
                                        std::to_string(k) + " entry " + std::to_string(i));
        }
    }

    MultiAmalgamResult out;
    const std::size_t d = pools.size();
    if (d == 1) {
        out.found = true;
        out.picks = {0};
        out.amalgam = {pools[0][0].q, {"single pool: representative returned"}};
        out.log = "single pool: no selection needed";
        return out;
    }

    // private blocks: tree nodes at or above the designated trace, seen by
    // the filter tree (nodes outside it are incomparable there by absence)
    std::vector<std::vector<NodeSet>> blocks(d);
    for (std::size_t k = 0; k < d; ++k) {
        for (const auto& e : pools[k]) {
            NodeSet j;
            for (const auto& x : e.q.base.tree.nodes())
                if (!(x < e.n.delta)) j.push_back(x);
            blocks[k].push_back(sv_intersect(j, h.tree.nodes()));
        }
    }
    const int chain_bound = longest_chain(h.tree);

    std::vector<std::string> rejects;
    std::vector<std::size_t> at(d, 0);
    for (;;) {
        std::string tag = "selection (";
        for (std::size_t k = 0; k < d; ++k)
            tag += (k ? "," : "") + std::to_string(at[k]);
        tag += ")";

        std::string reason;
        for (std::size_t i = 0; i < d && reason.empty(); ++i) {
            for (std::size_t j = i + 1; j < d && reason.empty(); ++j) {
                const QuotientPoolEntry& ei = pools[i][at[i]];
                const QuotientPoolEntry& ej = pools[j][at[j]];
                if (!(ei.n.delta < ej.n.delta))
                    reason = "designated traces are not ascending";
                else if (!sk_contains(ej.n, ei.q))
                    reason = "entry " + std::to_string(i) + " does not lie in entry " +
                             std::to_string(j) + "'s designated hull";
                else if (!sv_disjoint(blocks[i][at[i]], blocks[j][at[j]]))
                    reason = "private blocks share a node in the filter tree";
            }
        }
        if (reason.empty()) {
            std::vector<NodeSet> bs;
            for (std::size_t k = 0; k < d; ++k) bs.push_back(blocks[k][at[k]]);
            IncomparableFamily fam =
                find_incomparable_family(h.tree, bs, static_cast<int>(d), chain_bound);
            if (!fam.found) reason = fam.failure;
        }
        if (reason.empty()) {
            std::vector<SideCondition> parts;
            std::vector<ModelSet> designated;
            for (std::size_t k = 0; k < d; ++k) {
                parts.push_back(pools[k][at[k]].q);
                designated.push_back(pools[k][at[k]].n);
            }
            bool built = false;
            SideAmalgamResult am;
            try {
                am = amalgamate_by_fingerprint(u, parts, designated);
                built = true;
            } catch (const PreconditionError& ex) {
                reason = std::string("amalgamation rejected: ") + ex.what();
            }
            if (built) {
                std::vector<SideCondition> projs;
                for (const auto& part : parts) projs.push_back(project_theta(u, part, h.theta));
                UnionCheckVerdict v;
                try {
                    v = merge_leq_criterion(u, projs, h.generator);
                } catch (const PreconditionError& ex) {
                    throw FidelityError(std::string("quotient_multi_amalgamate: projection "
                                                    "distribution law failed: ") +
                                        ex.what());
                }
                if (!v.hypotheses_hold)
                    throw FidelityError("quotient_multi_amalgamate: transfer-criterion "
                                        "hypotheses failed after an incomparable selection: " +
                                        v.detail);
                if (!v.conclusion_holds)
                    throw FidelityError("quotient_multi_amalgamate: transfer-criterion "
                                        "conclusion failed: " +
                                        v.detail);
                if (!quotient_membership(u, am.condition, h))
                    throw FidelityError("quotient_multi_amalgamate: certified amalgam rejected "
                                        "by the membership check");
                out.found = true;
                out.picks = at;
                out.amalgam = am;
                out.amalgam.certificate.push_back(
                    "selection certified: private blocks pairwise incomparable in the filter "
                    "tree");
                out.amalgam.certificate.push_back(
                    "generator extends the merged projections: amalgam stays in the quotient");
                out.log = tag + " accepted";
                return out;
            }
        }
        if (rejects.size() < 50) rejects.push_back(tag + " rejected: " + reason);

        std::size_t k = d;
        bool done = false;
        for (;;) {
            if (k == 0) {
                done = true;
                break;
            }
            --k;
            if (++at[k] < pools[k].size()) break;
            at[k] = 0;
        }
        if (done) break;
    }
    for (const auto& line : rejects) out.log += line + "\n";
    out.log += "no admissible selection across the pools";
    return out;
}

} // namespace treelab
