#include "treelab/side.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "treelab/errors.hpp"

namespace treelab {

namespace {

std::string idx(std::size_t i) { return std::to_string(i); }

std::vector<ModelSet> sorted_unique_models(std::vector<ModelSet> ms) {
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    return ms;
}

bool list_has_model(const std::vector<ModelSet>& ms, const ModelSet& n) {
    return std::find(ms.begin(), ms.end(), n) != ms.end();
}

NodeSet below_level(const NodeSet& xs, const Ordinal& delta) {
    NodeSet out;
    for (const Ordinal& x : xs)
        if (x < delta) out.push_back(x);
    return out;
}

// The unique c with a + c = x, by stripping a's normal-form prefix from x.
// pre: a <= x.
Ordinal left_diff(const Ordinal& a, const Ordinal& x) {
    const std::vector<Ordinal::Term>& ta = a.terms();
    const std::vector<Ordinal::Term>& tx = x.terms();
    std::size_t i = 0;
    while (i < ta.size() && i < tx.size() && ta[i] == tx[i]) ++i;
    if (i == ta.size())
        return Ordinal::from_terms(std::vector<Ordinal::Term>(tx.begin() + i, tx.end()));
    if (i == tx.size() || ta[i].first > tx[i].first ||
        (ta[i].first == tx[i].first && ta[i].second > tx[i].second))
        throw PreconditionError("left_diff: minuend below subtrahend");
    std::vector<Ordinal::Term> rest(tx.begin() + i, tx.end());
    if (ta[i].first == tx[i].first) rest[0].second -= ta[i].second;
    return Ordinal::from_terms(std::move(rest));
}

} // namespace

void collect_support(const SideCondition& c, Support& s) {
    collect_support(c.base, s);
    for (const ModelSet& m : c.models) collect_support(m, s);
}

std::string a_separation_violation(const BaseCondition& base,
                                   const std::vector<ModelSet>& models) {
    const std::vector<UOrd> dom = domain_of(base);
    for (const ModelSet& m : models) {
        std::vector<UOrd> inside;
        for (const UOrd& eta : dom)
            if (sk_contains(m, eta)) inside.push_back(eta);
        for (std::size_t i = 0; i < inside.size(); ++i)
            for (std::size_t j = i + 1; j < inside.size(); ++j) {
                NodeSet shared =
                    sv_intersect(subtree_of(base, inside[i]), subtree_of(base, inside[j]));
                for (const Ordinal& x : shared)
                    if (!sk_contains(m, x))
                        return "separation: indices " + inside[i].str() + " and " +
                               inside[j].str() + " share node " + x.str() + " outside " +
                               canonical_key(m);
            }
    }
    return "";
}

BaseReport validate_side(const Universe& u, const SideCondition& p) {
    BaseReport rep = validate_base(p.base);
    AdequacyReport adq = is_adequate(u, p.models);
    if (!adq.ok) {
        rep.ok = false;
        for (const std::string& v : adq.violations) rep.violations.push_back(v);
    }
    std::string sep = a_separation_violation(p.base, p.models);
    if (!sep.empty()) {
        rep.ok = false;
        rep.violations.push_back(sep);
    }
    return rep;
}

bool leq_side(const Universe& u, const SideCondition& q, const SideCondition& p) {
    if (!validate_side(u, q).ok || !validate_side(u, p).ok)
        throw PreconditionError("leq_side: both conditions must be valid");
    if (!leq_base(q.base, p.base)) return false;
    for (const ModelSet& m : p.models)
        if (!list_has_model(q.models, m)) return false;
    return true;
}

SideCondition normalize_side(const Universe& u, const SideCondition& p) {
    if (!validate_side(u, p).ok)
        throw PreconditionError("normalize_side: condition must be valid");
    SideCondition out{normalize_base(p.base), p.models};
    BaseReport rep = validate_side(u, out);
    if (!rep.ok) throw FidelityError("normalize_side: " + rep.violations.front());
    return out;
}

SideCondition add_model(const Universe& u, const SideCondition& p, const ModelSet& n) {
    if (!validate_side(u, p).ok)
        throw PreconditionError("add_model: condition must be valid");
    std::string mv = model_violation(u, n);
    if (!mv.empty()) throw PreconditionError("add_model: " + mv);
    if (!sk_contains(n, p))
        throw PreconditionError("add_model: condition not inside the model's hull");
    SideCondition out = p;
    out.models.push_back(n);
    out.models = sorted_unique_models(std::move(out.models));
    BaseReport rep = validate_side(u, out);
    if (!rep.ok) throw FidelityError("add_model: " + rep.violations.front());
    return out;
}

SideCondition closure_extend(const Universe& u, const SideCondition& p, const ModelSet& n) {
    if (!validate_side(u, p).ok)
        throw PreconditionError("closure_extend: condition must be valid");
    SideCondition out{p.base, close_model(u, p.models, n)};
    BaseReport rep = validate_side(u, out);
    if (!rep.ok) throw FidelityError("closure_extend: " + rep.violations.front());
    return out;
}

SideCondition closure_extend(const Universe& u, const SideCondition& p, int cut_station) {
    if (!validate_side(u, p).ok)
        throw PreconditionError("closure_extend: condition must be valid");
    SideCondition out{p.base, close_cut(u, p.models, cut_station)};
    BaseReport rep = validate_side(u, out);
    if (!rep.ok) throw FidelityError("closure_extend: " + rep.violations.front());
    return out;
}

SideCondition merge_side(const std::vector<SideCondition>& parts) {
    std::vector<BaseCondition> bases;
    std::vector<ModelSet> ms;
    for (const SideCondition& p : parts) {
        bases.push_back(p.base);
        ms.insert(ms.end(), p.models.begin(), p.models.end());
    }
    return SideCondition{merge_base(bases), sorted_unique_models(std::move(ms))};
}

UnionCheckVerdict merge_leq_criterion(const Universe& u,
                                      const std::vector<SideCondition>& parts,
                                      const SideCondition& r) {
    if (parts.size() < 2)
        throw PreconditionError("merge_leq_criterion: need at least two parts");
    for (std::size_t i = 0; i < parts.size(); ++i)
        if (!validate_side(u, parts[i]).ok)
            throw PreconditionError("merge_leq_criterion: part " + idx(i) + " invalid");
    SideCondition merged = merge_side(parts);
    if (!validate_side(u, merged).ok)
        throw PreconditionError("merge_leq_criterion: merged condition must validate");
    for (std::size_t i = 0; i < parts.size(); ++i)
        if (!leq_side(u, merged, parts[i]))
            throw PreconditionError("merge_leq_criterion: merged condition must extend part " +
                                    idx(i));

    UnionCheckVerdict v;
    auto fail = [&v](const std::string& why) {
        v.hypotheses_hold = false;
        v.detail = "hypotheses fail: " + why;
        return v;
    };
    if (!validate_side(u, r).ok) return fail("candidate extension invalid");
    for (std::size_t i = 0; i < parts.size(); ++i)
        if (!leq_side(u, r, parts[i]))
            return fail("candidate does not extend part " + idx(i));
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = 0; j < parts.size(); ++j) {
            if (i == j) continue;
            const FiniteTree& ti = parts[i].base.tree;
            const FiniteTree& tj = parts[j].base.tree;
            for (const Ordinal& x : ti.nodes()) {
                if (tj.contains(x)) continue;
                for (const Ordinal& y : tj.nodes()) {
                    if (ti.contains(y)) continue;
                    if (r.base.tree.less(x, y) || r.base.tree.less(y, x))
                        return fail("cross-private nodes " + x.str() + " and " + y.str() +
                                    " comparable in the candidate");
                }
            }
        }
    v.hypotheses_hold = true;
    v.conclusion_checked = true;
    v.conclusion_holds = leq_side(u, r, merged);
    v.detail = v.conclusion_holds
                   ? "candidate extends the merged condition"
                   : "conclusion fails: candidate does not extend the merged condition";
    return v;
}

namespace {

// Looks up one pair's matching map; missing entries are precondition faults.
template <typename K>
const std::map<K, K>& family_for(const std::map<std::pair<std::size_t, std::size_t>,
                                                std::map<K, K>>& fs,
                                 std::size_t j, std::size_t i, const char* name) {
    auto it = fs.find({j, i});
    if (it == fs.end())
        throw PreconditionError(std::string("amalgamate_over_models: matching family ") + name +
                                " missing for pair (" + idx(j) + "," + idx(i) + ")");
    return it->second;
}

template <typename K>
const K& image_of(const std::map<K, K>& f, const K& key, const std::string& what) {
    auto it = f.find(key);
    if (it == f.end()) throw PreconditionError("amalgamate_over_models: " + what);
    return it->second;
}

template <typename K>
void check_bijection(const std::map<K, K>& f, const std::vector<K>& from,
                     const std::vector<K>& to, const char* name, std::size_t j,
                     std::size_t i) {
    std::string tag = std::string(name) + "[" + idx(j) + "," + idx(i) + "]";
    if (f.size() != from.size())
        throw PreconditionError("amalgamate_over_models: " + tag +
                                " must be defined exactly on its source");
    std::vector<K> image;
    for (const K& k : from) image.push_back(image_of(f, k, tag + " misses a source element"));
    std::sort(image.begin(), image.end());
    image.erase(std::unique(image.begin(), image.end()), image.end());
    if (image != to)
        throw PreconditionError("amalgamate_over_models: " + tag +
                                " is not a bijection onto its target");
}

} // namespace

SideAmalgamResult amalgamate_over_models(const Universe& u,
                                         const std::vector<SideCondition>& parts,
                                         const std::vector<ModelSet>& models,
                                         const FGFamilies& fam) {
    const std::size_t d = parts.size();
    if (d < 2 || models.size() != d)
        throw PreconditionError(
            "amalgamate_over_models: need matching parts and designated models, at least two");

    std::vector<std::vector<UOrd>> doms(d);
    std::vector<std::vector<ModelSet>> lists(d);
    std::vector<Ordinal> deltas(d);
    for (std::size_t i = 0; i < d; ++i) {
        BaseReport rep = validate_side(u, parts[i]);
        if (!rep.ok)
            throw PreconditionError("amalgamate_over_models: part " + idx(i) + " invalid: " +
                                    rep.violations.front());
        if (!list_has_model(parts[i].models, models[i]))
            throw PreconditionError("amalgamate_over_models: part " + idx(i) +
                                    " does not list its designated model");
        if (models[i].delta == Ordinal())
            throw PreconditionError("amalgamate_over_models: designated model of part " + idx(i) +
                                    " needs a positive trace");
        if (!is_model_closed(u, parts[i].models, models[i]))
            throw PreconditionError("amalgamate_over_models: part " + idx(i) +
                                    "'s model list is not closed under its designated model");
        doms[i] = domain_of(parts[i].base);
        lists[i] = sorted_unique_models(parts[i].models);
        deltas[i] = models[i].delta;
    }
    for (std::size_t i = 0; i + 1 < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            if (!(deltas[i] < deltas[j]))
                throw PreconditionError(
                    "amalgamate_over_models: designated traces must be strictly ascending");
            if (!sk_contains(models[j], parts[i]))
                throw PreconditionError("amalgamate_over_models: part " + idx(i) +
                                        " must lie in part " + idx(j) + "'s designated hull");
        }

    for (std::size_t i = 0; i + 1 < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            check_bijection(family_for(fam.f, j, i, "f"), doms[j], doms[i], "f", j, i);
            check_bijection(family_for(fam.g, j, i, "g"), lists[j], lists[i], "g", j, i);
        }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            for (std::size_t k = j + 1; k < d; ++k) {
                const std::map<UOrd, UOrd>& fki = family_for(fam.f, k, i, "f");
                const std::map<UOrd, UOrd>& fkj = family_for(fam.f, k, j, "f");
                const std::map<UOrd, UOrd>& fji = family_for(fam.f, j, i, "f");
                for (const UOrd& eta : doms[k])
                    if (image_of(fki, eta, "f misses an element") !=
                        image_of(fji, image_of(fkj, eta, "f misses an element"),
                                 "f misses an element"))
                        throw PreconditionError(
                            "amalgamate_over_models: matching families do not commute at (" +
                            idx(i) + "," + idx(j) + "," + idx(k) + ")");
                const std::map<ModelSet, ModelSet>& gki = family_for(fam.g, k, i, "g");
                const std::map<ModelSet, ModelSet>& gkj = family_for(fam.g, k, j, "g");
                const std::map<ModelSet, ModelSet>& gji = family_for(fam.g, j, i, "g");
                for (const ModelSet& m : lists[k])
                    if (image_of(gki, m, "g misses an element") !=
                        image_of(gji, image_of(gkj, m, "g misses an element"),
                                 "g misses an element"))
                        throw PreconditionError(
                            "amalgamate_over_models: matching families do not commute at (" +
                            idx(i) + "," + idx(j) + "," + idx(k) + ")");
            }

    for (std::size_t i = 0; i + 1 < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const std::string pair_tag = " for parts (" + idx(i) + "," + idx(j) + ")";
            const std::map<UOrd, UOrd>& f = family_for(fam.f, j, i, "f");
            const std::map<ModelSet, ModelSet>& g = family_for(fam.g, j, i, "g");

            if (restrict_tree(parts[i].base.tree, deltas[i]) !=
                restrict_tree(parts[j].base.tree, deltas[j]))
                throw PreconditionError(
                    "amalgamate_over_models: (1) trees disagree below the designated traces" +
                    pair_tag);

            std::vector<UOrd> hull_i, hull_j;
            for (const UOrd& eta : doms[i])
                if (sk_contains(models[i], eta)) hull_i.push_back(eta);
            for (const UOrd& eta : doms[j])
                if (sk_contains(models[j], eta)) hull_j.push_back(eta);
            if (hull_i != hull_j)
                throw PreconditionError("amalgamate_over_models: (2) hull domains disagree" +
                                        pair_tag);
            for (const UOrd& eta : hull_j)
                if (image_of(f, eta, "f misses an element") != eta)
                    throw PreconditionError(
                        "amalgamate_over_models: (2) f must fix the shared hull domain" +
                        pair_tag);

            for (const UOrd& eta : doms[j]) {
                const UOrd& feta = image_of(f, eta, "f misses an element");
                for (const ModelSet& m : lists[j]) {
                    const ModelSet& gm = image_of(g, m, "g misses an element");
                    if (sk_contains(m, eta) != sk_contains(gm, feta))
                        throw PreconditionError(
                            "amalgamate_over_models: (3) hull membership pattern broken at "
                            "index " +
                            eta.str() + pair_tag);
                }
            }

            for (const UOrd& eta : doms[j]) {
                const UOrd& feta = image_of(f, eta, "f misses an element");
                if (below_level(subtree_of(parts[i].base, feta), deltas[i]) !=
                    below_level(subtree_of(parts[j].base, eta), deltas[j]))
                    throw PreconditionError(
                        "amalgamate_over_models: (4) carrier traces disagree at index " +
                        eta.str() + pair_tag);
            }

            std::vector<ModelSet> mhull_i, mhull_j;
            for (const ModelSet& m : lists[i])
                if (sk_contains(models[i], m)) mhull_i.push_back(m);
            for (const ModelSet& m : lists[j])
                if (sk_contains(models[j], m)) mhull_j.push_back(m);
            if (mhull_i != mhull_j)
                throw PreconditionError("amalgamate_over_models: (5) hull model lists disagree" +
                                        pair_tag);
            for (const ModelSet& m : mhull_j)
                if (image_of(g, m, "g misses an element") != m)
                    throw PreconditionError(
                        "amalgamate_over_models: (5) g must fix the shared hull models" +
                        pair_tag);

            for (const ModelSet& m : lists[j]) {
                if (!(m.delta < deltas[j])) continue;
                const ModelSet& gm = image_of(g, m, "g misses an element");
                if (gm.delta != m.delta)
                    throw PreconditionError(
                        "amalgamate_over_models: (6) trace must be preserved for " +
                        canonical_key(m) + pair_tag);
                ModelSet cut = model_intersect(m, models[j]);
                if (!(cut.delta <= gm.delta && sv_subset(cut.stations, gm.stations)))
                    throw PreconditionError(
                        "amalgamate_over_models: (6) intersection with the designated model "
                        "must embed for " +
                        canonical_key(m) + pair_tag);
            }
        }

    std::vector<BaseCondition> bases;
    for (const SideCondition& p : parts) bases.push_back(p.base);
    AmalgamResult base_am;
    try {
        base_am = amalgamate_split_family(bases, deltas);
    } catch (const PreconditionError& e) {
        throw FidelityError(std::string("amalgamate_over_models: derived split-family "
                                        "hypotheses failed: ") +
                            e.what());
    }

    std::vector<ModelSet> union_models;
    for (const SideCondition& p : parts)
        union_models.insert(union_models.end(), p.models.begin(), p.models.end());
    SideAmalgamResult res;
    res.condition = SideCondition{base_am.condition, sorted_unique_models(std::move(union_models))};
    res.certificate = base_am.certificate;
    res.certificate.push_back("matching clauses (1)-(6) verified for every pair");
    if (d > 2) res.certificate.push_back("matching families commute on every triple");

    BaseReport rep = validate_side(u, res.condition);
    if (!rep.ok)
        throw FidelityError("amalgamate_over_models: amalgam failed validation: " +
                            rep.violations.front());
    for (std::size_t i = 0; i < d; ++i)
        if (!leq_side(u, res.condition, parts[i]))
            throw FidelityError("amalgamate_over_models: amalgam does not extend part " + idx(i));
    res.certificate.push_back("amalgam validates: adequacy and separation certified");
    res.certificate.push_back("amalgam extends all " + idx(d) + " parts");
    return res;
}

std::string fingerprint_key(const Fingerprint& fp) {
    std::string out = "t[";
    for (const Ordinal& x : fp.t.nodes()) out += x.str() + ",";
    out += "|";
    for (const auto& pr : fp.t.pairs()) out += pr.first.str() + "<" + pr.second.str() + ",";
    out += "]a[";
    for (const UOrd& e : fp.a) out += e.str() + ",";
    out += "]b[";
    for (const ModelSet& m : fp.b) out += canonical_key(m) + ";";
    out += "]m" + std::to_string(fp.m) + "n" + std::to_string(fp.n) + "w[";
    for (const NodeSet& ws : fp.w) {
        for (const Ordinal& x : ws) out += x.str() + ",";
        out += ";";
    }
    out += "]u0[";
    for (std::size_t k : fp.u0) out += idx(k) + ",";
    out += "]u1[";
    for (std::size_t l : fp.u1) out += idx(l) + ",";
    out += "]u2[";
    for (std::size_t l : fp.u2) out += idx(l) + ",";
    out += "]u3[";
    for (const auto& kl : fp.u3) out += idx(kl.first) + ":" + idx(kl.second) + ",";
    out += "]h0[";
    for (const Ordinal& x : fp.h0) out += x.str() + ",";
    out += "]h1[";
    for (const ModelSet& m : fp.h1) out += canonical_key(m) + ";";
    out += "]";
    return out;
}

Fingerprint fingerprint_of(const Universe& u, const SideCondition& p, const ModelSet& n) {
    BaseReport rep = validate_side(u, p);
    if (!rep.ok)
        throw PreconditionError("fingerprint_of: condition must be valid: " +
                                rep.violations.front());
    if (!list_has_model(p.models, n))
        throw PreconditionError("fingerprint_of: designated model must be listed");
    if (n.delta == Ordinal())
        throw PreconditionError("fingerprint_of: designated model needs a positive trace");
    if (!is_model_closed(u, p.models, n))
        throw PreconditionError(
            "fingerprint_of: model list must be closed under the designated model");

    const std::vector<UOrd> etas = domain_of(p.base);
    const std::vector<ModelSet> ks = sorted_unique_models(p.models);

    Fingerprint fp;
    fp.t = restrict_tree(p.base.tree, n.delta);
    fp.m = etas.size();
    fp.n = ks.size();
    for (std::size_t k = 0; k < etas.size(); ++k) {
        if (sk_contains(n, etas[k])) {
            fp.a.push_back(etas[k]);
            fp.u0.push_back(k);
        }
        fp.w.push_back(below_level(subtree_of(p.base, etas[k]), n.delta));
    }
    for (std::size_t l = 0; l < ks.size(); ++l) {
        if (sk_contains(n, ks[l])) {
            fp.b.push_back(ks[l]);
            fp.u1.push_back(l);
        }
        if (ks[l].delta < n.delta) {
            fp.u2.push_back(l);
            fp.h0.push_back(ks[l].delta);
            fp.h1.push_back(model_intersect(ks[l], n));
        }
        for (std::size_t k = 0; k < etas.size(); ++k)
            if (sk_contains(ks[l], etas[k])) fp.u3.push_back({k, l});
    }
    std::sort(fp.u3.begin(), fp.u3.end());

    Support s;
    collect_support(fp.t, s);
    for (const UOrd& e : fp.a) collect_support(e, s);
    for (const ModelSet& m : fp.b) collect_support(m, s);
    for (const NodeSet& ws : fp.w) collect_support(ws, s);
    for (const Ordinal& x : fp.h0) collect_support(x, s);
    for (const ModelSet& m : fp.h1) collect_support(m, s);
    if (!sk_contains(n, s))
        throw FidelityError("fingerprint_of: components escape the designated hull");
    return fp;
}

namespace {

std::string fingerprint_diff(const Fingerprint& x, const Fingerprint& y) {
    if (x.t != y.t) return "t";
    if (x.a != y.a) return "a";
    if (x.b != y.b) return "b";
    if (x.m != y.m) return "m";
    if (x.n != y.n) return "n";
    if (x.w != y.w) return "w";
    if (x.u0 != y.u0) return "u0";
    if (x.u1 != y.u1) return "u1";
    if (x.u2 != y.u2) return "u2";
    if (x.u3 != y.u3) return "u3";
    if (x.h0 != y.h0) return "h0";
    return "h1";
}

} // namespace

SideAmalgamResult amalgamate_by_fingerprint(const Universe& u,
                                            const std::vector<SideCondition>& parts,
                                            const std::vector<ModelSet>& models) {
    const std::size_t d = parts.size();
    if (d < 2 || models.size() != d)
        throw PreconditionError(
            "amalgamate_by_fingerprint: need matching parts and designated models, at least two");
    std::vector<Fingerprint> fps;
    for (std::size_t i = 0; i < d; ++i) fps.push_back(fingerprint_of(u, parts[i], models[i]));
    for (std::size_t i = 1; i < d; ++i)
        if (!(fps[i] == fps[0]))
            throw PreconditionError("amalgamate_by_fingerprint: fingerprints differ at component " +
                                    fingerprint_diff(fps[0], fps[i]) + " (parts 0 and " + idx(i) +
                                    ")");
    for (std::size_t i = 0; i + 1 < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (!sk_contains(models[j], parts[i]))
                throw PreconditionError("amalgamate_by_fingerprint: part " + idx(i) +
                                        " must lie in part " + idx(j) + "'s designated hull");

    std::vector<std::vector<UOrd>> doms(d);
    std::vector<std::vector<ModelSet>> lists(d);
    for (std::size_t i = 0; i < d; ++i) {
        doms[i] = domain_of(parts[i].base);
        lists[i] = sorted_unique_models(parts[i].models);
    }
    FGFamilies fam;
    for (std::size_t i = 0; i + 1 < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            for (std::size_t k = 0; k < doms[j].size(); ++k) fam.f[{j, i}][doms[j][k]] = doms[i][k];
            for (std::size_t l = 0; l < lists[j].size(); ++l)
                fam.g[{j, i}][lists[j][l]] = lists[i][l];
        }

    SideAmalgamResult res;
    try {
        res = amalgamate_over_models(u, parts, models, fam);
    } catch (const PreconditionError& e) {
        throw FidelityError(std::string("amalgamate_by_fingerprint: derived matching clauses "
                                        "failed: ") +
                            e.what());
    }

    for (std::size_t i = 0; i + 1 < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            if (sv_intersect(parts[i].base.tree.nodes(), parts[j].base.tree.nodes()) !=
                fps[0].t.nodes())
                throw FidelityError("amalgamate_by_fingerprint: tree sunflower fact failed at "
                                    "parts (" +
                                    idx(i) + "," + idx(j) + ")");
            if (sv_intersect(doms[i], doms[j]) != fps[0].a)
                throw FidelityError("amalgamate_by_fingerprint: domain sunflower fact failed at "
                                    "parts (" +
                                    idx(i) + "," + idx(j) + ")");
            if (sv_intersect(lists[i], lists[j]) != fps[0].b)
                throw FidelityError("amalgamate_by_fingerprint: model-list sunflower fact failed "
                                    "at parts (" +
                                    idx(i) + "," + idx(j) + ")");
        }
    res.certificate.push_back("fingerprints agree across all parts");
    res.certificate.push_back("sunflower facts verified: trees, domains, model lists");
    return res;
}

namespace {

// One translated copy of the condition: values below the designated trace are
// kept, values at or above it are moved into the allocation block, outside
// stations are remapped through pi.
struct HullCopier {
    const Universe& u;
    const ModelSet& n;
    Ordinal db;                // allocation trace for the copy
    std::map<int, int> pi;     // outside station -> free hull station

    Ordinal trans(const Ordinal& x) const {
        return x < n.delta ? x : db + left_diff(n.delta, x);
    }
    UOrd trans_uord(const UOrd& e) const {
        if (e.is_station()) {
            int s = e.station_index();
            if (sv_contains(n.stations, s)) return e;
            return UOrd::station(pi.at(s));
        }
        return UOrd::countable(trans(e.ordinal()));
    }
    ModelSet trans_model(const ModelSet& m) const {
        ModelSet out;
        out.delta = trans(m.delta);
        std::vector<int> st;
        for (int s : m.stations)
            sv_insert(st, sv_contains(n.stations, s) ? s : pi.at(s));
        out.stations = close_trace(u, st);
        return out;
    }
    BaseCondition trans_base(const BaseCondition& b) const {
        BaseCondition out;
        for (const Ordinal& x : b.tree.nodes()) out.tree.add_node(trans(x));
        for (const auto& pr : b.tree.pairs()) out.tree.add_pair(trans(pr.first), trans(pr.second));
        for (const UOrd& eta : domain_of(b)) {
            NodeSet ws;
            for (const Ordinal& x : subtree_of(b, eta)) sv_insert(ws, trans(x));
            out.subtrees[trans_uord(eta)] = std::move(ws);
        }
        for (const UPair& c : b.commitments)
            out.commitments.push_back(make_upair(trans_uord(c.first), trans_uord(c.second)));
        std::sort(out.commitments.begin(), out.commitments.end());
        out.commitments.erase(std::unique(out.commitments.begin(), out.commitments.end()),
                              out.commitments.end());
        return out;
    }
};

} // namespace

ReflectResult reflect_into_hull(const Universe& u, const SideCondition& q, const ModelSet& n,
                                const std::function<bool(const SideCondition&)>& constraint) {
    BaseReport qrep = validate_side(u, q);
    if (!qrep.ok)
        throw PreconditionError("reflect_into_hull: condition must be valid: " +
                                qrep.violations.front());
    if (!list_has_model(q.models, n))
        throw PreconditionError("reflect_into_hull: designated model must be listed");
    if (n.delta == Ordinal())
        throw PreconditionError("reflect_into_hull: designated model needs a positive trace");
    if (!is_model_closed(u, q.models, n))
        throw PreconditionError(
            "reflect_into_hull: model list must be closed under the designated model");

    const Ordinal dn = n.delta;
    const std::vector<UOrd> etas = domain_of(q.base);
    std::vector<ModelSet> ms;
    ms.push_back(n);
    for (const ModelSet& m : sorted_unique_models(q.models))
        if (m != n) ms.push_back(m);

    // hull-relative data of q over n, with the designated model at slot 0
    std::vector<char> idx_in_hull(etas.size(), 0);
    for (std::size_t k = 0; k < etas.size(); ++k) idx_in_hull[k] = sk_contains(n, etas[k]) ? 1 : 0;
    std::vector<char> in_u1(ms.size(), 0), in_u2(ms.size(), 0);
    std::vector<std::vector<char>> in_model(ms.size(), std::vector<char>(etas.size(), 0));
    std::vector<ModelSet> hull_cut(ms.size());
    for (std::size_t l = 0; l < ms.size(); ++l) {
        in_u1[l] = sk_contains(n, ms[l]) ? 1 : 0;
        in_u2[l] = (l > 0 && ms[l].delta < dn) ? 1 : 0;
        if (in_u2[l]) hull_cut[l] = model_intersect(ms[l], n);
        for (std::size_t k = 0; k < etas.size(); ++k)
            in_model[l][k] = sk_contains(ms[l], etas[k]) ? 1 : 0;
    }

    // split q's support at the designated trace
    Support qs = support_of(q);
    Ordinal anchor;
    bool has_high = false;
    Ordinal vmax_high;
    for (const Ordinal& x : qs.countables) {
        if (x < dn) {
            if (anchor < x) anchor = x;
        } else {
            if (!has_high || vmax_high < x) vmax_high = x;
            has_high = true;
        }
    }

    // stations of the hull-side data feed the copy's own model trace
    Support hull_sup;
    for (std::size_t k = 0; k < etas.size(); ++k)
        if (idx_in_hull[k]) collect_support(etas[k], hull_sup);
    for (std::size_t l = 0; l < ms.size(); ++l) {
        if (in_u1[l]) collect_support(ms[l], hull_sup);
        if (in_u2[l]) collect_support(hull_cut[l], hull_sup);
    }
    const std::vector<int> s0 = close_trace(u, hull_sup.stations);

    std::vector<int> outside, pool;
    for (int s : qs.stations)
        if (!sv_contains(n.stations, s)) outside.push_back(s);
    for (int s : n.stations)
        if (!sv_contains(s0, s)) pool.push_back(s);

    ReflectResult out;
    if (outside.size() > pool.size()) {
        out.log = "the hull has too few free stations to host the condition's outside stations";
        return out;
    }
    HullCopier copier{u, n, Ordinal(), {}};
    for (std::size_t i = 0; i < outside.size(); ++i) copier.pi[outside[i]] = pool[i];

    std::vector<std::string> trail;
    for (const Ordinal& db : u.deltas()) {
        if (!(anchor < db) || !(db < dn)) continue;
        if (has_high && !(db + left_diff(dn, vmax_high) < dn)) continue;
        copier.db = db;

        SideCondition qbar;
        qbar.base = copier.trans_base(q.base);
        std::vector<ModelSet> mbars(ms.size());
        mbars[0] = ModelSet{db, s0};
        for (std::size_t l = 1; l < ms.size(); ++l) mbars[l] = copier.trans_model(ms[l]);
        for (const ModelSet& m : mbars) qbar.models.push_back(m);
        qbar.models = sorted_unique_models(std::move(qbar.models));

        // the thirteen matching clauses, first failure recorded per candidate
        std::string why;
        const std::vector<UOrd> bar_etas = [&] {
            std::vector<UOrd> v;
            for (const UOrd& eta : etas) v.push_back(copier.trans_uord(eta));
            return v;
        }();
        auto check = [&]() -> std::string {
            if (!sk_contains(n, qbar)) return "copy escapes the designated hull";
            BaseReport rep = validate_side(u, qbar);
            if (!rep.ok) return "(1) copy invalid: " + rep.violations.front();
            if (constraint && !constraint(qbar)) return "(1) constraint rejected the copy";
            if (qbar.models.size() != ms.size()) return "(2) translated models collide";
            if (domain_of(qbar.base).size() != etas.size())
                return "(2) translated indices collide";
            if (restrict_tree(qbar.base.tree, db) != restrict_tree(q.base.tree, dn))
                return "(4) low tree disagrees";
            for (std::size_t k = 0; k < etas.size(); ++k)
                if (idx_in_hull[k] && bar_etas[k] != etas[k]) return "(5) hull index moved";
            for (std::size_t l = 0; l < ms.size(); ++l)
                for (std::size_t k = 0; k < etas.size(); ++k)
                    if ((sk_contains(mbars[l], bar_etas[k]) ? 1 : 0) != in_model[l][k])
                        return "(6) membership pattern broken at index " + etas[k].str() +
                               " model " + idx(l);
            for (std::size_t k = 0; k < etas.size(); ++k)
                if ((sk_contains(mbars[0], bar_etas[k]) ? 1 : 0) != idx_in_hull[k])
                    return "(7) hull domain mismatch at index " + etas[k].str();
            for (std::size_t k = 0; k < etas.size(); ++k)
                if (below_level(subtree_of(qbar.base, bar_etas[k]), db) !=
                    below_level(subtree_of(q.base, etas[k]), dn))
                    return "(8) carrier trace disagrees at index " + etas[k].str();
            for (std::size_t l = 0; l < ms.size(); ++l)
                if ((sk_contains(mbars[0], mbars[l]) ? 1 : 0) != in_u1[l])
                    return "(9) hull model list mismatch at model " + idx(l);
            for (std::size_t l = 0; l < ms.size(); ++l)
                if (in_u1[l] && mbars[l] != ms[l]) return "(10) hull model moved at " + idx(l);
            for (std::size_t l = 0; l < ms.size(); ++l)
                if (in_u2[l]) {
                    if (mbars[l].delta != ms[l].delta)
                        return "(11) trace not preserved at model " + idx(l);
                    if (!sv_subset(hull_cut[l].stations, mbars[l].stations))
                        return "(11) hull intersection does not embed at model " + idx(l);
                }
            for (std::size_t l = 1; l < ms.size(); ++l)
                if ((mbars[l].delta < db ? 1 : 0) != in_u2[l])
                    return "(12) trace order broken at model " + idx(l);
            for (std::size_t l = 0; l < ms.size(); ++l)
                if (in_u2[l] &&
                    !list_has_model(qbar.models, model_intersect(mbars[l], mbars[0])))
                    return "(13) hull intersection missing from the copy at model " + idx(l);
            return "";
        };
        why = check();
        if (why.empty()) {
            FGFamilies fam;
            for (std::size_t k = 0; k < etas.size(); ++k) fam.f[{1, 0}][etas[k]] = bar_etas[k];
            for (std::size_t l = 0; l < ms.size(); ++l) fam.g[{1, 0}][ms[l]] = mbars[l];
            try {
                SideAmalgamResult am =
                    amalgamate_over_models(u, {qbar, q}, {mbars[0], n}, fam);
                out.found = true;
                out.witness = qbar;
                out.combined = am.condition;
                trail.push_back("trace " + db.str() + ": accepted");
                for (const std::string& line : trail) {
                    if (!out.log.empty()) out.log += "; ";
                    out.log += line;
                }
                return out;
            } catch (const PreconditionError& e) {
                why = std::string("amalgam rejected: ") + e.what();
            } catch (const FidelityError& e) {
                why = std::string("amalgam certification failed: ") + e.what();
            }
        }
        trail.push_back("trace " + db.str() + ": " + why);
    }
    if (trail.empty())
        out.log = "no allocation trace below the designated model fits the condition's data";
    else
        for (const std::string& line : trail) {
            if (!out.log.empty()) out.log += "; ";
            out.log += line;
        }
    return out;
}

} // namespace treelab
