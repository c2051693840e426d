#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>
#include <string>
#include <vector>

#include "treelab/generate.hpp"
#include "treelab/rng.hpp"
#include "treelab/set_util.hpp"
#include "treelab/side.hpp"

using namespace treelab;

namespace {

Ordinal level(uint64_t k) { return Ordinal::omega_pow(Ordinal::omega(), k); }

// Seven stations: clubs s0,s1,s4; cuts s2,s5; reflection s5; plain s3,s6.
Universe test_universe() {
    UniverseConfig cfg;
    cfg.pattern.resize(7);
    cfg.pattern[0].in_lambda0 = true;
    cfg.pattern[1].in_lambda0 = true;
    cfg.pattern[2].cof_gt_omega = true;
    cfg.pattern[2].in_lambda = true;
    cfg.pattern[4].in_lambda0 = true;
    cfg.pattern[5].cof_gt_omega = true;
    cfg.pattern[5].in_lambda = true;
    cfg.pattern[5].in_sigma = true;
    return build_universe(cfg);
}

ModelSet model(uint64_t lv, std::vector<int> stations) {
    ModelSet m;
    m.delta = level(lv);
    m.stations = std::move(stations);
    return m;
}

// Hull membership spelled out directly, bypassing the support machinery.
bool naive_member(const ModelSet& m, const UOrd& e) {
    if (e.is_station()) return sv_contains(m.stations, e.station_index());
    return e.ordinal() == Ordinal() || e.ordinal() < m.delta;
}

// Independent separation oracle: loops and explicit membership only.
bool naive_separated(const BaseCondition& base, const std::vector<ModelSet>& models) {
    std::vector<UOrd> dom = domain_of(base);
    for (const ModelSet& m : models)
        for (std::size_t i = 0; i < dom.size(); ++i) {
            if (!naive_member(m, dom[i])) continue;
            for (std::size_t j = i + 1; j < dom.size(); ++j) {
                if (!naive_member(m, dom[j])) continue;
                for (const Ordinal& x : subtree_of(base, dom[i]))
                    if (sv_contains(subtree_of(base, dom[j]), x) &&
                        !(x == Ordinal() || x < m.delta))
                        return false;
            }
        }
    return true;
}

// Chain tree 0 < w < w^w + w with two low indices carrying the whole chain;
// the top node escapes a trace-1 hull but not a trace-2 one.
SideCondition straddling_pair(uint64_t lv) {
    SideCondition p;
    Ordinal a = Ordinal::omega();
    Ordinal b = level(1) + Ordinal::omega();
    p.base.tree.add_node(Ordinal());
    p.base.tree.add_node(a);
    p.base.tree.add_node(b);
    p.base.tree.add_pair(Ordinal(), a);
    p.base.tree.add_pair(Ordinal(), b);
    p.base.tree.add_pair(a, b);
    NodeSet carrier = {Ordinal(), a, b};
    p.base.subtrees[UOrd::countable(Ordinal::nat(1))] = carrier;
    p.base.subtrees[UOrd::countable(Ordinal::nat(2))] = carrier;
    p.models.push_back(model(lv, {}));
    return p;
}

// Single-node tree with one bare private node at the given value's height.
SideCondition lone_node(const Ordinal& x) {
    SideCondition p;
    p.base.tree.add_node(Ordinal());
    p.base.tree.add_node(x);
    p.base.tree.add_pair(Ordinal(), x);
    return p;
}

template <typename E>
bool throws_with(const std::string& needle, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const E& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    } catch (...) {
        return false;
    }
    return false;
}

} // namespace

TEST_CASE("separation clause and full validation") {
    Universe u = test_universe();

    SideCondition empty;
    CHECK(validate_side(u, empty).ok);
    CHECK(a_separation_violation(empty.base, empty.models).empty());

    // shared node at or above the trace: both indices sit inside the hull
    SideCondition bad = straddling_pair(1);
    std::string v = a_separation_violation(bad.base, bad.models);
    CHECK_MESSAGE(v.find("separation") != std::string::npos, v);
    CHECK_FALSE(validate_side(u, bad).ok);
    CHECK_FALSE(naive_separated(bad.base, bad.models));

    // the same data under a higher trace is separated
    SideCondition good = straddling_pair(2);
    CHECK(validate_side(u, good).ok);
    CHECK(naive_separated(good.base, good.models));

    // valid base, non-adequate model list
    SideCondition inad;
    inad.models = {model(2, {0}), model(2, {0, 1})};
    BaseReport rep = validate_side(u, inad);
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.violations.empty());

    // generated conditions validate and agree with the oracle
    Rng rng(71);
    for (int it = 0; it < 30; ++it) {
        Universe gu = gen_universe(rng);
        SideCondition p = gen_side(rng, gu);
        CHECK(validate_side(gu, p).ok);
        CHECK(naive_separated(p.base, p.models) ==
              a_separation_violation(p.base, p.models).empty());
    }
}

TEST_CASE("extension order") {
    Universe u = test_universe();
    Rng rng(72);
    Universe gu = gen_universe(rng);

    SideCondition p = gen_side(rng, gu);
    CHECK(leq_side(gu, p, p));

    REQUIRE(p.models.size() >= 2);
    SideCondition q = p;
    q.models.pop_back();
    REQUIRE(validate_side(gu, q).ok);
    CHECK(leq_side(gu, p, q));
    CHECK_FALSE(leq_side(gu, q, p));

    SideCondition inad;
    inad.models = {model(2, {0}), model(2, {0, 1})};
    CHECK_THROWS_AS((void)leq_side(u, inad, p), PreconditionError);

    // planted extension chain through add_model: transitive
    Rng rng2(73);
    SideFamily fam = gen_fingerprint_family(rng2, gu, 2);
    SideCondition p0 = fam.parts[0];
    SideCondition p1 = add_model(gu, p0, fam.designated[1]);
    ModelSet top{level(3), fam.designated[0].stations};
    SideCondition p2 = add_model(gu, p1, top);
    CHECK(leq_side(gu, p1, p0));
    CHECK(leq_side(gu, p2, p1));
    CHECK(leq_side(gu, p2, p0));
}

TEST_CASE("normalization") {
    Universe u = test_universe();

    // already normal: root carrier under one model
    SideCondition p;
    p.base.tree.add_node(Ordinal());
    p.base.tree.add_node(Ordinal::omega());
    p.base.tree.add_pair(Ordinal(), Ordinal::omega());
    p.base.subtrees[UOrd::countable(Ordinal::nat(1))] = {Ordinal()};
    p.models = {model(2, {})};
    CHECK(normalize_side(u, p) == p);

    // generated base with one model: base normalized, models kept, separation
    // certified and re-checked by the oracle
    Rng rng(74);
    for (int it = 0; it < 30; ++it) {
        SideCondition c;
        c.base = gen_base(rng);
        c.models = {model(2, {})};
        REQUIRE(validate_side(u, c).ok);
        SideCondition n = normalize_side(u, c);
        CHECK(n.base == normalize_base(c.base));
        CHECK(n.models == c.models);
        CHECK(validate_side(u, n).ok);
        CHECK(naive_separated(n.base, n.models));
        CHECK(normalize_side(u, n) == n);
    }
}

TEST_CASE("adjoining a model") {
    Universe u = test_universe();

    // empty condition, any model
    SideCondition empty;
    ModelSet n = model(1, {});
    SideCondition grown = add_model(u, empty, n);
    CHECK(grown.models == std::vector<ModelSet>{n});
    CHECK(validate_side(u, grown).ok);
    CHECK(leq_side(u, grown, empty));

    // planted condition inside the hull, then the closure pipeline lands in
    // the fingerprint domain
    Rng rng(75);
    Universe gu = gen_universe(rng);
    SideFamily fam = gen_fingerprint_family(rng, gu, 2);
    SideCondition q = add_model(gu, fam.parts[0], fam.designated[1]);
    CHECK(validate_side(gu, q).ok);
    CHECK(leq_side(gu, q, fam.parts[0]));
    SideCondition closed = closure_extend(gu, q, fam.designated[1]);
    CHECK_NOTHROW((void)fingerprint_of(gu, closed, fam.designated[1]));

    // condition outside the hull is rejected
    CHECK_THROWS_AS((void)add_model(gu, fam.parts[0], fam.designated[0]), PreconditionError);
    // invalid model is rejected
    CHECK(throws_with<PreconditionError>("club", [&] { (void)add_model(u, empty, model(1, {3})); }));
}

TEST_CASE("closure extension") {
    Universe u = test_universe();

    // already closed: identity
    SideCondition single;
    single.models = {model(2, {})};
    CHECK(closure_extend(u, single, model(2, {})) == single);

    // two models with a proper intersection: three models, still valid
    SideCondition p;
    p.models = {model(1, {0, 1, 3}), model(2, {0, 1})};
    SideCondition c = closure_extend(u, p, model(2, {0, 1}));
    CHECK(c.models.size() == 3);
    CHECK(sv_contains(c.models, model(1, {0, 1})));
    CHECK(validate_side(u, c).ok);
    CHECK(leq_side(u, c, p));

    // cut closure after model closure keeps both closure properties
    SideCondition w;
    w.models = {model(1, {0, 1, 3, 4, 6}), model(2, {0, 1, 3, 4})};
    SideCondition a = closure_extend(u, w, model(2, {0, 1, 3, 4}));
    SideCondition b = closure_extend(u, a, 2);
    CHECK(validate_side(u, b).ok);
    CHECK(is_model_closed(u, b.models, model(2, {0, 1, 3, 4})));
    CHECK(is_cut_closed(u, b.models, 2));
    CHECK(leq_side(u, b, a));
    CHECK(leq_side(u, b, w));

    // a plain station is not a cut
    CHECK_THROWS_AS((void)closure_extend(u, p, 3), PreconditionError);
}

TEST_CASE("componentwise union") {
    Universe u = test_universe();
    Rng rng(76);
    Universe gu = gen_universe(rng);

    SideCondition p = gen_side(rng, gu);
    CHECK(merge_side({p, p}) == p);

    SideFamily fam = gen_fingerprint_family(rng, gu, 2);
    SideCondition merged = merge_side(fam.parts);
    CHECK(validate_side(gu, merged).ok);

    // clashing pair: the shared top node ends up above two incomparable
    // height-one nodes, so the union tree loses chain linearity
    SideCondition x, y;
    Ordinal top = omega_times(Ordinal::nat(2)); // w*2
    for (SideCondition* s : {&x, &y}) s->base.tree.add_node(Ordinal());
    x.base.tree.add_node(Ordinal::omega());
    x.base.tree.add_node(top);
    x.base.tree.add_pair(Ordinal(), Ordinal::omega());
    x.base.tree.add_pair(Ordinal(), top);
    x.base.tree.add_pair(Ordinal::omega(), top);
    Ordinal other = Ordinal::omega() + Ordinal::nat(1); // w+1
    y.base.tree.add_node(other);
    y.base.tree.add_node(top);
    y.base.tree.add_pair(Ordinal(), other);
    y.base.tree.add_pair(Ordinal(), top);
    y.base.tree.add_pair(other, top);
    REQUIRE(validate_side(u, x).ok);
    REQUIRE(validate_side(u, y).ok);
    CHECK_FALSE(validate_side(u, merge_side({x, y})).ok);
}

TEST_CASE("extension-transfer criterion") {
    Universe u = test_universe();
    Rng rng(77);
    Universe gu = gen_universe(rng);
    SideFamily fam = gen_fingerprint_family(rng, gu, 2);

    SideAmalgamResult am = amalgamate_by_fingerprint(gu, fam.parts, fam.designated);
    UnionCheckVerdict v = merge_leq_criterion(gu, fam.parts, am.condition);
    CHECK(v.hypotheses_hold);
    CHECK(v.conclusion_checked);
    CHECK(v.conclusion_holds);

    // a strictly deeper extension still satisfies the criterion
    ModelSet big{level(4), fam.designated[0].stations};
    SideCondition deeper = add_model(gu, am.condition, big);
    UnionCheckVerdict v2 = merge_leq_criterion(gu, fam.parts, deeper);
    CHECK(v2.hypotheses_hold);
    CHECK(v2.conclusion_holds);

    // a part alone does not extend the other part: hypotheses fail
    UnionCheckVerdict v3 = merge_leq_criterion(gu, fam.parts, fam.parts[0]);
    CHECK_FALSE(v3.hypotheses_hold);
    CHECK_FALSE(v3.conclusion_checked);
    CHECK_MESSAGE(v3.detail.find("hypotheses fail") != std::string::npos, v3.detail);

    // planted: a candidate ordering two cross-private nodes is caught and the
    // transfer conclusion genuinely fails for it
    SideCondition p0 = lone_node(Ordinal::omega());
    SideCondition p1 = lone_node(omega_times(Ordinal::nat(2)));
    SideCondition merged = merge_side({p0, p1});
    REQUIRE(validate_side(u, merged).ok);
    REQUIRE(leq_side(u, merged, p0));
    REQUIRE(leq_side(u, merged, p1));
    SideCondition r = merged;
    r.base.tree.add_pair(Ordinal::omega(), omega_times(Ordinal::nat(2)));
    REQUIRE(validate_side(u, r).ok);
    UnionCheckVerdict v4 = merge_leq_criterion(u, {p0, p1}, r);
    CHECK_FALSE(v4.hypotheses_hold);
    CHECK_MESSAGE(v4.detail.find("comparable") != std::string::npos, v4.detail);
    CHECK_FALSE(leq_side(u, r, merged));
}

TEST_CASE("model-indexed amalgamation") {
    Rng rng(78);
    Universe gu = gen_universe(rng);
    SideFamily fam = gen_fingerprint_family(rng, gu, 2);

    // positional families between the two copies: certified merge
    FGFamilies maps;
    std::vector<UOrd> dom0 = domain_of(fam.parts[0].base);
    std::vector<UOrd> dom1 = domain_of(fam.parts[1].base);
    for (std::size_t k = 0; k < dom1.size(); ++k) maps.f[{1, 0}][dom1[k]] = dom0[k];
    maps.g[{1, 0}][fam.designated[1]] = fam.designated[0];
    SideAmalgamResult res = amalgamate_over_models(gu, fam.parts, fam.designated, maps);
    CHECK(res.condition == merge_side(fam.parts));
    CHECK(validate_side(gu, res.condition).ok);
    CHECK(leq_side(gu, res.condition, fam.parts[0]));
    CHECK(leq_side(gu, res.condition, fam.parts[1]));
    bool has_clause_line = false;
    for (const std::string& line : res.certificate)
        if (line.find("matching clauses") != std::string::npos) has_clause_line = true;
    CHECK(has_clause_line);

    // merging a condition with itself is rejected: the designated models
    // cannot lie inside each other's hulls
    FGFamilies id;
    for (const UOrd& eta : dom0) id.f[{1, 0}][eta] = eta;
    id.g[{1, 0}][fam.designated[0]] = fam.designated[0];
    CHECK_THROWS_AS((void)amalgamate_over_models(gu, {fam.parts[0], fam.parts[0]},
                                                 {fam.designated[0], fam.designated[0]}, id),
                    PreconditionError);

    // broken carrier trace on a hull index is named as clause (4)
    SideFamily fam2 = gen_fingerprint_family(rng, gu, 2);
    SideCondition mutant = fam2.parts[1];
    mutant.base.subtrees[domain_of(mutant.base)[0]] = {};
    FGFamilies maps2;
    std::vector<UOrd> d0 = domain_of(fam2.parts[0].base);
    std::vector<UOrd> d1 = domain_of(mutant.base);
    for (std::size_t k = 0; k < d1.size(); ++k) maps2.f[{1, 0}][d1[k]] = d0[k];
    maps2.g[{1, 0}][fam2.designated[1]] = fam2.designated[0];
    CHECK(throws_with<PreconditionError>("(4)", [&] {
        (void)amalgamate_over_models(gu, {fam2.parts[0], mutant}, fam2.designated, maps2);
    }));
}

TEST_CASE("fingerprints") {
    Universe u = test_universe();
    ModelSet n = model(2, {0, 1});

    // direct evaluation on the bare condition listing only the model
    SideCondition p;
    p.models = {n};
    Fingerprint fp = fingerprint_of(u, p, n);
    CHECK(fp.t.empty());
    CHECK(fp.a.empty());
    CHECK(fp.b.empty());
    CHECK(fp.m == 0);
    CHECK(fp.n == 1);
    CHECK(fp.w.empty());
    CHECK(fp.u0.empty());
    CHECK(fp.u1.empty());
    CHECK(fp.u2.empty());
    CHECK(fp.u3.empty());
    CHECK(fp.h0.empty());
    CHECK(fp.h1.empty());

    // a countable index below the trace joins the hull components
    SideCondition q = p;
    q.base.tree.add_node(Ordinal());
    q.base.subtrees[UOrd::countable(Ordinal::nat(1))] = {Ordinal()};
    Fingerprint fq = fingerprint_of(u, q, n);
    CHECK(fq.m == 1);
    CHECK(fq.u0 == std::vector<std::size_t>{0});
    CHECK(fq.a == std::vector<UOrd>{UOrd::countable(Ordinal::nat(1))});
    using PairList = std::vector<std::pair<std::size_t, std::size_t>>;
    CHECK(fq.w == std::vector<NodeSet>{{Ordinal()}});
    CHECK(fq.u3 == PairList{{0, 0}});
    CHECK(fingerprint_key(fq) != fingerprint_key(fp));
    CHECK(fingerprint_key(fq) == fingerprint_key(fingerprint_of(u, q, n)));

    // an index at or above the trace stays out of the hull components
    SideCondition r = p;
    r.base.subtrees[UOrd::countable(level(2) + Ordinal::nat(1))] = {};
    Fingerprint fr = fingerprint_of(u, r, n);
    CHECK(fr.m == 1);
    CHECK(fr.u0.empty());
    CHECK(fr.a.empty());
    CHECK(fr.u3.empty());

    // domain violations
    CHECK_THROWS_AS((void)fingerprint_of(u, p, model(3, {})), PreconditionError);
    SideCondition unclosed;
    unclosed.models = {model(1, {0, 1, 3}), model(2, {0, 1})};
    REQUIRE(validate_side(u, unclosed).ok);
    CHECK(throws_with<PreconditionError>("closed", [&] {
        (void)fingerprint_of(u, unclosed, model(2, {0, 1}));
    }));
}

TEST_CASE("fingerprint amalgamation") {
    Rng rng(79);
    Universe gu = gen_universe(rng);

    // two translated copies: certified, extends both, sunflower facts match
    SideFamily fam = gen_fingerprint_family(rng, gu, 2);
    SideAmalgamResult res = amalgamate_by_fingerprint(gu, fam.parts, fam.designated);
    CHECK(validate_side(gu, res.condition).ok);
    CHECK(leq_side(gu, res.condition, fam.parts[0]));
    CHECK(leq_side(gu, res.condition, fam.parts[1]));
    Fingerprint fp = fingerprint_of(gu, fam.parts[0], fam.designated[0]);
    CHECK(sv_intersect(fam.parts[0].base.tree.nodes(), fam.parts[1].base.tree.nodes()) ==
          fp.t.nodes());
    CHECK(sv_intersect(domain_of(fam.parts[0].base), domain_of(fam.parts[1].base)) == fp.a);
    bool has_sunflower_line = false;
    for (const std::string& line : res.certificate)
        if (line.find("sunflower") != std::string::npos) has_sunflower_line = true;
    CHECK(has_sunflower_line);

    // chain of three copies
    SideFamily fam3 = gen_fingerprint_family(rng, gu, 3);
    SideAmalgamResult res3 = amalgamate_by_fingerprint(gu, fam3.parts, fam3.designated);
    for (std::size_t i = 0; i < 3; ++i) CHECK(leq_side(gu, res3.condition, fam3.parts[i]));

    // fingerprints from unrelated shapes are rejected
    Rng other(123);
    SideFamily famA = gen_fingerprint_family(other, gu, 2);
    CHECK(throws_with<PreconditionError>("fingerprints differ", [&] {
        (void)amalgamate_by_fingerprint(gu, {famA.parts[0], fam.parts[1]},
                                        {famA.designated[0], fam.designated[1]});
    }));
}

TEST_CASE("fingerprint mismatch pinpoints the membership pattern") {
    Universe u = test_universe();

    // everything matches except whether the station index sits inside the
    // second listed model
    SideCondition p0, p1;
    for (SideCondition* s : {&p0, &p1}) {
        s->base.tree.add_node(Ordinal());
        s->base.subtrees[UOrd::station(3)] = {};
    }
    p0.models = {model(1, {0, 1, 3}), model(2, {0, 1, 3})};
    p1.models = {model(4, {0, 1, 3}), model(5, {0, 1})};
    ModelSet n0 = model(1, {0, 1, 3});
    ModelSet n1 = model(4, {0, 1, 3});
    REQUIRE(validate_side(u, p0).ok);
    REQUIRE(validate_side(u, p1).ok);
    Fingerprint f0 = fingerprint_of(u, p0, n0);
    Fingerprint f1 = fingerprint_of(u, p1, n1);
    CHECK(f0.a == f1.a);
    CHECK(f0.u0 == f1.u0);
    CHECK(f0.u3 != f1.u3);
    CHECK(throws_with<PreconditionError>("u3", [&] {
        (void)amalgamate_by_fingerprint(u, {p0, p1}, {n0, n1});
    }));
}

TEST_CASE("hull reflection") {
    Universe u = test_universe();

    // condition already inside the hull: the copy keeps the base verbatim
    SideCondition q;
    q.base.tree.add_node(Ordinal());
    q.base.tree.add_node(Ordinal::omega());
    q.base.tree.add_pair(Ordinal(), Ordinal::omega());
    q.base.subtrees[UOrd::countable(Ordinal::nat(1))] = {Ordinal()};
    q.models = {model(2, {})};
    ReflectResult triv = reflect_into_hull(u, q, model(2, {}));
    REQUIRE_MESSAGE(triv.found, triv.log);
    CHECK(triv.witness.base == q.base);
    CHECK(triv.witness.models == std::vector<ModelSet>{model(1, {})});
    CHECK(leq_side(u, triv.combined, q));
    CHECK(leq_side(u, triv.combined, triv.witness));

    // planted instances always recover a witness
    Rng rng(80);
    for (int it = 0; it < 15; ++it) {
        Universe gu = gen_universe(rng);
        ReflectInstance inst = gen_reflect_instance(rng, gu);
        ReflectResult r = reflect_into_hull(gu, inst.q, inst.n);
        REQUIRE_MESSAGE(r.found, r.log);
        CHECK(validate_side(gu, r.witness).ok);
        CHECK(sk_contains(inst.n, r.witness));
        CHECK(leq_side(gu, r.combined, inst.q));
        CHECK(leq_side(gu, r.combined, r.witness));
    }

    // no allocation trace below the smallest designated model
    SideCondition starve;
    starve.models = {model(1, {})};
    ReflectResult none = reflect_into_hull(u, starve, model(1, {}));
    CHECK_FALSE(none.found);
    CHECK_MESSAGE(none.log.find("no allocation trace") != std::string::npos, none.log);

    // the constraint predicate gates acceptance
    Rng rng2(81);
    Universe gu2 = gen_universe(rng2);
    ReflectInstance inst = gen_reflect_instance(rng2, gu2);
    ReflectResult vetoed =
        reflect_into_hull(gu2, inst.q, inst.n, [](const SideCondition&) { return false; });
    CHECK_FALSE(vetoed.found);
    CHECK_MESSAGE(vetoed.log.find("constraint") != std::string::npos, vetoed.log);
    ReflectResult gated = reflect_into_hull(gu2, inst.q, inst.n, [](const SideCondition& c) {
        return !c.base.tree.empty();
    });
    CHECK_MESSAGE(gated.found, gated.log);
}

TEST_CASE("kernel selections across pools") {
    Rng rng(82);
    for (int d = 2; d <= 4; ++d) {
        Universe gu = gen_universe(rng);
        SideFamily fam = gen_fingerprint_family(rng, gu, d);
        SideAmalgamResult res = amalgamate_by_fingerprint(gu, fam.parts, fam.designated);
        for (int i = 0; i < d; ++i)
            REQUIRE_MESSAGE(leq_side(gu, res.condition, fam.parts[static_cast<size_t>(i)]),
                            ("chained amalgam must extend pool representative " +
                             std::to_string(i)));
    }
}
