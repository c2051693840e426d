#include "treelab/generate.hpp"

#include <algorithm>

#include "treelab/errors.hpp"
#include "treelab/set_util.hpp"

namespace treelab {

namespace {

// Child one height above the parent, wired above the parent's whole chain.
void grow_graded(FiniteTree& t, Rng& rng) {
    Ordinal parent = rng.pick(t.nodes());
    Ordinal child = alloc_node(t.nodes(), succ(height_of(parent)));
    NodeSet chain = t.strictly_below(parent);
    t.add_node(child);
    t.add_pair(parent, child);
    for (const auto& u : chain) t.add_pair(u, child);
}

// Child up to max_jump heights above the parent; keeps standardness but may
// skip realized heights.
void grow_sparse(FiniteTree& t, Rng& rng, int max_jump) {
    Ordinal parent = rng.pick(t.nodes());
    Ordinal h = height_of(parent);
    int jump = rng.range(1, max_jump);
    for (int j = 0; j < jump; ++j) h = succ(h);
    Ordinal child = alloc_node(t.nodes(), h);
    NodeSet chain = t.strictly_below(parent);
    t.add_node(child);
    t.add_pair(parent, child);
    for (const auto& u : chain) t.add_pair(u, child);
}

Ordinal lvl(uint64_t k) { return omega_times(Ordinal::nat(k)); }
Ordinal node_at(uint64_t k, uint64_t i) { return lvl(k) + Ordinal::nat(i); }

} // namespace

FiniteTree gen_tree(Rng& rng, const TreeGenConfig& cfg) {
    FiniteTree t;
    t.add_node(Ordinal::nat(0));
    for (int i = 0; i < cfg.extra_nodes; ++i) {
        if (cfg.graded) grow_graded(t, rng);
        else grow_sparse(t, rng, cfg.max_jump);
    }
    return t;
}

FiniteTree gen_tree_mutant(Rng&, const std::string& clause) {
    FiniteTree t;
    if (clause == "domain") {
        t.add_node(Ordinal::nat(0));
        t.add_node(Ordinal::nat(3));
        t.add_pair(Ordinal::nat(0), Ordinal::nat(3));
        return t;
    }
    if (clause == "root") {
        t.add_node(Ordinal::nat(0));
        t.add_node(node_at(1, 0));
        t.add_node(node_at(1, 1));
        t.add_pair(Ordinal::nat(0), node_at(1, 0));
        return t; // second height-1 node is not above the root
    }
    if (clause == "linearity") {
        t.add_node(Ordinal::nat(0));
        t.add_node(node_at(1, 0));
        t.add_node(node_at(1, 1));
        t.add_node(node_at(2, 0));
        t.add_pair(Ordinal::nat(0), node_at(1, 0));
        t.add_pair(Ordinal::nat(0), node_at(1, 1));
        t.add_pair(Ordinal::nat(0), node_at(2, 0));
        t.add_pair(node_at(1, 0), node_at(2, 0));
        t.add_pair(node_at(1, 1), node_at(2, 0)); // two incomparable predecessors
        return t;
    }
    if (clause == "monotone") {
        t.add_node(Ordinal::nat(0));
        t.add_node(node_at(1, 1));
        t.add_node(node_at(2, 0));
        t.add_pair(Ordinal::nat(0), node_at(1, 1));
        t.add_pair(Ordinal::nat(0), node_at(2, 0));
        t.add_pair(node_at(2, 0), node_at(1, 1)); // height drops along the order
        return t;
    }
    if (clause == "closure") {
        t.add_node(Ordinal::nat(0));
        t.add_node(node_at(1, 0));
        t.add_node(node_at(2, 0));
        t.add_pair(Ordinal::nat(0), node_at(1, 0));
        t.add_pair(Ordinal::nat(0), node_at(2, 0)); // height 1 realized, none below
        return t;
    }
    if (clause == "splits") {
        t.add_node(Ordinal::nat(0));
        t.add_node(node_at(2, 0));
        t.add_node(node_at(2, 1));
        t.add_pair(Ordinal::nat(0), node_at(2, 0));
        t.add_pair(Ordinal::nat(0), node_at(2, 1)); // no height-1 split witnesses
        return t;
    }
    throw PreconditionError("gen_tree_mutant: unknown clause " + clause);
}

BaseCondition gen_base(Rng& rng, const BaseGenConfig& cfg) {
    BaseCondition p;
    TreeGenConfig tc;
    tc.extra_nodes = cfg.extra_nodes;
    tc.graded = cfg.graded;
    p.tree = gen_tree(rng, tc);

    std::vector<UOrd> dom;
    for (int i = 0; i < cfg.indices; ++i)
        dom.push_back(UOrd::countable(Ordinal::nat(1 + static_cast<uint64_t>(i))));
    for (int i = 0; i < cfg.stations; ++i) dom.push_back(UOrd::station(i));
    for (const auto& eta : dom) {
        NodeSet mask;
        for (const auto& x : p.tree.nodes())
            if (rng.chance(cfg.carrier_density)) mask.push_back(x);
        p.subtrees[eta] = downward_closure_in(p.tree, mask);
    }
    if (dom.size() >= 2) {
        for (int c = 0; c < cfg.commitments; ++c) {
            uint64_t a = rng.below(dom.size());
            uint64_t b = rng.below(dom.size());
            if (a == b) continue;
            sv_insert(p.commitments, make_upair(dom[a], dom[b]));
        }
    }
    return p;
}

SplitFamily gen_split_family(Rng& rng, const SplitFamilyConfig& cfg) {
    if (cfg.d < 2) throw PreconditionError("gen_split_family: need d >= 2");

    // Shared restriction: a graded tree whose nodes all sit below the first level.
    TreeGenConfig tc;
    tc.extra_nodes = cfg.shared_extra_nodes;
    FiniteTree shared = gen_tree(rng, tc);

    // Chain templates: attach point in the shared part plus a length.
    std::vector<Ordinal> attach;
    for (int c = 0; c < cfg.private_chains; ++c)
        attach.push_back(rng.pick(shared.nodes()));

    // Shared carrier per root index; fold in the attach chain so the private
    // extension stays downward-closed without adding shared nodes later.
    std::vector<UOrd> root_dom;
    std::vector<NodeSet> root_trace;
    for (int j = 0; j < cfg.root_indices; ++j) {
        root_dom.push_back(UOrd::countable(Ordinal::nat(1 + static_cast<uint64_t>(j))));
        NodeSet mask;
        for (const auto& x : shared.nodes())
            if (rng.chance(0.4)) mask.push_back(x);
        if (j < cfg.private_chains) sv_insert(mask, attach[static_cast<size_t>(j)]);
        root_trace.push_back(downward_closure_in(shared, mask));
    }

    // Template choices are made once and translated into every part, so the
    // parts are honest copies: equal restriction trees, equal carrier traces,
    // and the same commitment pattern over corresponding domain positions.
    std::vector<NodeSet> priv_shared_mask(static_cast<size_t>(cfg.private_indices));
    std::vector<std::vector<std::pair<int, int>>> priv_chain_mask(
        static_cast<size_t>(cfg.private_indices));
    for (int j = 0; j < cfg.private_indices; ++j) {
        for (const auto& x : shared.nodes())
            if (rng.chance(0.4)) priv_shared_mask[static_cast<size_t>(j)].push_back(x);
        for (int c = 0; c < cfg.private_chains; ++c)
            for (int k = 1; k <= cfg.private_chain_len; ++k)
                if (rng.chance(0.4))
                    priv_chain_mask[static_cast<size_t>(j)].emplace_back(c, k);
    }
    std::vector<std::pair<uint64_t, uint64_t>> commit_slots;
    {
        size_t dom_size = root_dom.size() + static_cast<size_t>(cfg.private_indices);
        if (dom_size >= 2) {
            for (int c = 0; c < cfg.commitments; ++c) {
                uint64_t a = rng.below(dom_size);
                uint64_t b = rng.below(dom_size);
                if (a != b) commit_slots.emplace_back(a, b);
            }
        }
    }

    SplitFamily fam;
    for (int i = 0; i < cfg.d; ++i)
        fam.deltas.push_back(
            Ordinal::omega_pow(Ordinal::omega(), static_cast<uint64_t>(i) + 1));

    for (int i = 0; i < cfg.d; ++i) {
        const Ordinal& delta = fam.deltas[static_cast<size_t>(i)];
        BaseCondition part;
        part.tree = shared;

        // Translated private chains: values delta + w*k + c at heights delta + k.
        std::vector<NodeSet> chain_nodes(static_cast<size_t>(cfg.private_chains));
        for (int c = 0; c < cfg.private_chains; ++c) {
            Ordinal cur = attach[static_cast<size_t>(c)];
            NodeSet below = part.tree.strictly_below(cur);
            sv_insert(below, cur);
            for (int k = 1; k <= cfg.private_chain_len; ++k) {
                Ordinal z = delta + node_at(static_cast<uint64_t>(k),
                                            static_cast<uint64_t>(c));
                part.tree.add_node(z);
                for (const auto& u : below) part.tree.add_pair(u, z);
                sv_insert(below, z);
                chain_nodes[static_cast<size_t>(c)].push_back(z);
            }
        }

        // Root indices: shared trace plus this part's private chain.
        for (size_t j = 0; j < root_dom.size(); ++j) {
            NodeSet w = root_trace[j];
            if (j < chain_nodes.size())
                w = sv_union(w, chain_nodes[j]);
            part.subtrees[root_dom[j]] = w;
        }

        // Private indices: the template mask translated into this part.
        std::vector<UOrd> dom = root_dom;
        for (int j = 0; j < cfg.private_indices; ++j) {
            UOrd eta = UOrd::countable(delta + Ordinal::nat(static_cast<uint64_t>(j)));
            NodeSet mask = priv_shared_mask[static_cast<size_t>(j)];
            for (const auto& [c, k] : priv_chain_mask[static_cast<size_t>(j)])
                sv_insert(mask, delta + node_at(static_cast<uint64_t>(k),
                                                static_cast<uint64_t>(c)));
            part.subtrees[eta] = downward_closure_in(part.tree, mask);
            dom.push_back(eta);
        }

        for (const auto& [a, b] : commit_slots)
            sv_insert(part.commitments, make_upair(dom[a], dom[b]));
        fam.parts.push_back(std::move(part));
    }
    return fam;
}

// ---- model universes ----

Universe gen_universe(Rng& rng, int stations) {
    UniverseConfig cfg;
    cfg.stations = stations < 4 ? 4 : stations;
    cfg.seed = rng.next();
    return build_universe(cfg);
}


ModelSet gen_model(Rng& rng, const Universe& u, const ModelGenConfig& cfg) {
    std::vector<int> pool;
    for (int i = 0; i < u.station_count(); ++i)
        if (cfg.allow_cut_stations || !u.station(i).in_lambda) pool.push_back(i);

    ModelSet m;
    m.delta = rng.pick(u.deltas());
    if (!pool.empty()) {
        int want = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.max_stations) + 1));
        for (int k = 0; k < want; ++k) sv_insert(m.stations, rng.pick(pool));
    }
    m.stations = close_trace(u, m.stations);
    return m;
}

std::vector<ModelSet> gen_adequate_set(Rng& rng, const Universe& u, int count,
                                       const ModelGenConfig& cfg) {
    std::vector<ModelSet> out;
    if (count <= 0) return out;

    // Nested tower: stations grow with the trace, so every pair compares low.
    std::vector<int> pool;
    for (int i = 0; i < u.station_count(); ++i)
        if (cfg.allow_cut_stations || !u.station(i).in_lambda) pool.push_back(i);
    std::vector<int> cuts = u.lambda();

    std::size_t levels = u.deltas().size();
    std::size_t tower = std::min<std::size_t>(static_cast<std::size_t>(count), levels);
    std::vector<int> stations;
    std::size_t level = 0;
    for (std::size_t k = 0; k < tower; ++k) {
        // Leave trace room for later members of the tower.
        std::size_t slack = levels - (tower - k);
        level = level + 1 + (slack > level ? rng.below(slack - level + 1) : 0);
        if (!pool.empty() && rng.chance(0.7)) sv_insert(stations, rng.pick(pool));
        stations = close_trace(u, stations);
        ModelSet m;
        m.delta = u.deltas()[level - 1];
        m.stations = stations;
        out.push_back(m);
    }

    // Enrich with cut truncations; each addition is certified before it stays.
    for (int attempt = 0; static_cast<int>(out.size()) < count && attempt < 4 * count;
         ++attempt) {
        ModelSet k = model_truncate(out[rng.below(out.size())], rng.pick(cuts));
        if (std::find(out.begin(), out.end(), k) != out.end()) continue;
        std::vector<ModelSet> trial = out;
        trial.push_back(k);
        if (!is_adequate(u, trial).ok) continue;
        out = std::move(trial);
    }
    return out;
}

UnionCheckInput gen_union_check_instance(Rng& rng, const Universe& u,
                                         const std::string& profile) {
    UnionCheckInput in;
    std::vector<int> cuts = u.lambda();

    if (profile == "hull-member-join") {
        // Top model with full trace room; the set lives strictly inside its hull.
        ModelGenConfig mg;
        mg.max_stations = 4;
        ModelSet n = gen_model(rng, u, mg);
        n.delta = u.deltas().back();
        std::vector<ModelSet> a;
        std::vector<ModelSet> tower = gen_adequate_set(rng, u, 3);
        for (auto& m : tower) {
            m.stations = sv_intersect(m.stations, n.stations);
            if (m.delta < n.delta && sk_contains(n, m)) a.push_back(m);
        }
        a.erase(std::unique(a.begin(), a.end()), a.end());
        if (!is_adequate(u, a).ok) a.clear();
        in.sets.push_back(a);
        in.models.push_back(n);
        return in;
    }

    if (profile == "truncation-superset") {
        std::vector<ModelSet> a = gen_adequate_set(rng, u, 3);
        std::vector<ModelSet> c = a;
        for (int t = 0; t < 2 && !a.empty(); ++t) {
            ModelSet k = model_truncate(a[rng.below(a.size())], rng.pick(cuts));
            if (std::find(c.begin(), c.end(), k) == c.end()) c.push_back(k);
        }
        in.sets.push_back(a);
        in.sets.push_back(c);
        return in;
    }

    if (profile == "model-closed-union") {
        std::vector<ModelSet> a = gen_adequate_set(rng, u, 4);
        ModelSet n = a.back();
        for (const auto& m : a)
            if (n.delta < m.delta) n = m;
        a = close_model(u, a, n);
        std::vector<ModelSet> b;
        for (const auto& m : a)
            if (sk_contains(n, m)) b.push_back(m);
        if (!b.empty() && rng.chance(0.5)) {
            ModelSet k = model_truncate(b[rng.below(b.size())], rng.pick(cuts));
            std::vector<ModelSet> trial = b;
            if (std::find(b.begin(), b.end(), k) == b.end()) trial.push_back(k);
            if (is_adequate(u, trial).ok && sk_contains(n, k)) b = trial;
        }
        in.sets.push_back(a);
        in.sets.push_back(b);
        in.models.push_back(n);
        return in;
    }

    if (profile == "chain-union") {
        // Built top-down: each link set is the hull part of the one above.
        std::size_t d = 2 + rng.below(2);
        std::vector<std::vector<ModelSet>> sets(d);
        std::vector<ModelSet> links(d - 1);
        std::vector<ModelSet> cur = gen_adequate_set(rng, u, 4);
        for (std::size_t i = d; i-- > 1;) {
            ModelSet n = cur.back();
            for (const auto& m : cur)
                if (n.delta < m.delta) n = m;
            cur = close_model(u, cur, n);
            sets[i] = cur;
            links[i - 1] = n;
            std::vector<ModelSet> part;
            for (const auto& m : cur)
                if (sk_contains(n, m)) part.push_back(m);
            cur = part;
            if (cur.empty()) break;
        }
        sets[0] = cur;
        in.sets = sets;
        for (auto& n : links) in.models.push_back(n);
        return in;
    }

    if (profile == "cut-closed-union") {
        int cut = rng.pick(cuts);
        std::vector<ModelSet> a = gen_adequate_set(rng, u, 3);
        a = close_cut(u, a, cut);
        std::vector<ModelSet> b;
        for (const auto& m : a)
            if (sk_cut_contains(cut, m)) b.push_back(m);
        in.sets.push_back(a);
        in.sets.push_back(b);
        in.cuts.push_back(cut);
        return in;
    }

    if (profile == "cut-trace-join") {
        int cut = rng.pick(cuts);
        ModelSet n = gen_model(rng, u);
        std::vector<ModelSet> a;
        a.push_back(model_truncate(n, cut));
        ModelSet low = model_truncate(n, cut);
        if (!u.deltas().empty() && u.deltas().front() < low.delta && !low.stations.empty()) {
            low.delta = u.deltas().front();
            low.stations.pop_back();
            low.stations = close_trace(u, low.stations);
            std::vector<ModelSet> trial = a;
            trial.push_back(low);
            if (is_adequate(u, trial).ok) a = trial;
        }
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        in.sets.push_back(a);
        in.models.push_back(n);
        in.cuts.push_back(cut);
        return in;
    }

    throw PreconditionError("gen_union_check_instance: unknown profile " + profile);
}

// ---- side conditions ----

SideCondition gen_side(Rng& rng, const Universe& u) {
    std::vector<ModelSet> models =
        gen_adequate_set(rng, u, 2 + static_cast<int>(rng.below(2)));
    Ordinal shift;
    for (const ModelSet& m : models)
        if (shift < m.delta) shift = m.delta;

    BaseGenConfig bc;
    bc.stations = 0;
    BaseCondition raw = gen_base(rng, bc);

    // Lift every index above the hulls: no two indices share a model, so the
    // separation clause holds vacuously whatever the carriers are.
    BaseCondition base;
    base.tree = raw.tree;
    std::map<UOrd, UOrd> lift;
    for (const UOrd& eta : domain_of(raw)) {
        UOrd high = UOrd::countable(shift + eta.ordinal());
        lift[eta] = high;
        base.subtrees[high] = subtree_of(raw, eta);
    }
    for (const UPair& c : raw.commitments)
        sv_insert(base.commitments, make_upair(lift.at(c.first), lift.at(c.second)));

    // Optionally one index inside every hull; its carrier stays at the root,
    // which belongs to every hull, so separation still cannot fail.
    if (rng.chance(0.5)) {
        NodeSet ws;
        if (rng.chance(0.5)) ws.push_back(Ordinal());
        base.subtrees[UOrd::countable(Ordinal::nat(1))] = ws;
    }

    SideCondition p{base, models};
    BaseReport rep = validate_side(u, p);
    if (!rep.ok) throw FidelityError("gen_side: " + rep.violations.front());
    return p;
}

SideFamily gen_fingerprint_family(Rng& rng, const Universe& u, int count) {
    if (count < 2) throw PreconditionError("gen_fingerprint_family: need at least two parts");
    SplitFamilyConfig sc;
    sc.d = count;
    SplitFamily fam = gen_split_family(rng, sc);

    // One closed station set shared by every designated model keeps the parts
    // inside every later hull.
    ModelGenConfig mc;
    mc.max_stations = 2;
    const std::vector<int> shared_st = gen_model(rng, u, mc).stations;

    SideFamily out;
    for (int i = 0; i < count; ++i) {
        ModelSet n{fam.deltas[static_cast<size_t>(i)], shared_st};
        SideCondition p{fam.parts[static_cast<size_t>(i)], {n}};
        BaseReport rep = validate_side(u, p);
        if (!rep.ok)
            throw FidelityError("gen_fingerprint_family: part " + std::to_string(i) +
                                ": " + rep.violations.front());
        out.parts.push_back(std::move(p));
        out.designated.push_back(std::move(n));
    }
    Fingerprint first = fingerprint_of(u, out.parts[0], out.designated[0]);
    for (int i = 1; i < count; ++i)
        if (fingerprint_of(u, out.parts[static_cast<size_t>(i)],
                           out.designated[static_cast<size_t>(i)]) != first)
            throw FidelityError("gen_fingerprint_family: copies disagree at part " +
                                std::to_string(i));
    return out;
}

ReflectInstance gen_reflect_instance(Rng& rng, const Universe& u) {
    SideFamily fam = gen_fingerprint_family(rng, u, 2);
    return ReflectInstance{fam.parts[1], fam.designated[1]};
}

// ---- quotient scenarios ----

Universe gen_quotient_universe(Rng& rng) {
    // Clubs only at the bottom keeps truncations small, so the plain stations
    // between the interior cut and the reflection cut stay free for mirror
    // images. The top cut gives models that share a high plain station a
    // comparison point.
    int n = 8 + static_cast<int>(rng.below(2));
    UniverseConfig cfg;
    cfg.pattern.resize(static_cast<std::size_t>(n));
    cfg.pattern[0].in_lambda0 = true;
    cfg.pattern[1].in_lambda0 = true;
    cfg.pattern[2].cof_gt_omega = true;
    cfg.pattern[2].in_lambda = true;
    auto& mid = cfg.pattern[static_cast<std::size_t>(n - 3)];
    mid.cof_gt_omega = true;
    mid.in_lambda = true;
    mid.in_sigma = true;
    auto& top = cfg.pattern.back();
    top.cof_gt_omega = true;
    top.in_lambda = true;
    return build_universe(cfg);
}

SideCondition gen_dtheta_member(Rng& rng, const Universe& u, int theta) {
    require_reflection_station(u, theta);

    // High station for the index and the model; plain ones mirror most freely.
    std::vector<int> highs, plain_highs;
    for (int s = theta; s < u.station_count(); ++s) {
        highs.push_back(s);
        if (!u.station(s).in_lambda) plain_highs.push_back(s);
    }
    int s_high = plain_highs.empty() ? rng.pick(highs) : rng.pick(plain_highs);

    std::vector<int> low_pool;
    for (int s = 0; s < theta; ++s)
        if (!u.station(s).in_lambda) low_pool.push_back(s);

    std::vector<int> st{s_high};
    int extra = 1 + static_cast<int>(rng.below(2));
    for (int k = 0; k < extra && !low_pool.empty(); ++k) sv_insert(st, rng.pick(low_pool));
    st = close_trace(u, st);

    const std::vector<Ordinal>& ds = u.deltas();
    ModelSet m{ds[ds.size() / 2], st};
    ModelSet low = model_truncate(m, theta);
    if (low.stations.empty())
        throw FidelityError("gen_dtheta_member: truncation lost every station");
    int s_low = low.stations.back();

    // Low graded tree; one carrier shared by the high index and its low twin.
    TreeGenConfig tc;
    tc.extra_nodes = 4 + static_cast<int>(rng.below(4));
    FiniteTree tree = gen_tree(rng, tc);
    NodeSet picks{Ordinal()};
    for (const Ordinal& x : tree.nodes())
        if (rng.chance(0.5)) sv_insert(picks, x);
    NodeSet w = downward_closure_in(tree, picks);

    SideCondition p;
    p.base.tree = tree;
    p.base.subtrees[UOrd::station(s_low)] = w;
    p.base.subtrees[UOrd::station(s_high)] = w;
    if (rng.chance(0.6)) {
        p.base.subtrees[UOrd::countable(Ordinal::nat(1))] = NodeSet{Ordinal()};
        if (rng.chance(0.5)) {
            // A mixed commitment needs its renamed twin, or no witness survives.
            sv_insert(p.base.commitments,
                      make_upair(UOrd::countable(Ordinal::nat(1)), UOrd::station(s_high)));
            sv_insert(p.base.commitments,
                      make_upair(UOrd::countable(Ordinal::nat(1)), UOrd::station(s_low)));
        }
    }
    p.models = {low, m};

    BaseReport rep = validate_side(u, p);
    if (!rep.ok)
        throw FidelityError("gen_dtheta_member: " + rep.violations.front());
    if (!dtheta_check(u, p, theta))
        throw FidelityError("gen_dtheta_member: planted member is not projectable");
    return p;
}

QuotientScenario gen_quotient_scenario(Rng& rng, const Universe& u) {
    int theta = pick_reflection_station(u);
    int d = 2 + static_cast<int>(rng.below(2));

    SplitFamilyConfig sc;
    sc.d = d;
    SplitFamily fam = gen_split_family(rng, sc);

    // One low closed station set shared by the designated models: the parts
    // stay inside every later hull and the merged condition stays below the
    // station, so it can generate the filter.
    std::vector<int> low_pool, low_clubs;
    for (int s = 0; s < theta; ++s) {
        if (!u.station(s).in_lambda) low_pool.push_back(s);
        if (u.station(s).in_lambda0) low_clubs.push_back(s);
    }
    std::vector<int> shared_st;
    int extra = static_cast<int>(rng.below(3));
    for (int k = 0; k < extra && !low_pool.empty(); ++k) sv_insert(shared_st, rng.pick(low_pool));
    if (!low_clubs.empty()) sv_insert(shared_st, low_clubs.back());
    shared_st = close_trace(u, shared_st);

    QuotientScenario out;
    out.theta = theta;
    std::vector<SideCondition> parts;
    std::vector<ModelSet> designated;
    for (int i = 0; i < d; ++i) {
        ModelSet n{fam.deltas[static_cast<std::size_t>(i)], shared_st};
        SideCondition p{fam.parts[static_cast<std::size_t>(i)], {n}};
        BaseReport rep = validate_side(u, p);
        if (!rep.ok)
            throw FidelityError("gen_quotient_scenario: part " + std::to_string(i) + ": " +
                                rep.violations.front());
        parts.push_back(p);
        designated.push_back(n);
        out.pools.push_back({QuotientPoolEntry{p, n}});
    }

    // Generator = certified amalgam of the parts; the chain starts at the root.
    SideAmalgamResult am = amalgamate_by_fingerprint(u, parts, designated);
    SideCondition start;
    start.base.tree.add_node(Ordinal());
    out.chain = {start, am.condition};

    FilterApprox h = make_filter(u, theta, out.chain);
    for (int i = 0; i < d; ++i)
        if (!quotient_membership(u, parts[static_cast<std::size_t>(i)], h))
            throw FidelityError("gen_quotient_scenario: part " + std::to_string(i) +
                                " rejected by the membership check");
    return out;
}

} // namespace treelab
