#include "treelab/universe.hpp"

#include <algorithm>

#include "treelab/rng.hpp"
#include "treelab/set_util.hpp"

namespace treelab {

const StationInfo& Universe::station(int i) const {
    if (i < 0 || i >= station_count())
        throw PreconditionError("universe: station index " + std::to_string(i) +
                                " out of range");
    return stations_[static_cast<std::size_t>(i)];
}

namespace {

std::vector<int> stations_with(const std::vector<StationInfo>& all,
                               bool StationInfo::*flag) {
    std::vector<int> out;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].*flag) out.push_back(static_cast<int>(i));
    return out;
}

} // namespace

std::vector<int> Universe::lambda0() const { return stations_with(stations_, &StationInfo::in_lambda0); }
std::vector<int> Universe::lambda() const { return stations_with(stations_, &StationInfo::in_lambda); }
std::vector<int> Universe::sigma() const { return stations_with(stations_, &StationInfo::in_sigma); }

Universe build_universe(const UniverseConfig& cfg) {
    std::vector<StationInfo> pattern = cfg.pattern;
    if (pattern.empty()) {
        if (cfg.stations < 1)
            throw PreconditionError("build_universe: need at least one station");
        pattern.resize(static_cast<std::size_t>(cfg.stations));
        if (cfg.stations >= 4) {
            Rng rng(cfg.seed);
            pattern[0].in_lambda0 = true;
            pattern[1].in_lambda0 = true;
            for (int i = 2; i + 1 < cfg.stations; ++i) {
                auto& st = pattern[static_cast<std::size_t>(i)];
                st.in_lambda0 = rng.chance(0.5);
                st.cof_gt_omega = rng.chance(0.5);
                // Cut points are kept off the club so that trace closure
                // never pulls a cut station into a model (see ledger: the
                // intersection law can fail when two models share a cut).
                if (!st.in_lambda0 && st.cof_gt_omega && rng.chance(0.4)) st.in_lambda = true;
                st.in_sigma = rng.chance(0.3);
            }
            auto& top = pattern.back();
            top.cof_gt_omega = true;
            top.in_lambda = true;
            bool any_sigma = false;
            for (const auto& st : pattern) any_sigma = any_sigma || st.in_sigma;
            if (!any_sigma) top.in_sigma = true;
        } else {
            throw PreconditionError("build_universe: random pattern needs >= 4 stations");
        }
    }

    if (pattern.empty()) throw PreconditionError("build_universe: need at least one station");
    int n = static_cast<int>(pattern.size());
    int lambda_count = 0, sigma_count = 0;
    for (int i = 0; i < n; ++i) {
        const auto& st = pattern[static_cast<std::size_t>(i)];
        if (st.in_lambda) {
            ++lambda_count;
            if (!st.cof_gt_omega)
                throw PreconditionError("build_universe: cut station s" + std::to_string(i) +
                                        " needs uncountable cofinality");
            int club_below = 0;
            for (int j = 0; j < i; ++j)
                if (pattern[static_cast<std::size_t>(j)].in_lambda0) ++club_below;
            if (club_below < 2)
                throw PreconditionError("build_universe: cut station s" + std::to_string(i) +
                                        " needs two club stations below it");
        }
        if (st.in_sigma) ++sigma_count;
    }
    if (lambda_count == 0) throw PreconditionError("build_universe: empty cut set");
    if (sigma_count == 0) throw PreconditionError("build_universe: empty reflection set");

    Universe u;
    u.stations_ = std::move(pattern);
    u.deltas_ = cfg.deltas;
    if (u.deltas_.empty()) {
        for (std::uint64_t k = 1; k <= 8; ++k)
            u.deltas_.push_back(Ordinal::omega_pow(Ordinal::omega(), k));
    }
    for (const auto& d : u.deltas_) {
        if (d.is_zero() || !is_split_level(d) || !(d < default_ceiling()))
            throw PreconditionError("build_universe: trace allocation " + d.str() +
                                    " is not a positive split level below the ceiling");
    }
    return u;
}

std::string model_violation(const Universe& u, const ModelSet& m) {
    if (!is_split_level(m.delta) || !(m.delta < default_ceiling()))
        return "trace " + m.delta.str() + " is not a split level below the ceiling";
    for (std::size_t i = 0; i < m.stations.size(); ++i) {
        int s = m.stations[i];
        if (s < 0 || s >= u.station_count())
            return "station s" + std::to_string(s) + " outside the universe";
        if (i > 0 && m.stations[i - 1] >= s) return "stations not sorted unique";
    }
    for (int s : m.stations) {
        int top_club = -1;
        for (int j = 0; j < s; ++j)
            if (u.station(j).in_lambda0) top_club = j;
        if (top_club >= 0 && !sv_contains(m.stations, top_club))
            return "trace closure: s" + std::to_string(s) + " needs club station s" +
                   std::to_string(top_club);
    }
    return "";
}

ModelSet model_intersect(const ModelSet& a, const ModelSet& b) {
    ModelSet out;
    out.delta = a.delta < b.delta ? a.delta : b.delta;
    out.stations = sv_intersect(a.stations, b.stations);
    return out;
}

ModelSet model_truncate(const ModelSet& m, int cut_station) {
    ModelSet out;
    out.delta = m.delta;
    for (int s : m.stations)
        if (s < cut_station) out.stations.push_back(s);
    return out;
}

std::vector<int> close_trace(const Universe& u, std::vector<int> stations) {
    bool grew = true;
    while (grew) {
        grew = false;
        for (std::size_t i = 0; i < stations.size(); ++i) {
            int top_club = -1;
            for (int j = 0; j < stations[i]; ++j)
                if (u.station(j).in_lambda0) top_club = j;
            if (top_club >= 0 && !sv_contains(stations, top_club)) {
                sv_insert(stations, top_club);
                grew = true;
            }
        }
    }
    return stations;
}

std::string canonical_key(const ModelSet& m) {
    std::string s = m.delta.str() + "|";
    for (int st : m.stations) s += "s" + std::to_string(st) + ",";
    return s;
}

// ---- support hulls ----

void collect_support(const Ordinal& x, Support& s) {
    if (!x.is_zero()) sv_insert(s.countables, x);
}

void collect_support(const UOrd& u, Support& s) {
    if (u.is_station())
        sv_insert(s.stations, u.station_index());
    else
        collect_support(u.ordinal(), s);
}

void collect_support(const UPair& p, Support& s) {
    collect_support(p.first, s);
    collect_support(p.second, s);
}

void collect_support(const NodeSet& xs, Support& s) {
    for (const auto& x : xs) collect_support(x, s);
}

void collect_support(const FiniteTree& t, Support& s) { collect_support(t.nodes(), s); }

void collect_support(const BaseCondition& c, Support& s) {
    collect_support(c.tree, s);
    for (const auto& [eta, w] : c.subtrees) {
        collect_support(eta, s);
        collect_support(w, s);
    }
    for (const auto& pr : c.commitments) collect_support(pr, s);
}

void collect_support(const ModelSet& m, Support& s) {
    collect_support(m.delta, s);
    for (int st : m.stations) sv_insert(s.stations, st);
}

bool sk_contains(const ModelSet& n, const Support& s) {
    for (const auto& x : s.countables)
        if (!(x < n.delta)) return false;
    return sv_subset(s.stations, n.stations);
}

bool sk_cut_contains(int cut_station, const Support& s) {
    for (int st : s.stations)
        if (st >= cut_station) return false;
    return true;
}

// ---- comparison and adequacy ----

UOrd comparison_point(const Universe& u, const ModelSet& a, const ModelSet& b) {
    std::vector<int> common = sv_intersect(a.stations, b.stations);
    int from = common.empty() ? 0 : common.back();
    for (int i = from; i < u.station_count(); ++i)
        if (u.station(i).in_lambda) return UOrd::station(i);
    throw OverflowError("comparison_point: no cut station at or above s" +
                        std::to_string(from) + " (universe too small)");
}

AdequacyReport is_adequate(const Universe& u, const std::vector<ModelSet>& a) {
    AdequacyReport rep;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::string v = model_violation(u, a[i]);
        if (!v.empty()) {
            rep.ok = false;
            rep.violations.push_back("model " + std::to_string(i) + ": " + v);
        }
    }
    if (!rep.ok) return rep;

    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            int cut = comparison_point(u, a[i], a[j]).station_index();
            ModelSet mi = model_truncate(a[i], cut);
            ModelSet mj = model_truncate(a[j], cut);
            bool lt = sk_contains(a[j], mi);
            bool gt = sk_contains(a[i], mj);
            ModelRel rel;
            if (mi == mj)
                rel = ModelRel::SIM;
            else if (lt)
                rel = ModelRel::LT;
            else if (gt)
                rel = ModelRel::GT;
            else {
                rep.ok = false;
                rep.violations.push_back(
                    "models " + std::to_string(i) + "," + std::to_string(j) +
                    " fail every comparison alternative at s" + std::to_string(cut));
                continue;
            }
            bool agrees = (rel == ModelRel::SIM && a[i].delta == a[j].delta) ||
                          (rel == ModelRel::LT && a[i].delta < a[j].delta) ||
                          (rel == ModelRel::GT && a[j].delta < a[i].delta);
            if (!agrees) {
                rep.ok = false;
                rep.violations.push_back("models " + std::to_string(i) + "," +
                                         std::to_string(j) +
                                         ": alternative holds but disagrees with the trace "
                                         "order");
                continue;
            }
            PairClass pc;
            pc.i = i;
            pc.j = j;
            pc.rel = rel;
            rep.pairs.push_back(pc);
        }
    }
    return rep;
}

bool is_model_closed(const Universe&, const std::vector<ModelSet>& models, const ModelSet& n) {
    for (const auto& m : models) {
        if (!(m.delta < n.delta)) continue;
        ModelSet k = model_intersect(m, n);
        if (std::find(models.begin(), models.end(), k) == models.end()) return false;
    }
    return true;
}

bool is_cut_closed(const Universe&, const std::vector<ModelSet>& models, int cut_station) {
    for (const auto& m : models) {
        ModelSet k = model_truncate(m, cut_station);
        if (std::find(models.begin(), models.end(), k) == models.end()) return false;
    }
    return true;
}

namespace {

std::vector<ModelSet> sorted_unique(std::vector<ModelSet> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

} // namespace

std::vector<ModelSet> close_model(const Universe& u, const std::vector<ModelSet>& a,
                                  const ModelSet& n) {
    AdequacyReport pre = is_adequate(u, a);
    if (!pre.ok) throw PreconditionError("close_model: " + pre.violations.front());
    if (std::find(a.begin(), a.end(), n) == a.end())
        throw PreconditionError("close_model: model not in the set");

    std::vector<ModelSet> c = a;
    for (const auto& m : a) {
        if (!(m.delta < n.delta)) continue;
        ModelSet k = model_intersect(m, n);
        // The intersection law: the intersection must coincide with the cut
        // at the comparison point and land in the higher model's hull.
        int cut = comparison_point(u, m, n).station_index();
        if (k != model_truncate(m, cut))
            throw FidelityError("close_model: intersection law failed for " +
                                canonical_key(m) + " against " + canonical_key(n));
        if (!sk_contains(n, k))
            throw FidelityError("close_model: intersection escapes the hull of " +
                                canonical_key(n));
        c.push_back(k);
    }
    c = sorted_unique(std::move(c));
    AdequacyReport post = is_adequate(u, c);
    if (!post.ok) throw FidelityError("close_model: output not adequate: " + post.violations.front());
    if (!is_model_closed(u, c, n))
        throw FidelityError("close_model: output not closed under the model");
    return c;
}

std::vector<ModelSet> close_cut(const Universe& u, const std::vector<ModelSet>& a,
                                int cut_station) {
    AdequacyReport pre = is_adequate(u, a);
    if (!pre.ok) throw PreconditionError("close_cut: " + pre.violations.front());
    if (cut_station < 0 || cut_station >= u.station_count() ||
        !u.station(cut_station).in_lambda)
        throw PreconditionError("close_cut: s" + std::to_string(cut_station) +
                                " is not a cut station");

    std::vector<ModelSet> c = a;
    for (const auto& m : a) c.push_back(model_truncate(m, cut_station));
    c = sorted_unique(std::move(c));
    AdequacyReport post = is_adequate(u, c);
    if (!post.ok) throw FidelityError("close_cut: output not adequate: " + post.violations.front());
    if (!is_cut_closed(u, c, cut_station))
        throw FidelityError("close_cut: output not closed under the cut");
    // Moreover clause: closing under a cut preserves closure under models.
    for (const auto& n : a) {
        if (is_model_closed(u, a, n) && !is_model_closed(u, c, n))
            throw FidelityError("close_cut: broke closure under " + canonical_key(n));
    }
    return c;
}

// ---- conditional union laws ----

namespace {

std::vector<ModelSet> union_sets(const std::vector<ModelSet>& a, const std::vector<ModelSet>& b) {
    std::vector<ModelSet> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return sorted_unique(std::move(out));
}

bool member(const std::vector<ModelSet>& a, const ModelSet& m) {
    return std::find(a.begin(), a.end(), m) != a.end();
}

bool subset(const std::vector<ModelSet>& a, const std::vector<ModelSet>& b) {
    for (const auto& m : a)
        if (!member(b, m)) return false;
    return true;
}

} // namespace

UnionCheckVerdict union_adequacy_check(const Universe& u, const std::string& profile,
                                       const UnionCheckInput& in) {
    UnionCheckVerdict v;
    auto fail = [&](const std::string& why) {
        v.hypotheses_hold = false;
        v.detail = "hypotheses fail: " + why;
        return v;
    };
    auto conclude = [&](const std::vector<ModelSet>& whole) {
        v.hypotheses_hold = true;
        v.conclusion_checked = true;
        AdequacyReport rep = is_adequate(u, whole);
        v.conclusion_holds = rep.ok;
        v.detail = rep.ok ? "union adequate"
                          : "conclusion fails: " + rep.violations.front();
        return v;
    };

    if (profile == "hull-member-join") {
        if (in.sets.size() < 1 || in.models.size() < 1)
            throw PreconditionError("union_adequacy_check: " + profile + " needs a set and a model");
        const auto& a = in.sets[0];
        const auto& n = in.models[0];
        if (!is_adequate(u, a).ok) return fail("base set not adequate");
        if (!model_violation(u, n).empty()) return fail("joined model invalid");
        for (const auto& m : a)
            if (!sk_contains(n, m)) return fail("set member outside the model's hull");
        return conclude(union_sets(a, {n}));
    }

    if (profile == "truncation-superset") {
        if (in.sets.size() < 2)
            throw PreconditionError("union_adequacy_check: " + profile + " needs two sets");
        const auto& a = in.sets[0];
        const auto& c = in.sets[1];
        if (!is_adequate(u, a).ok) return fail("base set not adequate");
        if (!subset(a, c)) return fail("base set not contained in the extension");
        std::vector<int> cuts = u.lambda();
        for (const auto& k : c) {
            if (member(a, k)) continue;
            if (!model_violation(u, k).empty()) return fail("extension member invalid");
            bool witnessed = false;
            for (const auto& m : a) {
                for (int cut : cuts)
                    if (k == model_truncate(m, cut)) witnessed = true;
            }
            if (!witnessed) return fail("extension member is not a cut of a base member");
        }
        return conclude(sorted_unique(c));
    }

    if (profile == "model-closed-union") {
        if (in.sets.size() < 2 || in.models.size() < 1)
            throw PreconditionError("union_adequacy_check: " + profile +
                                    " needs two sets and a model");
        const auto& a = in.sets[0];
        const auto& b = in.sets[1];
        const auto& n = in.models[0];
        if (!is_adequate(u, a).ok) return fail("base set not adequate");
        if (!member(a, n)) return fail("model not in the base set");
        if (!is_model_closed(u, a, n)) return fail("base set not closed under the model");
        if (!is_adequate(u, b).ok) return fail("second set not adequate");
        for (const auto& m : a)
            if (sk_contains(n, m) && !member(b, m))
                return fail("hull part of the base set escapes the second set");
        for (const auto& m : b)
            if (!sk_contains(n, m)) return fail("second set outside the model's hull");
        return conclude(union_sets(a, b));
    }

    if (profile == "chain-union") {
        if (in.sets.size() < 2 || in.models.size() + 1 != in.sets.size())
            throw PreconditionError("union_adequacy_check: " + profile +
                                    " needs d sets and d-1 models");
        std::vector<ModelSet> whole;
        for (std::size_t i = 0; i < in.sets.size(); ++i) {
            if (!is_adequate(u, in.sets[i]).ok)
                return fail("set " + std::to_string(i) + " not adequate");
            whole = union_sets(whole, in.sets[i]);
        }
        for (std::size_t i = 1; i < in.sets.size(); ++i) {
            const auto& ai = in.sets[i];
            const auto& prev = in.sets[i - 1];
            const auto& ni = in.models[i - 1];
            if (!member(ai, ni)) return fail("link model " + std::to_string(i) + " missing");
            if (!is_model_closed(u, ai, ni))
                return fail("set " + std::to_string(i) + " not closed under its model");
            for (const auto& m : ai)
                if (sk_contains(ni, m) && !member(prev, m))
                    return fail("hull part of set " + std::to_string(i) +
                                " escapes its predecessor");
            for (const auto& m : prev)
                if (!sk_contains(ni, m))
                    return fail("set " + std::to_string(i - 1) + " outside the link hull");
        }
        return conclude(whole);
    }

    if (profile == "cut-closed-union") {
        if (in.sets.size() < 2 || in.cuts.size() < 1)
            throw PreconditionError("union_adequacy_check: " + profile +
                                    " needs two sets and a cut");
        const auto& a = in.sets[0];
        const auto& b = in.sets[1];
        int cut = in.cuts[0];
        if (cut < 0 || cut >= u.station_count() || !u.station(cut).in_lambda)
            return fail("cut station invalid");
        if (!is_adequate(u, a).ok) return fail("base set not adequate");
        if (!is_cut_closed(u, a, cut)) return fail("base set not closed under the cut");
        if (!is_adequate(u, b).ok) return fail("second set not adequate");
        for (const auto& m : a)
            if (sk_cut_contains(cut, m) && !member(b, m))
                return fail("cut part of the base set escapes the second set");
        for (const auto& m : b)
            if (!sk_cut_contains(cut, m)) return fail("second set outside the cut hull");
        return conclude(union_sets(a, b));
    }

    if (profile == "cut-trace-join") {
        if (in.sets.size() < 1 || in.models.size() < 1 || in.cuts.size() < 1)
            throw PreconditionError("union_adequacy_check: " + profile +
                                    " needs a set, a model and a cut");
        const auto& a = in.sets[0];
        const auto& n = in.models[0];
        int cut = in.cuts[0];
        if (cut < 0 || cut >= u.station_count() || !u.station(cut).in_lambda)
            return fail("cut station invalid");
        if (!is_adequate(u, a).ok) return fail("base set not adequate");
        for (const auto& m : a)
            if (!sk_cut_contains(cut, m)) return fail("base set outside the cut hull");
        if (!model_violation(u, n).empty()) return fail("joined model invalid");
        if (!member(a, model_truncate(n, cut)))
            return fail("the model's cut is missing from the base set");
        return conclude(union_sets(a, {n}));
    }

    throw PreconditionError("union_adequacy_check: unknown profile " + profile);
}

} // namespace treelab
