#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relfix/errors.hpp"
#include "relfix/fixed_point.hpp"
#include "relfix/format.hpp"
#include "relfix/relation.hpp"
#include "relfix/space.hpp"
#include "relfix/w_distance.hpp"

namespace relfix {

/// sample x sample filtered by the relation. Beyond `cap` pairs, every k-th
/// related pair is kept (deterministic stride).
inline std::vector<PointPair> build_related_pairs(const Relation& rel, std::span<const Point> sample,
                                                  std::size_t cap = 1'000'000) {
    std::vector<PointPair> all;
    for (const auto& x : sample)
        for (const auto& y : sample)
            if (rel(x, y)) all.push_back({x, y});
    if (all.size() <= cap || cap == 0) return all;
    const std::size_t stride = (all.size() + cap - 1) / cap;
    std::vector<PointPair> kept;
    kept.reserve(cap);
    for (std::size_t i = 0; i < all.size(); i += stride) kept.push_back(std::move(all[i]));
    return kept;
}

/// Empirical contraction constant of T with respect to p over related pairs.
struct ContractionEstimate {
    double lambda_hat = 0.0;  // max p(Tx,Ty)/p(x,y) over checked pairs with p(x,y) > 0
    std::optional<PointPair> witness_pair;
    std::size_t pairs_checked = 0;
    std::size_t zero_p_pairs = 0;
    std::vector<PointPair> zero_p_violations;  // p(x,y) = 0 but p(Tx,Ty) > 0
    bool include_diagonal = false;
    // Same maximum with diagonal pairs (x, x) included, always disclosed.
    double lambda_hat_with_diagonal = 0.0;

    [[nodiscard]] bool is_contraction() const noexcept {
        return witness_pair.has_value() && lambda_hat < 1.0 && zero_p_violations.empty();
    }
};

/// Maximum ratio p(Tx,Ty)/p(x,y). Pairs with p(x,y) = 0 never divide; they
/// go to a separate violation channel when p(Tx,Ty) > 0.
inline ContractionEstimate estimate_lambda(const SelfMap& map, const WDistance& p, const Relation& rel,
                                           std::span<const PointPair> pairs, bool include_diagonal = false) {
    if (pairs.empty()) throw EstimationError("no pairs to estimate a contraction constant from");
    ContractionEstimate est;
    est.include_diagonal = include_diagonal;
    bool any_ratio = false;
    for (const auto& [x, y] : pairs) {
        if (!rel(x, y))
            throw PreconditionError("pair (" + x.describe() + ", " + y.describe() + ") is not related");
        const bool diagonal = x == y;
        const double pxy = p(x, y);
        const double pt = p(map(x), map(y));
        if (pxy > 0.0) est.lambda_hat_with_diagonal = std::max(est.lambda_hat_with_diagonal, pt / pxy);
        if (diagonal && !include_diagonal) continue;
        ++est.pairs_checked;
        if (pxy == 0.0) {
            ++est.zero_p_pairs;
            if (pt > 0.0) est.zero_p_violations.push_back({x, y});
            continue;
        }
        const double ratio = pt / pxy;
        if (!any_ratio || ratio > est.lambda_hat) {
            est.lambda_hat = ratio;
            est.witness_pair = PointPair{x, y};
            any_ratio = true;
        }
    }
    return est;
}

/// Per-pair quantities of the classical contractions.
struct ClassicalRow {
    Point x;
    Point y;
    double d_txty;  // d(Tx, Ty)
    double d_xy;
    double m_t;  // max{d(x,y), d(x,Tx), d(y,Ty), (d(x,Ty) + d(y,Tx))/2}
    bool banach_fails;  // no k < 1 with d(Tx,Ty) <= k d(x,y)
    bool mt_fails;      // no phi(t) < t with d(Tx,Ty) <= phi(M_T)
};

struct ClassicalComparison {
    std::vector<ClassicalRow> rows;
    std::size_t banach_failures = 0;
    std::size_t mt_failures = 0;
};

inline ClassicalRow classical_row(const SelfMap& map, const MetricSpace& space, const Point& x,
                                  const Point& y) {
    const Point tx = map(x);
    const Point ty = map(y);
    const auto d = [&](const Point& a, const Point& b) { return metric_eval(space, a, b); };
    ClassicalRow r{x, y, d(tx, ty), d(x, y), 0.0, false, false};
    r.m_t = std::max({r.d_xy, d(x, tx), d(y, ty), 0.5 * (d(x, ty) + d(y, tx))});
    r.banach_fails = r.d_txty > 0.0 && r.d_txty >= r.d_xy;
    r.mt_fails = r.d_txty > 0.0 && r.d_txty >= r.m_t;
    return r;
}

inline ClassicalComparison compare_classical(const SelfMap& map, const MetricSpace& space,
                                             const Relation& rel, std::span<const PointPair> pairs) {
    ClassicalComparison c;
    c.rows.reserve(pairs.size());
    for (const auto& [x, y] : pairs) {
        if (!rel(x, y))
            throw PreconditionError("pair (" + x.describe() + ", " + y.describe() + ") is not related");
        auto row = classical_row(map, space, x, y);
        c.banach_failures += row.banach_fails ? 1 : 0;
        c.mt_failures += row.mt_fails ? 1 : 0;
        c.rows.push_back(std::move(row));
    }
    return c;
}

struct HypothesisItem {
    bool pass = false;
    std::string detail;
};

enum class Overall { AllVerifiedOnSample, Incomplete };

[[nodiscard]] constexpr const char* to_string(Overall o) noexcept {
    return o == Overall::AllVerifiedOnSample ? "AllVerifiedOnSample" : "Incomplete";
}

/// Sample-relative verdicts on each hypothesis of the w-distance fixed point
/// theorem, plus the lambda estimate and orbit they were derived from.
struct TheoremReport {
    HypothesisItem r_complete_proxy;
    HypothesisItem start_points;
    HypothesisItem t_closed;
    HypothesisItem continuity_or_self_closed;
    HypothesisItem contraction;
    Overall overall = Overall::Incomplete;

    std::optional<ContractionEstimate> estimate;
    std::optional<OrbitTrace> orbit;
    std::size_t start_point_count = 0;

    [[nodiscard]] std::optional<double> lambda_hat() const {
        if (estimate && estimate->is_contraction()) return estimate->lambda_hat;
        return std::nullopt;
    }
};

struct VerifyOptions {
    IterateOptions iterate;
    TailOptions tail;
    bool include_diagonal = false;
    std::size_t pair_cap = 1'000'000;
};

/// Runs every hypothesis check on the sample and a Picard orbit from orbit_seed.
/// Sub-check errors mark the corresponding item as failed with the reason.
inline TheoremReport verify_theorem(const SelfMap& map, const MetricSpace& space, const Relation& rel,
                                    const WDistance& p, std::span<const Point> sample,
                                    const Point& orbit_seed, const VerifyOptions& opts = {}) {
    TheoremReport rep;
    auto guarded = [](HypothesisItem& item, auto&& body) {
        try {
            body();
        } catch (const Error& e) {
            item.pass = false;
            item.detail = e.what();
        }
    };

    guarded(rep.start_points, [&] {
        const auto starts = find_start_points(rel, map, sample);
        rep.start_point_count = starts.size();
        const bool seed_ok = rel(orbit_seed, map(orbit_seed));
        rep.start_points.pass = !starts.empty() && seed_ok;
        rep.start_points.detail = std::to_string(starts.size()) + " sampled start points; seed " +
                                  orbit_seed.describe() + (seed_ok ? " is" : " is not") + " in X(T,R)";
    });

    guarded(rep.t_closed, [&] {
        const auto r = check_t_closed(rel, map, sample);
        rep.t_closed.pass = r.holds();
        rep.t_closed.detail = std::string(to_string(r.verdict)) + " (" + std::to_string(r.witnesses.size()) +
                              " counterexample pairs)";
    });

    guarded(rep.contraction, [&] {
        const auto pairs = build_related_pairs(rel, sample, opts.pair_cap);
        rep.estimate = estimate_lambda(map, p, rel, pairs, opts.include_diagonal);
        const auto& e = *rep.estimate;
        rep.contraction.pass = e.is_contraction();
        rep.contraction.detail = "lambda_hat=" + format_double(e.lambda_hat) + " over " +
                                 std::to_string(e.pairs_checked) + " pairs, " +
                                 std::to_string(e.zero_p_violations.size()) + " zero-p violations";
    });

    guarded(rep.r_complete_proxy, [&] {
        rep.orbit = iterate(map, orbit_seed, space, p, rep.lambda_hat(), opts.iterate);
        const auto& o = *rep.orbit;
        bool ok = o.stop_reason == StopReason::Converged && space.contains(o.last());
        std::string why = std::string("orbit ") + to_string(o.stop_reason) + " after " +
                          std::to_string(o.steps()) + " steps";
        if (ok && !o.bound.empty()) {
            const auto c = certify_cauchy(o, p);
            ok = c.holds;
            why += c.holds ? ", Cauchy bound certified" : ", Cauchy bound violated";
        }
        rep.r_complete_proxy.pass = ok;
        rep.r_complete_proxy.detail = why;
    });

    guarded(rep.continuity_or_self_closed, [&] {
        if (!rep.orbit) throw PreconditionError("no orbit available");
        const auto& o = *rep.orbit;
        TailOptions tail = opts.tail;
        tail.convergence_tol = std::max(tail.convergence_tol, opts.iterate.tol);
        const auto w = witness_d_self_closed(rel, o.points, o.last(), space, tail);
        bool cont = false;
        if (!w.holds) cont = is_r_continuous_along(map, rel, o.points, o.last(), space, tail, opts.iterate.tol);
        rep.continuity_or_self_closed.pass = w.holds || cont;
        rep.continuity_or_self_closed.detail =
            w.holds ? "d-self-closed along the orbit (" + std::to_string(w.related.size()) + " related indices)"
                    : (cont ? "R-continuous along the orbit" : "neither d-self-closed nor R-continuous along the orbit");
    });

    const bool all = rep.r_complete_proxy.pass && rep.start_points.pass && rep.t_closed.pass &&
                     rep.continuity_or_self_closed.pass && rep.contraction.pass;
    rep.overall = all ? Overall::AllVerifiedOnSample : Overall::Incomplete;
    return rep;
}

}  // namespace relfix
