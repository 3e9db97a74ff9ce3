#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "relfix/errors.hpp"
#include "relfix/format.hpp"
#include "relfix/relation.hpp"
#include "relfix/space.hpp"
#include "relfix/w_distance.hpp"

namespace relfix {

enum class StopReason { Converged, MaxIter, Diverged };

[[nodiscard]] constexpr const char* to_string(StopReason s) noexcept {
    switch (s) {
        case StopReason::Converged: return "Converged";
        case StopReason::MaxIter: return "MaxIter";
        case StopReason::Diverged: return "Diverged";
    }
    return "Unknown";
}

/// Picard orbit x_0, T x_0, ..., x_N with per-step gaps.
///
/// gaps[n] belong to the pair (x_n, x_{n+1}); bound[n] = lambda^n p(x_0, x_1) / (1 - lambda)
/// and is empty when no contraction constant was supplied.
struct OrbitTrace {
    std::vector<Point> points;
    std::vector<double> p_gaps;
    std::vector<double> d_gaps;
    std::vector<double> bound;
    std::optional<double> lambda_used;
    StopReason stop_reason = StopReason::MaxIter;

    [[nodiscard]] std::size_t steps() const noexcept { return d_gaps.size(); }
    [[nodiscard]] const Point& last() const { return points.back(); }
};

/// Non-finite iterate or runaway gap. Carries the orbit up to the last finite state.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, OrbitTrace trace)
        : Error(what), trace_(std::move(trace)) {}

    [[nodiscard]] const OrbitTrace& trace() const noexcept { return trace_; }

private:
    OrbitTrace trace_;
};

/// lambda^n p01 / (1 - lambda).
inline double cauchy_bound(double lambda, double p01, std::size_t n) {
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw DomainError("contraction constant must lie in [0, 1), got " + format_double(lambda));
    if (!(p01 >= 0.0)) throw DomainError("p(x0, x1) must be nonnegative");
    return std::pow(lambda, static_cast<double>(n)) * p01 / (1.0 - lambda);
}

struct IterateOptions {
    std::size_t max_iter = 10'000;
    double tol = 1e-9;  // on d(x_n, x_{n+1})
    double divergence_gap = 1e8;
};

/// Picard iteration x_{n+1} = T x_n until d(x_n, x_{n+1}) <= tol or max_iter.
///
/// Convergence is judged on d, never on p. `lambda` only feeds the recorded
/// bound sequence; pass nullopt when no verified constant exists.
inline OrbitTrace iterate(const SelfMap& map, const Point& x0, const MetricSpace& space,
                          const WDistance& p, std::optional<double> lambda,
                          const IterateOptions& opts = {}) {
    if (lambda && !(*lambda >= 0.0 && *lambda < 1.0))
        throw DomainError("contraction constant must lie in [0, 1), got " + format_double(*lambda));
    if (!(opts.tol > 0.0)) throw PreconditionError("tol must be positive");
    if (opts.max_iter < 1) throw PreconditionError("max_iter must be at least 1");

    OrbitTrace t;
    t.lambda_used = lambda;
    t.points.push_back(x0);

    auto finish = [&] {
        if (lambda && !t.p_gaps.empty()) {
            t.bound.resize(t.points.size());
            for (std::size_t n = 0; n < t.bound.size(); ++n)
                t.bound[n] = cauchy_bound(*lambda, t.p_gaps[0], n);
        }
    };

    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        const Point& x = t.points.back();
        std::optional<Point> next;
        try {
            next = map(x);
        } catch (const DomainError& e) {
            t.stop_reason = StopReason::Diverged;
            finish();
            throw DivergenceError("iterate " + std::to_string(it + 1) + " of " + map.name +
                                      " is not finite: " + e.what(),
                                  std::move(t));
        }
        const double dg = metric_eval(space, x, *next);
        const double pg = p(x, *next);
        t.d_gaps.push_back(dg);
        t.p_gaps.push_back(pg);
        t.points.push_back(std::move(*next));
        if (!std::isfinite(dg) || dg > opts.divergence_gap) {
            t.stop_reason = StopReason::Diverged;
            finish();
            throw DivergenceError("gap " + format_double(dg) + " at step " + std::to_string(it + 1) +
                                      " exceeds the divergence threshold",
                                  std::move(t));
        }
        if (dg <= opts.tol) {
            t.stop_reason = StopReason::Converged;
            finish();
            return t;
        }
    }
    t.stop_reason = StopReason::MaxIter;
    finish();
    return t;
}

/// Indices n >= 1 where p_gaps[n] > lambda p_gaps[n-1] + tol.
inline std::vector<std::size_t> gap_chaining_violations(const OrbitTrace& trace, double lambda,
                                                        double tol = 1e-12) {
    std::vector<std::size_t> bad;
    for (std::size_t n = 1; n < trace.p_gaps.size(); ++n)
        if (trace.p_gaps[n] > lambda * trace.p_gaps[n - 1] + tol) bad.push_back(n);
    return bad;
}

struct CauchyViolation {
    std::size_t n;
    std::size_t m;
    double value;  // p(x_n, x_m)
    double bound;  // u_n
};

struct CauchyCertificate {
    bool holds = true;
    std::size_t pairs_checked = 0;
    std::vector<CauchyViolation> violations;
};

/// p(x_n, x_m) <= u_n + tol for every recorded n < m, with p recomputed from
/// the stored points.
inline CauchyCertificate certify_cauchy(const OrbitTrace& trace, const WDistance& p,
                                       double tol = 1e-10) {
    if (trace.points.empty()) throw PreconditionError("empty orbit");
    if (trace.bound.size() != trace.points.size() && trace.points.size() > 1)
        throw PreconditionError("orbit carries no bound sequence (no contraction constant)");
    CauchyCertificate c;
    const auto& xs = trace.points;
    for (std::size_t n = 0; n < xs.size(); ++n)
        for (std::size_t m = n + 1; m < xs.size(); ++m) {
            ++c.pairs_checked;
            const double v = p(xs[n], xs[m]);
            if (v > trace.bound[n] + tol) c.violations.push_back({n, m, v, trace.bound[n]});
        }
    c.holds = c.violations.empty();
    return c;
}

struct LimitOptions {
    double vanish_tol = 1e-8;         // u_N, v_N must fall below this
    double hypothesis_slack = 1e-12;  // p(x_n, y) <= u_n + slack
    double min_separation_tol = 1e-9;
};

/// Numerical form of "p(x_n, y) <= u_n and p(x_n, z) <= v_n with u, v -> 0
/// force y = z".
///
/// The hypotheses are checked pointwise (PreconditionError names the first
/// failing n). Returns whether d(y, z) is within the separation tolerance
/// max(min_separation_tol, 2 max(u_N, v_N)), the delta = eps/2 rung of the
/// separation ladder for p = d.
inline bool certify_limit_uniqueness(const WDistance& p, std::span<const Point> xs, const Point& y,
                                     const Point& z, std::span<const double> u,
                                     std::span<const double> v, const MetricSpace& space,
                                     const LimitOptions& opts = {}) {
    if (xs.empty() || xs.size() != u.size() || xs.size() != v.size())
        throw PreconditionError("sequence and bound lengths differ or are empty");
    if (!(u.back() <= opts.vanish_tol) || !(v.back() <= opts.vanish_tol))
        throw PreconditionError("bound sequences do not vanish: u_N=" + format_double(u.back()) +
                                ", v_N=" + format_double(v.back()));
    for (std::size_t n = 0; n < xs.size(); ++n) {
        if (p(xs[n], y) > u[n] + opts.hypothesis_slack)
            throw PreconditionError("p(x_n, y) > u_n at n=" + std::to_string(n));
        if (p(xs[n], z) > v[n] + opts.hypothesis_slack)
            throw PreconditionError("p(x_n, z) > v_n at n=" + std::to_string(n));
    }
    const double sep = std::max(opts.min_separation_tol, 2.0 * std::max(u.back(), v.back()));
    return metric_eval(space, y, z) <= sep;
}

enum class Uniqueness { UniqueByCondition1, UniqueByCondition2, NotProbed, ProbeFailed };

[[nodiscard]] constexpr const char* to_string(Uniqueness u) noexcept {
    switch (u) {
        case Uniqueness::UniqueByCondition1: return "UniqueByCondition1";
        case Uniqueness::UniqueByCondition2: return "UniqueByCondition2";
        case Uniqueness::NotProbed: return "NotProbed";
        case Uniqueness::ProbeFailed: return "ProbeFailed";
    }
    return "Unknown";
}

/// Fixed point x with residual d(x, Tx) <= tol.
struct FixedPointCertificate {
    Point point;
    double residual;
    double p_self;  // p(x, x)
    Uniqueness unique = Uniqueness::NotProbed;
};

/// Re-applies the map once; no certificate unless the residual is within tol.
inline std::optional<FixedPointCertificate> certify_fixed_point(const SelfMap& map, const Point& x,
                                                                const MetricSpace& space,
                                                                const WDistance& p, double tol) {
    const double r = metric_eval(space, x, map(x));
    if (!(r <= tol)) return std::nullopt;
    return FixedPointCertificate{x, r, p(x, x), Uniqueness::NotProbed};
}

struct ProbeOptions {
    std::size_t n_steps = 100;
    double residual_tol = 1e-8;  // candidates must be this close to fixed
    LimitOptions limit;
};

struct UniquenessProbe {
    Uniqueness verdict = Uniqueness::ProbeFailed;
    std::optional<Point> z;  // the witness used by the first condition
    bool condition1_tried = false;
    bool condition2_complete = false;
    std::string detail;
};

namespace detail {

// Decay of p(T^n z, c) under lambda^n p(z, c), plus the slack a candidate that
// is only approximately fixed needs. Returns the bound sequence, or nothing.
inline std::optional<std::vector<double>> decay_bounds(const Relation& rel, const WDistance& p,
                                                       double lambda, double slack,
                                                       std::span<const Point> orbit, const Point& c) {
    std::vector<double> u(orbit.size());
    const double p0 = p(orbit[0], c);
    double lam_n = 1.0;
    for (std::size_t n = 0; n < orbit.size(); ++n) {
        u[n] = lam_n * p0 + slack;
        if (!rel(orbit[n], c) || p(orbit[n], c) > u[n]) return std::nullopt;
        lam_n *= lambda;
    }
    return u;
}

}  // namespace detail

/// Uniqueness probes for a set of numerically fixed points.
///
/// Condition 1: some z (searched among the images T s, then the sample points
/// s) is related to every candidate, the orbit T^n z decays towards each
/// candidate as lambda^n p(z, c), and certify_limit_uniqueness then forces the
/// candidates to coincide. Condition 2: R is complete on the image sample, the
/// candidates are pairwise related and lie within the separation tolerance.
inline UniquenessProbe probe_uniqueness(const Relation& rel, const SelfMap& map, const WDistance& p,
                                        const MetricSpace& space, double lambda,
                                        std::span<const Point> candidates,
                                        std::span<const Point> sample, const ProbeOptions& opts = {}) {
    if (candidates.empty()) throw PreconditionError("no fixed-point candidates to probe");
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw DomainError("contraction constant must lie in [0, 1), got " + format_double(lambda));
    double worst_residual = 0.0;
    for (const auto& c : candidates) {
        const double r = metric_eval(space, c, map(c));
        if (!(r <= opts.residual_tol))
            throw PreconditionError("candidate " + c.describe() + " has residual " + format_double(r));
        worst_residual = std::max(worst_residual, r);
    }
    // An exact fixed point x* lies within residual / (1 - lambda) of each candidate.
    const double slack = worst_residual / (1.0 - lambda) + opts.limit.hypothesis_slack;

    UniquenessProbe out;
    std::vector<Point> images;
    images.reserve(sample.size());
    for (const auto& s : sample) images.push_back(map(s));

    std::vector<const Point*> pool;
    for (const auto& s : images) pool.push_back(&s);
    for (const auto& s : sample) pool.push_back(&s);

    LimitOptions lim = opts.limit;
    lim.hypothesis_slack = 0.0;
    for (const Point* zp : pool) {
        bool related_to_all = true;
        for (const auto& c : candidates) related_to_all = related_to_all && rel(*zp, c);
        if (!related_to_all) continue;
        out.condition1_tried = true;

        std::vector<Point> orbit{*zp};
        for (std::size_t n = 0; n < opts.n_steps; ++n) orbit.push_back(map(orbit.back()));

        std::vector<std::vector<double>> bounds;
        for (const auto& c : candidates) {
            auto u = detail::decay_bounds(rel, p, lambda, slack, orbit, c);
            if (!u) break;
            bounds.push_back(std::move(*u));
        }
        if (bounds.size() != candidates.size()) continue;
        if (bounds.front().back() > lim.vanish_tol) continue;

        bool all_coincide = true;
        for (std::size_t i = 0; i < candidates.size() && all_coincide; ++i)
            for (std::size_t j = i; j < candidates.size() && all_coincide; ++j)
                all_coincide = certify_limit_uniqueness(p, orbit, candidates[i], candidates[j],
                                                        bounds[i], bounds[j], space, lim);
        if (all_coincide) {
            out.verdict = Uniqueness::UniqueByCondition1;
            out.z = *zp;
            out.detail = "z = " + zp->describe() + " related to every candidate; orbit decay verified over " +
                         std::to_string(opts.n_steps) + " steps";
            return out;
        }
    }

    out.condition2_complete = check_complete_on(rel, images).holds();
    if (out.condition2_complete) {
        const double sep = std::max(lim.min_separation_tol, 2.0 * slack);
        bool ok = true;
        for (std::size_t i = 0; i < candidates.size() && ok; ++i)
            for (std::size_t j = i + 1; j < candidates.size() && ok; ++j)
                ok = rel.either_order(candidates[i], candidates[j]) &&
                     metric_eval(space, candidates[i], candidates[j]) <= sep;
        if (ok) {
            out.verdict = Uniqueness::UniqueByCondition2;
            out.detail = "relation complete on " + std::to_string(images.size()) +
                         " sampled images; candidates pairwise related and coincide";
            return out;
        }
    }
    out.verdict = Uniqueness::ProbeFailed;
    out.detail = out.condition1_tried ? "no z with a verified decaying orbit; relation not complete on images"
                                      : "no z related to every candidate; relation not complete on images";
    return out;
}

/// CSV with columns n, point-or-norm, d_gap, p_gap, bound. Row n carries the
/// gaps of (x_n, x_{n+1}); the last row leaves them empty.
inline void write_orbit_csv(std::ostream& os, const OrbitTrace& trace) {
    os << "n,point,d_gap,p_gap,bound\n";
    for (std::size_t n = 0; n < trace.points.size(); ++n) {
        const Point& x = trace.points[n];
        os << n << ',' << format_double(x.is_scalar() ? x.scalar() : x.sup_norm()) << ',';
        if (n < trace.d_gaps.size()) os << format_double(trace.d_gaps[n]) << ',' << format_double(trace.p_gaps[n]);
        else os << ',';
        os << ',';
        if (n < trace.bound.size()) os << format_double(trace.bound[n]);
        os << '\n';
    }
}

}  // namespace relfix
