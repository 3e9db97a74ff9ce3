#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "relfix/errors.hpp"
#include "relfix/space.hpp"

namespace relfix {

/// Decidable binary relation R on a space; holds(x, y) means (x, y) in R.
struct Relation {
    std::string name;
    std::function<bool(const Point&, const Point&)> holds;
    std::string note{};

    [[nodiscard]] bool operator()(const Point& x, const Point& y) const { return holds(x, y); }

    /// [x, y] in R: related in at least one order.
    [[nodiscard]] bool either_order(const Point& x, const Point& y) const {
        return holds(x, y) || holds(y, x);
    }
};

inline Relation universal_relation() {
    return {"universal", [](const Point&, const Point&) { return true; }, "X x X"};
}

inline Relation empty_relation() {
    return {"empty", [](const Point&, const Point&) { return false; }, "no pairs"};
}

/// Self map T of a space.
struct SelfMap {
    std::string name;
    std::function<Point(const Point&)> apply;

    [[nodiscard]] Point operator()(const Point& x) const { return apply(x); }
};

inline SelfMap identity_map() {
    return {"identity", [](const Point& x) { return x; }};
}

struct PointPair {
    Point first;
    Point second;
};

enum class RelationProperty { TClosed, WeakTClosed, Complete, StartPointsNonempty };
enum class Verdict { HoldsOnSample, FailsWithWitness };

[[nodiscard]] constexpr const char* to_string(RelationProperty p) noexcept {
    switch (p) {
        case RelationProperty::TClosed: return "TClosed";
        case RelationProperty::WeakTClosed: return "WeakTClosed";
        case RelationProperty::Complete: return "Complete";
        case RelationProperty::StartPointsNonempty: return "StartPointsNonempty";
    }
    return "Unknown";
}

[[nodiscard]] constexpr const char* to_string(Verdict v) noexcept {
    return v == Verdict::HoldsOnSample ? "HoldsOnSample" : "FailsWithWitness";
}

/// Sample-relative verdict on a relation property. A failing report always
/// carries at least one counterexample pair.
struct RelationReport {
    RelationProperty property;
    Verdict verdict = Verdict::HoldsOnSample;
    std::vector<PointPair> witnesses;
    std::size_t sample_size = 0;

    [[nodiscard]] bool holds() const noexcept { return verdict == Verdict::HoldsOnSample; }
};

/// Finite stand-in for "infinite tail": the last `tail_fraction` of a sequence.
struct TailOptions {
    double tail_fraction = 0.25;
    // A finite sequence counts as converging to `limit` when its last entry
    // is within this distance.
    double convergence_tol = 1e-9;

    [[nodiscard]] std::size_t tail_begin(std::size_t len) const {
        auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(len)));
        tail = std::clamp<std::size_t>(tail, 1, len);
        return len - tail;
    }
};

/// True iff every consecutive pair (x_n, x_{n+1}) is related. Indices start at 0.
inline bool is_preserving(const Relation& rel, std::span<const Point> seq) {
    if (seq.size() < 2) throw PreconditionError("a preserving check needs at least two points");
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (!rel(seq[i], seq[i + 1])) return false;
    return true;
}

namespace detail {

inline RelationReport make_report(RelationProperty prop, std::size_t n, std::vector<PointPair> bad) {
    RelationReport r{prop, Verdict::HoldsOnSample, std::move(bad), n};
    if (!r.witnesses.empty()) r.verdict = Verdict::FailsWithWitness;
    return r;
}

inline void require_sample(std::span<const Point> sample) {
    if (sample.empty()) throw PreconditionError("sample must be nonempty");
}

template <typename Accept>
RelationReport closure_check(RelationProperty prop, const Relation& rel, const SelfMap& map,
                             std::span<const Point> sample, Accept accept) {
    require_sample(sample);
    std::vector<Point> images;
    images.reserve(sample.size());
    for (const auto& x : sample) images.push_back(map(x));
    std::vector<PointPair> bad;
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = 0; j < sample.size(); ++j)
            if (rel(sample[i], sample[j]) && !accept(images[i], images[j]))
                bad.push_back({sample[i], sample[j]});
    return make_report(prop, sample.size(), std::move(bad));
}

}  // namespace detail

/// (x, y) in R implies (Tx, Ty) in R, for every sampled pair. Witnesses are the
/// preimage pairs whose images fall out of R.
inline RelationReport check_t_closed(const Relation& rel, const SelfMap& map,
                                     std::span<const Point> sample) {
    return detail::closure_check(RelationProperty::TClosed, rel, map, sample,
                                 [&](const Point& a, const Point& b) { return rel(a, b); });
}

/// (x, y) in R implies [Tx, Ty] in R.
inline RelationReport check_weak_t_closed(const Relation& rel, const SelfMap& map,
                                          std::span<const Point> sample) {
    return detail::closure_check(RelationProperty::WeakTClosed, rel, map, sample,
                                 [&](const Point& a, const Point& b) { return rel.either_order(a, b); });
}

/// Sampled members of X(T, R) = {x : (x, Tx) in R}.
inline std::vector<Point> find_start_points(const Relation& rel, const SelfMap& map,
                                            std::span<const Point> sample) {
    detail::require_sample(sample);
    std::vector<Point> out;
    for (const auto& x : sample)
        if (rel(x, map(x))) out.push_back(x);
    return out;
}

/// Every unordered pair of the sample, diagonal included, is related in some order.
inline RelationReport check_complete_on(const Relation& rel, std::span<const Point> sample) {
    detail::require_sample(sample);
    std::vector<PointPair> bad;
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = i; j < sample.size(); ++j)
            if (!rel.either_order(sample[i], sample[j])) bad.push_back({sample[i], sample[j]});
    return detail::make_report(RelationProperty::Complete, sample.size(), std::move(bad));
}

/// Throws PreconditionError unless seq is R-preserving and its last entry is
/// within opts.convergence_tol of limit.
inline void require_preserving_and_convergent(const Relation& rel, std::span<const Point> seq,
                                              const Point& limit, const MetricSpace& space,
                                              const TailOptions& opts) {
    if (seq.size() < 2) throw PreconditionError("sequence needs at least two entries");
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (!rel(seq[i], seq[i + 1]))
            throw PreconditionError("sequence is not " + rel.name + "-preserving at index " +
                                    std::to_string(i));
    const double gap = metric_eval(space, seq.back(), limit);
    if (gap > opts.convergence_tol)
        throw PreconditionError("sequence does not reach its limit: final distance " +
                                std::to_string(gap));
}

struct SelfClosedWitness {
    bool holds = false;
    std::vector<std::size_t> related;  // n with (x_n, limit) in R
    std::vector<std::size_t> failing;  // tail indices where it fails
    std::size_t tail_begin = 0;
};

/// Finite proxy for d-self-closedness: the subsequence of indices related to
/// the limit must cover the whole tail window.
inline SelfClosedWitness witness_d_self_closed(const Relation& rel, std::span<const Point> seq,
                                               const Point& limit, const MetricSpace& space,
                                               const TailOptions& opts = {}) {
    require_preserving_and_convergent(rel, seq, limit, space, opts);
    SelfClosedWitness w;
    w.tail_begin = opts.tail_begin(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (rel(seq[i], limit))
            w.related.push_back(i);
        else if (i >= w.tail_begin)
            w.failing.push_back(i);
    }
    w.holds = w.failing.empty();
    return w;
}

/// R-continuity of `map` along one R-preserving sequence: T(x_n) -> T(limit),
/// judged by the largest tail distance d(T x_n, T limit) <= tol.
inline bool is_r_continuous_along(const SelfMap& map, const Relation& rel, std::span<const Point> seq,
                                  const Point& limit, const MetricSpace& space,
                                  const TailOptions& opts = {}, double tol = 1e-9) {
    require_preserving_and_convergent(rel, seq, limit, space, opts);
    const Point target = map(limit);
    for (std::size_t i = opts.tail_begin(seq.size()); i < seq.size(); ++i)
        if (metric_eval(space, map(seq[i]), target) > tol) return false;
    return true;
}

}  // namespace relfix
