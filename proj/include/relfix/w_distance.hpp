#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relfix/errors.hpp"
#include "relfix/relation.hpp"
#include "relfix/space.hpp"

namespace relfix {

/// Candidate w-distance p : X x X -> [0, inf). Neither symmetry nor
/// p(x, x) = 0 is assumed.
struct WDistance {
    std::string name;
    std::function<double(const Point&, const Point&)> p;

    [[nodiscard]] double operator()(const Point& x, const Point& y) const { return p(x, y); }
};

/// p = d, the metric of the space itself.
inline WDistance metric_w_distance(const MetricSpace& space) {
    return {"d", [space](const Point& x, const Point& y) { return metric_eval(space, x, y); }};
}

/// p(x, y) = |x| + |y| on scalars.
inline WDistance abs_sum_w_distance() {
    return {"|x|+|y|", [](const Point& x, const Point& y) {
                return std::abs(x.scalar()) + std::abs(y.scalar());
            }};
}

/// p(x, y) = y on nonnegative scalars.
inline WDistance second_argument_w_distance() {
    return {"y", [](const Point&, const Point& y) { return y.scalar(); }};
}

enum class Axiom { W1Triangle, W2RLsc, W3Separation };

[[nodiscard]] constexpr const char* to_string(Axiom a) noexcept {
    switch (a) {
        case Axiom::W1Triangle: return "W1Triangle";
        case Axiom::W2RLsc: return "W2RLsc";
        case Axiom::W3Separation: return "W3Separation";
    }
    return "Unknown";
}

struct W3Row {
    double eps;
    std::optional<double> delta;  // largest working ladder value, if any
};

struct AxiomReport {
    Axiom axiom;
    Verdict verdict = Verdict::HoldsOnSample;
    std::vector<std::vector<Point>> witnesses{};
    std::size_t violations = 0;

    // W2: min of p(anchor, x_n) over the tail window, and p(anchor, limit).
    double tail_min = 0.0;
    double limit_value = 0.0;

    std::vector<W3Row> w3_table{};

    [[nodiscard]] bool holds() const noexcept { return verdict == Verdict::HoldsOnSample; }
};

inline constexpr std::size_t kMaxStoredWitnesses = 16;

/// Geometric ladder 1, 1/2, ..., 2^-levels.
inline std::vector<double> geometric_ladder(int levels = 20) {
    std::vector<double> out;
    for (int i = 0; i <= levels; ++i) out.push_back(std::ldexp(1.0, -i));
    return out;
}

/// Triangle inequality: p(x, z) <= p(x, y) + p(y, z) over every sampled triple.
inline AxiomReport check_triangle(const WDistance& p, std::span<const Point> sample) {
    if (sample.empty()) throw PreconditionError("sample must be nonempty");
    const std::size_t n = sample.size();
    std::vector<double> pm(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) pm[i * n + j] = p(sample[i], sample[j]);

    AxiomReport r{Axiom::W1Triangle};
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t z = 0; z < n; ++z) {
                const double lhs = pm[x * n + z];
                const double rhs = pm[x * n + y] + pm[y * n + z];
                if (lhs > rhs + 1e-12 * std::max(1.0, rhs)) {
                    ++r.violations;
                    if (r.witnesses.size() < kMaxStoredWitnesses)
                        r.witnesses.push_back({sample[x], sample[y], sample[z]});
                }
            }
    if (r.violations > 0) r.verdict = Verdict::FailsWithWitness;
    return r;
}

struct RlscOptions {
    TailOptions tail;
    double tol = 1e-9;
};

/// Lower semicontinuity along one sequence: min over the tail of p(anchor, x_n) must reach
/// p(anchor, limit) - tol. The min over the tail window stands in for liminf.
inline AxiomReport check_rlsc(const WDistance& p, const Point& anchor, const Relation& rel,
                              std::span<const Point> seq, const Point& limit,
                              const MetricSpace& space, const RlscOptions& opts = {}) {
    require_preserving_and_convergent(rel, seq, limit, space, opts.tail);
    AxiomReport r{Axiom::W2RLsc};
    r.limit_value = p(anchor, limit);
    r.tail_min = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = opts.tail.tail_begin(seq.size()); i < seq.size(); ++i) {
        const double v = p(anchor, seq[i]);
        if (v < r.tail_min) {
            r.tail_min = v;
            arg = i;
        }
    }
    if (r.tail_min < r.limit_value - opts.tol) {
        r.verdict = Verdict::FailsWithWitness;
        r.violations = 1;
        r.witnesses.push_back({anchor, seq[arg], limit});
    }
    return r;
}

/// Separation: for each eps, the largest ladder delta such that p(z, x) <= delta and
/// p(z, y) <= delta imply d(x, y) <= eps on every sampled triple.
inline AxiomReport check_w3(const WDistance& p, const MetricSpace& space,
                            std::span<const Point> sample, std::span<const double> eps_grid,
                            std::span<const double> delta_ladder) {
    if (sample.empty()) throw PreconditionError("sample must be nonempty");
    if (eps_grid.empty() || delta_ladder.empty())
        throw PreconditionError("eps grid and delta ladder must be nonempty");
    for (double e : eps_grid)
        if (!(e > 0.0)) throw PreconditionError("eps values must be positive");
    for (std::size_t i = 0; i < delta_ladder.size(); ++i) {
        if (!(delta_ladder[i] > 0.0)) throw PreconditionError("delta ladder must be positive");
        if (i > 0 && !(delta_ladder[i] < delta_ladder[i - 1]))
            throw PreconditionError("delta ladder must be strictly descending");
    }

    const std::size_t n = sample.size();
    std::vector<double> dm(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            dm[i * n + j] = dm[j * n + i] = metric_eval(space, sample[i], sample[j]);

    // For every ladder delta: the widest p(z, .)-ball over z, with its witness.
    struct Worst {
        double diameter = 0.0;
        std::size_t z = 0, x = 0, y = 0;
    };
    std::vector<Worst> worst(delta_ladder.size());

    std::vector<std::size_t> order(n);
    std::vector<double> pz(n), prefix_diam(n);
    std::vector<std::pair<std::size_t, std::size_t>> prefix_arg(n);
    for (std::size_t z = 0; z < n; ++z) {
        for (std::size_t x = 0; x < n; ++x) pz[x] = p(sample[z], sample[x]);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pz[a] < pz[b]; });
        double diam = 0.0;
        std::pair<std::size_t, std::size_t> arg{order[0], order[0]};
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < k; ++j) {
                const double d = dm[order[k] * n + order[j]];
                if (d > diam) {
                    diam = d;
                    arg = {order[j], order[k]};
                }
            }
            prefix_diam[k] = diam;
            prefix_arg[k] = arg;
        }
        std::vector<double> sorted_p(n);
        for (std::size_t k = 0; k < n; ++k) sorted_p[k] = pz[order[k]];
        for (std::size_t li = 0; li < delta_ladder.size(); ++li) {
            const auto cnt = static_cast<std::size_t>(
                std::upper_bound(sorted_p.begin(), sorted_p.end(), delta_ladder[li]) - sorted_p.begin());
            if (cnt == 0) continue;
            if (prefix_diam[cnt - 1] > worst[li].diameter)
                worst[li] = {prefix_diam[cnt - 1], z, prefix_arg[cnt - 1].first, prefix_arg[cnt - 1].second};
        }
    }

    AxiomReport r{Axiom::W3Separation};
    for (double eps : eps_grid) {
        W3Row row{eps, std::nullopt};
        for (std::size_t li = 0; li < delta_ladder.size(); ++li) {
            if (worst[li].diameter <= eps * (1.0 + 1e-12)) {
                row.delta = delta_ladder[li];
                break;
            }
        }
        if (!row.delta) {
            ++r.violations;
            const auto& w = worst.back();
            if (r.witnesses.size() < kMaxStoredWitnesses)
                r.witnesses.push_back({sample[w.z], sample[w.x], sample[w.y]});
        }
        r.w3_table.push_back(row);
    }
    if (r.violations > 0) r.verdict = Verdict::FailsWithWitness;
    return r;
}

}  // namespace relfix
