#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "relfix/errors.hpp"

namespace relfix {

/// Uniform grid on [0,1] with n subintervals; nodes t_i = i/n.
class Grid {
public:
    explicit Grid(std::size_t n) : n_(n) {
        if (n == 0) throw DomainError("grid needs at least one subinterval");
    }

    [[nodiscard]] std::size_t intervals() const noexcept { return n_; }
    [[nodiscard]] std::size_t node_count() const noexcept { return n_ + 1; }
    [[nodiscard]] double step() const noexcept { return 1.0 / static_cast<double>(n_); }

    // i/n rather than i*h so that the last node is exactly 1.
    [[nodiscard]] double node(std::size_t i) const noexcept {
        return static_cast<double>(i) / static_cast<double>(n_);
    }

    [[nodiscard]] std::vector<double> nodes() const {
        std::vector<double> t(node_count());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = node(i);
        return t;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t n_;
};

/// Node values of a function [0,1] -> R on a Grid.
struct GridFn {
    Grid grid;
    std::vector<double> values;

    friend bool operator==(const GridFn&, const GridFn&) = default;
};

/// A point of one of the two supported spaces: a real scalar or a grid function.
/// Values are always finite; construction rejects NaN/Inf with DomainError.
class Point {
public:
    Point(double value) : data_(value) {  // NOLINT(google-explicit-constructor)
        if (!std::isfinite(value)) throw DomainError("non-finite scalar point");
    }

    explicit Point(GridFn fn) : data_(std::move(fn)) {
        const auto& g = std::get<GridFn>(data_);
        if (g.values.size() != g.grid.node_count())
            throw ShapeError("grid function has " + std::to_string(g.values.size()) +
                             " values for " + std::to_string(g.grid.node_count()) + " nodes");
        for (double v : g.values)
            if (!std::isfinite(v)) throw DomainError("non-finite grid function value");
    }

    static Point on_grid(const Grid& grid, std::vector<double> values) {
        return Point(GridFn{grid, std::move(values)});
    }

    /// Samples fn(t) at every node.
    template <typename Fn>
    static Point sample_fn(const Grid& grid, Fn&& fn) {
        std::vector<double> v(grid.node_count());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
        return on_grid(grid, std::move(v));
    }

    static Point constant(const Grid& grid, double c) {
        return on_grid(grid, std::vector<double>(grid.node_count(), c));
    }

    [[nodiscard]] bool is_scalar() const noexcept { return std::holds_alternative<double>(data_); }
    [[nodiscard]] bool is_grid_fn() const noexcept { return std::holds_alternative<GridFn>(data_); }

    [[nodiscard]] double scalar() const {
        if (!is_scalar()) throw ShapeError("expected a scalar point");
        return std::get<double>(data_);
    }

    [[nodiscard]] const GridFn& grid_fn() const {
        if (!is_grid_fn()) throw ShapeError("expected a grid function point");
        return std::get<GridFn>(data_);
    }

    [[nodiscard]] std::span<const double> values() const {
        if (is_scalar()) return {&std::get<double>(data_), 1};
        return std::get<GridFn>(data_).values;
    }

    /// |x| for scalars, max |x(t_i)| for grid functions.
    [[nodiscard]] double sup_norm() const {
        double m = 0.0;
        for (double v : values()) m = std::max(m, std::abs(v));
        return m;
    }

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        if (is_scalar()) {
            os << scalar();
        } else {
            const auto& g = grid_fn();
            os << "gridfn(n=" << g.grid.intervals() << ", sup=" << sup_norm() << ")";
        }
        return os.str();
    }

    friend bool operator==(const Point&, const Point&) = default;

private:
    std::variant<double, GridFn> data_;
};

/// Real interval [lo, hi] or [lo, hi). Membership uses exact comparisons.
struct Interval {
    double lo;
    double hi;
    bool hi_inclusive = true;

    [[nodiscard]] bool contains(double x) const noexcept {
        return x >= lo && (hi_inclusive ? x <= hi : x < hi);
    }
};

/// Grid functions on [0,1] with the max-over-nodes metric.
struct FunctionSpace {
    Grid grid;
};

/// A metric space of one of the two supported kinds.
class MetricSpace {
public:
    explicit MetricSpace(Interval iv) : kind_(iv) {
        if (!(iv.lo < iv.hi) && !(iv.lo == iv.hi && iv.hi_inclusive))
            throw DomainError("empty interval space");
    }
    explicit MetricSpace(FunctionSpace fs) : kind_(fs) {}

    static MetricSpace closed(double lo, double hi) { return MetricSpace(Interval{lo, hi, true}); }
    static MetricSpace half_open(double lo, double hi) { return MetricSpace(Interval{lo, hi, false}); }
    static MetricSpace functions(std::size_t n) { return MetricSpace(FunctionSpace{Grid(n)}); }

    [[nodiscard]] bool is_interval() const noexcept { return std::holds_alternative<Interval>(kind_); }
    [[nodiscard]] const Interval& interval() const { return std::get<Interval>(kind_); }
    [[nodiscard]] const FunctionSpace& function_space() const { return std::get<FunctionSpace>(kind_); }

    [[nodiscard]] bool contains(const Point& x) const {
        if (is_interval()) return x.is_scalar() && interval().contains(x.scalar());
        return x.is_grid_fn() && x.grid_fn().grid == function_space().grid;
    }

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        if (is_interval()) {
            const auto& iv = interval();
            os << "[" << iv.lo << ", " << iv.hi << (iv.hi_inclusive ? "]" : ")");
        } else {
            os << "C([0,1]) on grid n=" << function_space().grid.intervals();
        }
        return os.str();
    }

private:
    std::variant<Interval, FunctionSpace> kind_;
};

/// d(x, y): |x - y| on intervals, max_i |x(t_i) - y(t_i)| on function spaces.
/// Only the point kinds are checked; scalar membership in the interval is not
/// required so that images leaving the declared space can still be measured.
inline double metric_eval(const MetricSpace& space, const Point& x, const Point& y) {
    if (space.is_interval()) {
        if (!x.is_scalar() || !y.is_scalar())
            throw ShapeError("interval metric needs scalar points");
        return std::abs(x.scalar() - y.scalar());
    }
    const auto& grid = space.function_space().grid;
    if (!x.is_grid_fn() || !y.is_grid_fn())
        throw ShapeError("function-space metric needs grid function points");
    if (!(x.grid_fn().grid == grid) || !(y.grid_fn().grid == grid))
        throw ShapeError("grid function lives on a different grid than the space");
    const auto& a = x.grid_fn().values;
    const auto& b = y.grid_fn().values;
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// How to draw a finite sample of a space.
struct SampleSpec {
    double step = 0.1;       // interval lattice spacing
    std::size_t count = 16;  // random grid functions (the zero function is added)
    std::uint64_t seed = 0;
    double box_lo = 0.0;     // per-node range of random grid functions
    double box_hi = 2.0;

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << "step=" << step << " count=" << count << " seed=" << seed << " box=[" << box_lo
           << ", " << box_hi << "]";
        return os.str();
    }
};

namespace detail {

// Uniform double in [0,1) from the top 53 bits; mt19937_64 output is fixed
// by the standard, so samples are identical across platforms.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Deterministic finite sample of a space.
///
/// Intervals: the lattice lo, lo+step, ... that lies inside the interval
/// (an open right endpoint is excluded). Function spaces: `count` grid
/// functions with node values uniform in [box_lo, box_hi], followed by the
/// constant zero function.
inline std::vector<Point> sample_space(const MetricSpace& space, const SampleSpec& spec) {
    std::vector<Point> out;
    if (space.is_interval()) {
        if (!(spec.step > 0.0)) throw SamplingError("interval sampling needs step > 0");
        const auto& iv = space.interval();
        // Tolerate rounding in the count so that e.g. [0,2] step 0.01 reaches 2.
        const auto last = static_cast<std::size_t>(std::floor((iv.hi - iv.lo) / spec.step + 1e-9));
        out.reserve(last + 1);
        for (std::size_t i = 0; i <= last; ++i) {
            const double x = iv.lo + static_cast<double>(i) * spec.step;
            if (iv.contains(x)) out.emplace_back(x);
        }
    } else {
        if (spec.count == 0) throw SamplingError("function-space sampling needs count > 0");
        if (!(spec.box_lo <= spec.box_hi)) throw SamplingError("empty sampling box");
        const auto& grid = space.function_space().grid;
        std::mt19937_64 rng(spec.seed);
        out.reserve(spec.count + 1);
        for (std::size_t c = 0; c < spec.count; ++c) {
            std::vector<double> v(grid.node_count());
            for (auto& x : v) x = spec.box_lo + (spec.box_hi - spec.box_lo) * detail::unit_uniform(rng);
            out.push_back(Point::on_grid(grid, std::move(v)));
        }
        out.push_back(Point::constant(grid, 0.0));
    }
    if (out.empty()) throw SamplingError("sample of " + space.describe() + " is empty");
    return out;
}

}  // namespace relfix
