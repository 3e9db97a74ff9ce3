#pragma once

// Worked examples as executable fixtures: spaces, relations, maps, w-distances
// and the finite sequences their limit arguments are checked on.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "relfix/errors.hpp"
#include "relfix/relation.hpp"
#include "relfix/space.hpp"
#include "relfix/w_distance.hpp"

namespace relfix::fixtures {

enum class ExampleId { Ex1_7, Ex1_13, Ex1_14, Ex2_3, Ex2_4 };

inline constexpr const char* to_string(ExampleId id) noexcept {
    switch (id) {
        case ExampleId::Ex1_7: return "Ex1_7";
        case ExampleId::Ex1_13: return "Ex1_13";
        case ExampleId::Ex1_14: return "Ex1_14";
        case ExampleId::Ex2_3: return "Ex2_3";
        case ExampleId::Ex2_4: return "Ex2_4";
    }
    return "Unknown";
}

inline std::optional<ExampleId> parse_example_id(const std::string& s) {
    for (auto id : {ExampleId::Ex1_7, ExampleId::Ex1_13, ExampleId::Ex1_14, ExampleId::Ex2_3, ExampleId::Ex2_4})
        if (s == to_string(id)) return id;
    return std::nullopt;
}

/// Finite sequence with its limit and the distance of its last entry to it.
struct LimitSequence {
    std::vector<Point> points;
    Point limit;
    double convergence_tol;
};

inline LimitSequence make_sequence(std::size_t first, std::size_t last, double limit, auto&& term) {
    LimitSequence s{{}, limit, 0.0};
    for (std::size_t n = first; n <= last; ++n) s.points.emplace_back(term(static_cast<double>(n)));
    s.convergence_tol = std::abs(s.points.back().scalar() - limit) * (1.0 + 1e-12);
    return s;
}

// ---------------------------------------------------------------------------
// Naturals with (x, y) in R iff x even and y odd; f(x) = x + 1.

inline bool is_integer(double x) { return std::floor(x) == x; }

inline Relation even_odd_relation() {
    return {"even->odd",
            [](const Point& x, const Point& y) {
                const double a = x.scalar(), b = y.scalar();
                return is_integer(a) && is_integer(b) && a >= 1 && b >= 1 && std::fmod(a, 2.0) == 0.0 &&
                       std::fmod(b, 2.0) == 1.0;
            },
            "x = 2m, y = 2n + 1 on the positive integers"};
}

inline SelfMap successor_map() {
    return {"x+1", [](const Point& x) { return Point(x.scalar() + 1.0); }};
}

/// {1, ..., 20} as the unit lattice of [1, 20].
inline MetricSpace naturals_space() { return MetricSpace::closed(1.0, 20.0); }

// ---------------------------------------------------------------------------
// Ceiling function: (x, y) in R iff both lie in (m - 1/5, m + 1/5) for one integer m.

inline Relation near_integer_relation() {
    return {"near-same-integer",
            [](const Point& x, const Point& y) {
                const double a = x.scalar(), b = y.scalar();
                const double m = std::round(a);
                return std::abs(a - m) < 0.2 && std::abs(b - m) < 0.2;
            },
            "x, y in (m - 1/5, m + 1/5) for some integer m"};
}

/// ceil(x) as p(anchor, x); the anchor is ignored.
inline WDistance ceiling_function() {
    return {"ceil", [](const Point&, const Point& x) { return std::ceil(x.scalar()); }};
}

inline SelfMap ceiling_map() {
    return {"ceil", [](const Point& x) { return Point(std::ceil(x.scalar())); }};
}

inline MetricSpace real_line_window() { return MetricSpace::closed(-10.0, 10.0); }

/// 1 - 1/(5(n+1)), n = 1..count: approaches 1 from the left inside (4/5, 6/5).
inline LimitSequence ceiling_left_sequence(std::size_t count = 400) {
    return make_sequence(1, count, 1.0, [](double n) { return 1.0 - 1.0 / (5.0 * (n + 1.0)); });
}

inline LimitSequence ceiling_right_sequence(std::size_t count = 400) {
    return make_sequence(1, count, 1.0, [](double n) { return 1.0 + 1.0 / (5.0 * (n + 1.0)); });
}

// ---------------------------------------------------------------------------
// (x, y) in R iff xy <= x or xy <= y. Shared by the piecewise-LSC example and
// the w-distance p(x, y) = y example.

inline Relation product_relation() {
    return {"xy<=x|y",
            [](const Point& x, const Point& y) {
                const double a = x.scalar(), b = y.scalar();
                return a * b <= a || a * b <= b;
            },
            "xy <= x or xy <= y"};
}

/// 2 on [0,1), 1 at 1, 1/2 beyond; as p(anchor, x) with the anchor ignored.
inline double piecewise_step(double x) {
    if (x < 1.0) return 2.0;
    if (x == 1.0) return 1.0;
    return 0.5;
}

inline WDistance piecewise_function() {
    return {"2|1|1/2", [](const Point&, const Point& x) { return piecewise_step(x.scalar()); }};
}

inline MetricSpace half_line_window() { return MetricSpace::closed(0.0, 10.0); }

/// 1 - 1/(n+1), n = 1..count.
inline LimitSequence below_one_sequence(std::size_t count = 400) {
    return make_sequence(1, count, 1.0, [](double n) { return 1.0 - 1.0 / (n + 1.0); });
}

inline LimitSequence above_one_sequence(std::size_t count = 400) {
    return make_sequence(1, count, 1.0, [](double n) { return 1.0 + 1.0 / (n + 1.0); });
}

// ---------------------------------------------------------------------------
// X = [1, 3), R: x >= y, T = x/2 on [1,2), 2 on [2,3), p(x, y) = |x| + |y|.

inline MetricSpace ex23_space() { return MetricSpace::half_open(1.0, 3.0); }

inline Relation geq_relation() {
    return {"x>=y", [](const Point& x, const Point& y) { return x.scalar() >= y.scalar(); }, "x >= y"};
}

inline SelfMap ex23_map() {
    return {"x/2 | 2", [](const Point& x) {
                const double v = x.scalar();
                return Point(v < 2.0 ? v / 2.0 : 2.0);
            }};
}

/// 2 + 1/n, n = 1..count: decreasing towards 2.
inline LimitSequence ex23_decreasing_sequence(std::size_t count = 100) {
    return make_sequence(1, count, 2.0, [](double n) { return 2.0 + 1.0 / n; });
}

// ---------------------------------------------------------------------------
// X = [0, 2], R: xy <= x or y, p(x, y) = y, four-branch T.

inline MetricSpace ex24_space() { return MetricSpace::closed(0.0, 2.0); }

inline double ex24_step(double x) {
    if (x <= 2.0 / 3.0) return x / 3.0;
    if (x < 1.0) return 1.0 - x;
    if (x == 1.0) return 0.75;
    return x - 0.5;
}

inline SelfMap ex24_map() {
    return {"x/3 | 1-x | 3/4 | x-1/2", [](const Point& x) { return Point(ex24_step(x.scalar())); }};
}

}  // namespace relfix::fixtures
