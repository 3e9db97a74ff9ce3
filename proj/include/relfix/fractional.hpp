#pragma once

// Nonlinear Caputo boundary-value problem
//
//     ^C D^beta x(t) = f(t, x(t)),  0 < t < 1,  1 < beta <= 2,
//     x(0) = 0,  x(1) = -int_0^k x(s) ds,  0 < k < 1,
//
// solved as a fixed point of the integral operator
//
//     Tx(t) = I^beta g(t) + s * 2t/(2+k^2) * [ I^beta g(1) + int_0^k I^beta g(s) ds ],
//     g(t) = f(t, x(t)),
//
// with s = +1 (operator as printed, PaperExact) or s = -1 (GreenCorrected,
// the Green's-function form that satisfies the boundary condition).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
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

/// Gamma function for z > 0.
///
/// Lanczos approximation (g = 7, nine terms) on z >= 1/2; smaller arguments
/// are shifted up with Gamma(z) = Gamma(z + 1) / z. Relative error stays
/// below 1e-12 on [0.1, 30].
inline double gamma_fn(double z) {
    if (!(z > 0.0)) throw DomainError("gamma_fn is only defined here for z > 0, got " + format_double(z));
    if (z < 0.5) return gamma_fn(z + 1.0) / z;
    static constexpr double g = 7.0;
    static constexpr std::array<double, 9> c = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    const double zm = z - 1.0;
    double a = c[0];
    for (std::size_t i = 1; i < c.size(); ++i) a += c[i] / (zm + static_cast<double>(i));
    const double t = zm + g + 0.5;
    // t^(zm+0.5) split in two halves to postpone overflow.
    const double half = std::pow(t, 0.5 * (zm + 0.5));
    return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * a;
}

/// Product-trapezoid rule for the Riemann-Liouville integral
///
///     I^alpha f(t_j) = 1/Gamma(alpha) int_0^{t_j} (t_j - s)^(alpha-1) f(s) ds
///
/// on a uniform grid. The kernel is integrated exactly against the piecewise
/// linear interpolant of the node values, so the rule is exact on linear f
/// and second order for smooth f, including the weakly singular alpha < 1.
class RlQuadrature {
public:
    RlQuadrature(const Grid& grid, double alpha) : grid_(grid), alpha_(alpha) {
        if (!(alpha > 0.0)) throw DomainError("RL integral order must be positive");
        const std::size_t n = grid.intervals();
        const double h = grid.step();
        const double ha = std::pow(h, alpha);
        const double inv_gamma = 1.0 / gamma_fn(alpha);
        left_.resize(n);
        right_.resize(n);
        for (std::size_t m = 0; m < n; ++m) {
            // Cell at distance u in [m h, (m+1) h] from the evaluation node.
            const double a = static_cast<double>(m);
            const double b = a + 1.0;
            const double pb = std::pow(b, alpha), pa = std::pow(a, alpha);
            const double m0 = (pb - pa) / alpha;                           // int u^(alpha-1)
            const double m1 = b * m0 - (pb * b - pa * a) / (alpha + 1.0);  // int u^(alpha-1) (b - u)
            left_[m] = ha * (m0 - m1) * inv_gamma;
            right_[m] = ha * m1 * inv_gamma;
        }
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] double order() const noexcept { return alpha_; }

    /// I^alpha f at node j.
    [[nodiscard]] double at(std::span<const double> f, std::size_t j) const {
        check(f, j);
        double s = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const std::size_t m = j - i - 1;
            s += left_[m] * f[i] + right_[m] * f[i + 1];
        }
        return s;
    }

    /// I^alpha f at every node.
    [[nodiscard]] std::vector<double> all(std::span<const double> f) const {
        std::vector<double> out(grid_.node_count());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = at(f, j);
        return out;
    }

    /// Weights w_i with I^alpha f(t_j) = sum_i w_i f_i; all nonnegative.
    [[nodiscard]] std::vector<double> weights(std::size_t j) const {
        std::vector<double> w(grid_.node_count(), 0.0);
        for (std::size_t i = 0; i < j; ++i) {
            w[i] += left_[j - i - 1];
            w[i + 1] += right_[j - i - 1];
        }
        return w;
    }

private:
    void check(std::span<const double> f, std::size_t j) const {
        if (f.size() != grid_.node_count()) throw ShapeError("node values do not match the quadrature grid");
        if (j >= grid_.node_count()) throw ShapeError("node index outside the grid");
    }

    Grid grid_;
    double alpha_;
    std::vector<double> left_, right_;
};

/// I^beta of the grid function `values` at node t_index.
inline double rl_integral(const Point& values, double beta, std::size_t t_index) {
    const auto& fn = values.grid_fn();
    return RlQuadrature(fn.grid, beta).at(fn.values, t_index);
}

using SourceFn = std::function<double(double t, double x)>;

namespace detail {

struct CaputoState {
    std::vector<double> d2;  // second differences of the smooth remainder
    double singular_coeff;   // C in a t + C t^beta + e t^2
    double square_coeff;     // e
};

// Splits x - x(0) = a t + C t^beta + e t^2 + r(t) through the first three
// nodes; the fitted part carries the t^(beta-2) singularity of x'', and the
// t^2 column keeps plain quadratics out of C. At beta = 2 nothing is fitted.
inline CaputoState caputo_prepare(const GridFn& x, double beta) {
    const std::size_t n = x.grid.intervals();
    if (n < 3) throw ShapeError("Caputo residual needs at least 3 subintervals");
    const double h = x.grid.step();
    const auto& v = x.values;
    double a = 0.0, c = 0.0, e = 0.0;
    if (beta < 2.0) {
        // Unknowns scaled as (a h, C h^beta, e h^2): rows j = 1, 2, 3 of [j, j^beta, j^2].
        std::array<std::array<double, 3>, 3> m{};
        std::array<double, 3> rhs{};
        for (std::size_t r = 0; r < 3; ++r) {
            const double j = static_cast<double>(r + 1);
            m[r] = {j, std::pow(j, beta), j * j};
            rhs[r] = v[r + 1] - v[0];
        }
        auto det = [](const std::array<std::array<double, 3>, 3>& q) {
            return q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) -
                   q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
                   q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
        };
        const double d = det(m);
        std::array<double, 3> sol{};
        for (std::size_t col = 0; col < 3; ++col) {
            auto mc = m;
            for (std::size_t r = 0; r < 3; ++r) mc[r][col] = rhs[r];
            sol[col] = det(mc) / d;
        }
        a = sol[0] / h;
        c = sol[1] / std::pow(h, beta);
        e = sol[2] / (h * h);
    }
    std::vector<double> r(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = x.grid.node(i);
        r[i] = v[i] - v[0] - a * t - c * std::pow(t, beta) - e * t * t;
    }
    std::vector<double> d2(n + 1);
    for (std::size_t i = 1; i < n; ++i) d2[i] = (r[i + 1] - 2.0 * r[i] + r[i - 1]) / (h * h);
    d2[0] = 2.0 * d2[1] - d2[2];
    d2[n] = 2.0 * d2[n - 1] - d2[n - 2];
    return {std::move(d2), c, e};
}

inline double caputo_from_state(const CaputoState& s, const Grid& grid, double beta, std::size_t j,
                                const RlQuadrature* quad) {
    if (beta == 2.0) return s.d2[j];
    const double t = grid.node(j);
    const double fitted = s.singular_coeff * gamma_fn(beta + 1.0) +
                          s.square_coeff * 2.0 * std::pow(t, 2.0 - beta) / gamma_fn(3.0 - beta);
    return (quad ? quad->at(s.d2, j) : RlQuadrature(grid, 2.0 - beta).at(s.d2, j)) + fitted;
}

inline void check_beta(double beta) {
    if (!(beta > 1.0 && beta <= 2.0)) throw DomainError("order beta must lie in (1, 2], got " + format_double(beta));
}

}  // namespace detail

/// Numerical Caputo derivative ^C D^beta x(t_j), 1 < beta <= 2, at an interior node.
inline double caputo_derivative(const Point& x, double beta, std::size_t t_index) {
    detail::check_beta(beta);
    const auto& fn = x.grid_fn();
    if (t_index == 0 || t_index >= fn.grid.intervals())
        throw ShapeError("Caputo derivative is evaluated at interior nodes only");
    const auto st = detail::caputo_prepare(fn, beta);
    return detail::caputo_from_state(st, fn.grid, beta, t_index, nullptr);
}

/// |^C D^beta x(t_j) - f(t_j, x(t_j))| at an interior node.
inline double caputo_residual(const Point& x, double beta, const SourceFn& f, std::size_t t_index) {
    const auto& fn = x.grid_fn();
    return std::abs(caputo_derivative(x, beta, t_index) - f(fn.grid.node(t_index), fn.values[t_index]));
}

/// Max of caputo_residual over all interior nodes.
inline double max_caputo_residual(const Point& x, double beta, const SourceFn& f) {
    detail::check_beta(beta);
    const auto& fn = x.grid_fn();
    const auto st = detail::caputo_prepare(fn, beta);
    std::optional<RlQuadrature> quad;
    if (beta < 2.0) quad.emplace(fn.grid, 2.0 - beta);
    double worst = 0.0;
    for (std::size_t j = 1; j < fn.grid.intervals(); ++j) {
        const double d = detail::caputo_from_state(st, fn.grid, beta, j, quad ? &*quad : nullptr);
        worst = std::max(worst, std::abs(d - f(fn.grid.node(j), fn.values[j])));
    }
    return worst;
}

namespace detail {

inline void check_beta_k(double beta, double k) {
    check_beta(beta);
    if (!(k > 0.0 && k < 1.0)) throw DomainError("boundary parameter k must lie in (0, 1), got " + format_double(k));
}

}  // namespace detail

/// Contraction constant as printed alongside the existence result:
/// 1/G(b+1) + 2/(G(b+1)(2+k^2)) + 2k^(1+b)/(G(b+1)(2+k^2)).
inline double lambda_paper(double beta, double k) {
    detail::check_beta_k(beta, k);
    const double g1 = gamma_fn(beta + 1.0);
    const double q = 2.0 + k * k;
    return 1.0 / g1 + 2.0 / (g1 * q) + 2.0 * std::pow(k, 1.0 + beta) / (g1 * q);
}

/// Contraction constant from integrating the operator's kernels exactly:
/// 1/G(b+1) + 2/((2+k^2)G(b+1)) + 2k^(b+1)/((2+k^2)G(b+2)).
inline double lambda_tight(double beta, double k) {
    detail::check_beta_k(beta, k);
    const double g1 = gamma_fn(beta + 1.0);
    const double g2 = gamma_fn(beta + 2.0);
    const double q = 2.0 + k * k;
    return 1.0 / g1 + 2.0 / (q * g1) + 2.0 * std::pow(k, beta + 1.0) / (q * g2);
}

enum class OperatorVariant { PaperExact, GreenCorrected };

[[nodiscard]] constexpr const char* to_string(OperatorVariant v) noexcept {
    return v == OperatorVariant::PaperExact ? "PaperExact" : "GreenCorrected";
}

/// A boundary-value problem instance on a grid.
struct FbvpProblem {
    double beta = 1.5;
    double k = 0.5;
    double L = 0.0;  // Lipschitz constant of f in x
    SourceFn f;
    std::string f_name = "custom";
    OperatorVariant variant = OperatorVariant::PaperExact;
    Grid grid{256};

    void validate() const {
        detail::check_beta_k(beta, k);
        if (!(L >= 0.0)) throw DomainError("Lipschitz constant L must be nonnegative");
        if (!f) throw DomainError("source term f is not set");
    }
};

/// Largest |f(t,x) - f(t,y)| / |x - y| and smallest f(t,x) over a lattice of
/// (t, x, y) in [0,1] x [x_lo, x_hi]^2.
struct SourceSpotCheck {
    double max_lipschitz_ratio = 0.0;
    double min_value = 0.0;
};

inline SourceSpotCheck spot_check_source(const SourceFn& f, double x_lo = 0.0, double x_hi = 4.0,
                                         std::size_t per_axis = 21) {
    SourceSpotCheck out{0.0, std::numeric_limits<double>::infinity()};
    for (std::size_t it = 0; it < per_axis; ++it) {
        const double t = static_cast<double>(it) / static_cast<double>(per_axis - 1);
        for (std::size_t i = 0; i < per_axis; ++i) {
            const double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(per_axis - 1);
            const double fx = f(t, x);
            out.min_value = std::min(out.min_value, fx);
            for (std::size_t j = 0; j < i; ++j) {
                const double y = x_lo + (x_hi - x_lo) * static_cast<double>(j) / static_cast<double>(per_axis - 1);
                out.max_lipschitz_ratio = std::max(out.max_lipschitz_ratio, std::abs(fx - f(t, y)) / std::abs(x - y));
            }
        }
    }
    return out;
}

/// The integral operator T of a problem, with quadratures built once.
class FbvpOperator {
public:
    explicit FbvpOperator(FbvpProblem problem)
        : problem_(std::move(problem)),
          ib_((problem_.validate(), problem_.grid), problem_.beta),
          ib1_(problem_.grid, problem_.beta + 1.0) {
        const double n = static_cast<double>(problem_.grid.intervals());
        k_index_ = static_cast<std::size_t>(std::lround(problem_.k * n));
        k_index_ = std::clamp<std::size_t>(k_index_, 1, problem_.grid.intervals() - 1);
        k_snapped_ = problem_.grid.node(k_index_);
    }

    [[nodiscard]] const FbvpProblem& problem() const noexcept { return problem_; }
    [[nodiscard]] double k_snapped() const noexcept { return k_snapped_; }
    [[nodiscard]] double k_snap_distance() const noexcept { return std::abs(k_snapped_ - problem_.k); }
    [[nodiscard]] std::size_t k_index() const noexcept { return k_index_; }

    /// g_i = f(t_i, x_i).
    [[nodiscard]] std::vector<double> source_values(const Point& x) const {
        const auto& fn = checked(x);
        std::vector<double> g(fn.values.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = problem_.f(problem_.grid.node(i), fn.values[i]);
        return g;
    }

    [[nodiscard]] Point apply(const Point& x) const {
        const auto g = source_values(x);
        auto out = ib_.all(g);
        const double sign = problem_.variant == OperatorVariant::PaperExact ? 1.0 : -1.0;
        const double kk = k_snapped_;
        // int_0^k I^beta g(s) ds = I^(beta+1) g(k).
        const double bracket = out.back() + ib1_.at(g, k_index_);
        const double coeff = sign * 2.0 / (2.0 + kk * kk) * bracket;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += coeff * problem_.grid.node(j);
        return Point::on_grid(problem_.grid, std::move(out));
    }

    [[nodiscard]] Point operator()(const Point& x) const { return apply(x); }

    [[nodiscard]] SelfMap as_self_map() const {
        auto self = std::make_shared<FbvpOperator>(*this);
        return {"T[" + problem_.f_name + ", " + to_string(problem_.variant) + "]",
                [self](const Point& x) { return self->apply(x); }};
    }

    /// |x(1) + int_0^k x(s) ds|, the integral by the trapezoid rule up to the snapped k.
    [[nodiscard]] double boundary_residual(const Point& x) const {
        const auto& v = checked(x).values;
        const double h = problem_.grid.step();
        double integral = 0.0;
        for (std::size_t i = 0; i < k_index_; ++i) integral += 0.5 * h * (v[i] + v[i + 1]);
        return std::abs(v.back() + integral);
    }

private:
    const GridFn& checked(const Point& x) const {
        const auto& fn = x.grid_fn();
        if (!(fn.grid == problem_.grid)) throw ShapeError("grid function is not on the problem grid");
        return fn;
    }

    FbvpProblem problem_;
    RlQuadrature ib_;
    RlQuadrature ib1_;
    std::size_t k_index_ = 0;
    double k_snapped_ = 0.0;
};

inline Point apply_operator(const FbvpProblem& problem, const Point& x) {
    return FbvpOperator(problem).apply(x);
}

/// Relation x(t) y(t) >= 0 at every node.
inline Relation same_sign_relation() {
    return {"x(t)y(t)>=0",
            [](const Point& x, const Point& y) {
                const auto a = x.values();
                const auto b = y.values();
                if (a.size() != b.size()) throw ShapeError("points of different size");
                for (std::size_t i = 0; i < a.size(); ++i)
                    if (a[i] * b[i] < 0.0) return false;
                return true;
            },
            "pointwise same sign on the grid"};
}

struct FbvpSolution {
    Point x;
    std::size_t iterations = 0;
    StopReason stop_reason = StopReason::MaxIter;
    double fixed_point_residual = 0.0;  // sup |x - Tx|
    double boundary_residual = 0.0;     // |x(1) + int_0^k x|
    double caputo_residual = 0.0;       // max over interior nodes
    double lambda_paper = 0.0;
    double lambda_tight = 0.0;
    double contraction_factor = 0.0;    // L * lambda_tight
    bool contraction_warning = false;   // contraction_factor >= 1
    double max_gap_ratio = 0.0;         // max d_gap[n] / d_gap[n-1]
    double k_snapped = 0.0;
    double k_snap_distance = 0.0;
    OrbitTrace orbit{};
};

struct SolveOptions {
    double tol = 1e-8;
    std::size_t max_iter = 10'000;
};

/// Picard solution of the problem from x0 >= 0 on the problem grid.
///
/// The metric and w-distance are both the sup norm over nodes. If
/// L * lambda_tight >= 1 the warning flag is set and the iteration is still
/// attempted without a bound sequence. Divergence propagates as DivergenceError.
inline FbvpSolution solve_fbvp(const FbvpProblem& problem, const Point& x0, const SolveOptions& opts = {}) {
    FbvpOperator op(problem);
    for (double v : x0.grid_fn().values)
        if (v < 0.0) throw PreconditionError("starting function must be nonnegative");

    const MetricSpace space(FunctionSpace{problem.grid});
    const auto p = metric_w_distance(space);
    FbvpSolution sol{x0};
    sol.lambda_paper = lambda_paper(problem.beta, problem.k);
    sol.lambda_tight = lambda_tight(problem.beta, problem.k);
    sol.contraction_factor = problem.L * sol.lambda_tight;
    sol.contraction_warning = !(sol.contraction_factor < 1.0);
    sol.k_snapped = op.k_snapped();
    sol.k_snap_distance = op.k_snap_distance();

    std::optional<double> lambda;
    if (!sol.contraction_warning) lambda = sol.contraction_factor;
    sol.orbit = iterate(op.as_self_map(), x0, space, p, lambda, {opts.max_iter, opts.tol, 1e8});
    sol.x = sol.orbit.last();
    sol.iterations = sol.orbit.steps();
    sol.stop_reason = sol.orbit.stop_reason;
    for (std::size_t n = 1; n < sol.orbit.d_gaps.size(); ++n)
        if (sol.orbit.d_gaps[n - 1] > 0.0)
            sol.max_gap_ratio = std::max(sol.max_gap_ratio, sol.orbit.d_gaps[n] / sol.orbit.d_gaps[n - 1]);
    sol.fixed_point_residual = metric_eval(space, sol.x, op.apply(sol.x));
    sol.boundary_residual = op.boundary_residual(sol.x);
    sol.caputo_residual = max_caputo_residual(sol.x, problem.beta, problem.f);
    return sol;
}

/// CSV "t,x" with one row per node.
inline void write_solution_csv(std::ostream& os, const Point& x) {
    const auto& fn = x.grid_fn();
    os << "t,x\n";
    for (std::size_t i = 0; i < fn.values.size(); ++i)
        os << format_double(fn.grid.node(i)) << ',' << format_double(fn.values[i]) << '\n';
}

/// Named source terms f(t, x) = scale * g(t, x) + shift with their Lipschitz
/// constants in x.
struct SourceTerm {
    std::string name;
    SourceFn f;
    double lipschitz;
};

inline std::vector<std::string> builtin_source_names() { return {"constant", "sin_sq", "linear"}; }

/// constant: g = 1; sin_sq: g = 1 + t + sin^2 x; linear: g = 1 + x.
inline SourceTerm make_source(const std::string& name, double scale = 1.0, double shift = 0.0) {
    if (!(scale >= 0.0) || !(shift >= 0.0))
        throw DomainError("source scale and shift must be nonnegative so that f >= 0");
    if (name == "constant")
        return {name, [=](double, double) { return scale + shift; }, 0.0};
    if (name == "sin_sq")
        return {name, [=](double t, double x) { const double s = std::sin(x); return scale * (1.0 + t + s * s) + shift; },
                scale};
    if (name == "linear")
        return {name, [=](double, double x) { return scale * (1.0 + x) + shift; }, scale};
    throw DomainError("unknown source term '" + name + "'");
}

}  // namespace relfix
