#pragma once

// Batch front end behind the relfix CLI: example verification batteries,
// boundary-value solves from config files, and report readback.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "relfix/errors.hpp"
#include "relfix/fixed_point.hpp"
#include "relfix/fixtures.hpp"
#include "relfix/format.hpp"
#include "relfix/fractional.hpp"
#include "relfix/hypothesis.hpp"
#include "relfix/relation.hpp"
#include "relfix/space.hpp"
#include "relfix/w_distance.hpp"

namespace relfix::cli {

using Json = nlohmann::ordered_json;
using fixtures::ExampleId;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCheckFailed = 3;

enum class Command { VerifyExample, SolveFbvp, Report };

/// Boundary-value problem as read from a flat key = value config file.
struct FbvpConfig {
    double beta = 1.5;
    double k = 0.5;
    std::optional<double> L;  // defaults to the Lipschitz constant of the source
    std::string f = "sin_sq";
    double f_scale = 0.2;
    double f_shift = 0.0;
    OperatorVariant variant = OperatorVariant::PaperExact;
    std::size_t n = 256;
    double tol = 1e-8;
    std::size_t max_iter = 10'000;
    double x0 = 0.0;  // constant starting function
    std::uint64_t seed = 0;
    std::size_t probe_count = 4;  // random functions offered to the uniqueness probe
};

struct RunConfig {
    Command command = Command::VerifyExample;
    std::optional<ExampleId> example;
    std::optional<FbvpConfig> problem;
    std::filesystem::path output_dir = ".";
    std::filesystem::path input_dir;
    std::optional<double> step;
    std::uint64_t seed = 0;

    void validate() const {
        if ((command == Command::VerifyExample) != example.has_value())
            throw ConfigError("example_id: required for verify-example and only there");
        if (command == Command::SolveFbvp && !problem) throw ConfigError("config: solve-fbvp needs a problem");
        if (command == Command::Report && input_dir.empty()) throw ConfigError("in: report needs an input directory");
        if (step && !(*step > 0.0)) throw ConfigError("step: must be positive");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a real number, got '" + v + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
        const auto u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
    }
}

}  // namespace detail

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed values raise ConfigError naming the field.
inline FbvpConfig parse_fbvp_config(std::istream& in) {
    FbvpConfig c;
    std::string line;
    std::size_t lineno = 0;
    std::map<std::string, std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (!seen.emplace(key, val).second) throw ConfigError(key + ": given more than once");

        if (key == "beta") c.beta = detail::parse_double(key, val);
        else if (key == "k") c.k = detail::parse_double(key, val);
        else if (key == "L") c.L = detail::parse_double(key, val);
        else if (key == "f") c.f = val;
        else if (key == "f_scale") c.f_scale = detail::parse_double(key, val);
        else if (key == "f_shift") c.f_shift = detail::parse_double(key, val);
        else if (key == "variant") {
            if (val == "paper_exact") c.variant = OperatorVariant::PaperExact;
            else if (val == "green_corrected") c.variant = OperatorVariant::GreenCorrected;
            else throw ConfigError("variant: expected paper_exact or green_corrected, got '" + val + "'");
        } else if (key == "n") c.n = detail::parse_uint(key, val);
        else if (key == "tol") c.tol = detail::parse_double(key, val);
        else if (key == "max_iter") c.max_iter = detail::parse_uint(key, val);
        else if (key == "x0") c.x0 = detail::parse_double(key, val);
        else if (key == "seed") c.seed = detail::parse_uint(key, val);
        else if (key == "probe_count") c.probe_count = detail::parse_uint(key, val);
        else throw ConfigError(key + ": unknown field");
    }

    if (!(c.beta > 1.0 && c.beta <= 2.0)) throw ConfigError("beta: must lie in (1, 2]");
    if (!(c.k > 0.0 && c.k < 1.0)) throw ConfigError("k: must lie in (0, 1)");
    if (c.L && !(*c.L >= 0.0)) throw ConfigError("L: must be nonnegative");
    if (c.n < 4) throw ConfigError("n: need at least 4 subintervals");
    if (!(c.tol > 0.0)) throw ConfigError("tol: must be positive");
    if (c.max_iter < 1) throw ConfigError("max_iter: must be at least 1");
    if (!(c.x0 >= 0.0)) throw ConfigError("x0: starting function must be nonnegative");
    try {
        (void)make_source(c.f, c.f_scale, c.f_shift);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("f: ") + e.what());
    }
    return c;
}

inline FbvpConfig parse_fbvp_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    return parse_fbvp_config(in);
}

inline FbvpProblem to_problem(const FbvpConfig& c) {
    const auto src = make_source(c.f, c.f_scale, c.f_shift);
    FbvpProblem p;
    p.beta = c.beta;
    p.k = c.k;
    p.L = c.L.value_or(src.lipschitz);
    p.f = src.f;
    p.f_name = src.name;
    p.variant = c.variant;
    p.grid = Grid(c.n);
    return p;
}

/// Accumulates asserted checks and advisory findings into one record.
/// Advisories never affect the status.
class ReportBuilder {
public:
    void check(const std::string& name, bool pass, Json values = Json::object(), const std::string& detail = {}) {
        Json c;
        c["name"] = name;
        c["pass"] = pass;
        if (!detail.empty()) c["detail"] = detail;
        if (!values.empty()) c["values"] = std::move(values);
        checks_.push_back(std::move(c));
        all_pass_ = all_pass_ && pass;
    }

    void advisory(const std::string& name, const std::string& detail, Json values = Json::object()) {
        Json a;
        a["name"] = name;
        a["detail"] = detail;
        if (!values.empty()) a["values"] = std::move(values);
        advisories_.push_back(std::move(a));
    }

    [[nodiscard]] bool all_pass() const noexcept { return all_pass_; }

    [[nodiscard]] Json finish(Json header) const {
        header["checks"] = checks_;
        header["advisories"] = advisories_;
        std::size_t passed = 0;
        for (const auto& c : checks_) passed += c["pass"].get<bool>() ? 1 : 0;
        header["summary"] = {{"asserted", checks_.size()},
                             {"passed", passed},
                             {"status", all_pass_ ? "pass" : "fail"}};
        return header;
    }

private:
    Json checks_ = Json::array();
    Json advisories_ = Json::array();
    bool all_pass_ = true;
};

struct RunOutput {
    int status = kExitOk;
    Json report;
    std::optional<OrbitTrace> orbit;
    std::optional<Point> solution;
};

inline Json to_json(const Point& x) {
    if (x.is_scalar()) return x.scalar();
    return Json{{"grid_n", x.grid_fn().grid.intervals()}, {"sup_norm", x.sup_norm()}};
}

inline Json to_json(const PointPair& pp) { return Json::array({to_json(pp.first), to_json(pp.second)}); }

inline Json to_json(const RelationReport& r) {
    Json j{{"property", to_string(r.property)}, {"verdict", to_string(r.verdict)}, {"sample_size", r.sample_size}};
    Json w = Json::array();
    for (std::size_t i = 0; i < r.witnesses.size() && i < kMaxStoredWitnesses; ++i) w.push_back(to_json(r.witnesses[i]));
    j["witness_count"] = r.witnesses.size();
    j["witnesses"] = std::move(w);
    return j;
}

inline Json to_json(const AxiomReport& r) {
    Json j{{"axiom", to_string(r.axiom)}, {"verdict", to_string(r.verdict)}, {"violations", r.violations}};
    if (r.axiom == Axiom::W2RLsc) {
        j["tail_min"] = r.tail_min;
        j["limit_value"] = r.limit_value;
    }
    if (r.axiom == Axiom::W3Separation) {
        Json t = Json::array();
        for (const auto& row : r.w3_table) t.push_back({{"eps", row.eps}, {"delta", row.delta ? Json(*row.delta) : Json()}});
        j["table"] = std::move(t);
    }
    Json w = Json::array();
    for (const auto& tri : r.witnesses) {
        Json a = Json::array();
        for (const auto& p : tri) a.push_back(to_json(p));
        w.push_back(std::move(a));
    }
    j["witnesses"] = std::move(w);
    return j;
}

inline Json to_json(const ContractionEstimate& e) {
    return {{"lambda_hat", e.lambda_hat},
            {"witness_pair", e.witness_pair ? to_json(*e.witness_pair) : Json()},
            {"pairs_checked", e.pairs_checked},
            {"zero_p_pairs", e.zero_p_pairs},
            {"zero_p_violations", e.zero_p_violations.size()},
            {"include_diagonal", e.include_diagonal},
            {"lambda_hat_with_diagonal", e.lambda_hat_with_diagonal}};
}

inline Json to_json(const ClassicalRow& r) {
    return {{"x", to_json(r.x)},       {"y", to_json(r.y)},
            {"d_TxTy", r.d_txty},      {"d_xy", r.d_xy},
            {"M_T", r.m_t},            {"banach_fails", r.banach_fails},
            {"mt_contraction_fails", r.mt_fails}};
}

inline Json to_json(const HypothesisItem& h) { return {{"pass", h.pass}, {"detail", h.detail}}; }

inline Json to_json(const TheoremReport& t) {
    Json j{{"r_complete_proxy", to_json(t.r_complete_proxy)},
           {"start_points", to_json(t.start_points)},
           {"t_closed", to_json(t.t_closed)},
           {"continuity_or_self_closed", to_json(t.continuity_or_self_closed)},
           {"contraction", to_json(t.contraction)},
           {"overall", to_string(t.overall)}};
    if (t.estimate) j["estimate"] = to_json(*t.estimate);
    return j;
}

inline Json to_json(const OrbitTrace& o) {
    return {{"steps", o.steps()},
            {"stop_reason", to_string(o.stop_reason)},
            {"lambda_used", o.lambda_used ? Json(*o.lambda_used) : Json()},
            {"last", to_json(o.last())},
            {"final_d_gap", o.d_gaps.empty() ? Json() : Json(o.d_gaps.back())}};
}

namespace detail {

inline bool has_pair(const RelationReport& r, double a, double b) {
    for (const auto& w : r.witnesses)
        if (w.first.scalar() == a && w.second.scalar() == b) return true;
    return false;
}

inline bool contains_point(std::span<const Point> xs, double v) {
    for (const auto& x : xs)
        if (x.scalar() == v) return true;
    return false;
}

inline std::vector<Point> scalars(std::initializer_list<double> vs) { return {vs.begin(), vs.end()}; }

inline Json header(ExampleId id, const SampleSpec& spec, const MetricSpace& space) {
    return {{"command", "verify-example"},
            {"example", fixtures::to_string(id)},
            {"space", space.describe()},
            {"sample", spec.describe()}};
}

// Every image that leaves the declared space.
inline std::size_t images_outside(const SelfMap& map, const MetricSpace& space, std::span<const Point> sample) {
    std::size_t out = 0;
    for (const auto& x : sample) out += space.contains(map(x)) ? 0 : 1;
    return out;
}

inline RunOutput verify_ex1_7(const SampleSpec& spec) {
    using namespace fixtures;
    const auto space = naturals_space();
    const auto rel = even_odd_relation();
    const auto f = successor_map();
    const auto sample = sample_space(space, spec);
    ReportBuilder rb;

    const auto closed = check_t_closed(rel, f, sample);
    rb.check("t_closed_fails_with_witness", !closed.holds() && has_pair(closed, 2, 3),
             {{"report", to_json(closed)}}, "(2,3) in R but (3,4) is not");
    const auto weak = check_weak_t_closed(rel, f, sample);
    rb.check("weak_t_closed_holds", weak.holds(), {{"report", to_json(weak)}});
    const auto small = scalars({1, 2, 3, 4});
    const auto complete = check_complete_on(rel, small);
    rb.check("not_complete_on_1_to_4", !complete.holds() && has_pair(complete, 2, 4), {{"report", to_json(complete)}});
    const auto starts = find_start_points(rel, f, sample);
    rb.check("start_points_nonempty", !starts.empty() && contains_point(starts, 2),
             {{"count", starts.size()}});

    VerifyOptions vo;
    vo.iterate.max_iter = 50;
    const auto thm = verify_theorem(f, space, rel, metric_w_distance(space), sample, Point(2.0), vo);
    rb.check("theorem_incomplete_without_contraction",
             thm.overall == Overall::Incomplete && !thm.contraction.pass, {{"theorem", to_json(thm)}});
    rb.advisory("not_a_self_map_on_sample",
                std::to_string(images_outside(f, space, sample)) + " sampled images leave the finite window");

    RunOutput out;
    out.report = rb.finish(header(ExampleId::Ex1_7, spec, space));
    out.status = rb.all_pass() ? kExitOk : kExitCheckFailed;
    if (thm.orbit) out.orbit = thm.orbit;
    return out;
}

inline RunOutput verify_ex1_13(const SampleSpec& spec) {
    using namespace fixtures;
    const auto space = real_line_window();
    const auto rel = near_integer_relation();
    const auto f = ceiling_function();
    const auto map = ceiling_map();
    ReportBuilder rb;
    const Point anchor = 0.0;

    for (const auto& [name, seq] : {std::pair{"left", ceiling_left_sequence()}, std::pair{"right", ceiling_right_sequence()}}) {
        RlscOptions o;
        o.tail.convergence_tol = seq.convergence_tol;
        const auto r = check_rlsc(f, anchor, rel, seq.points, seq.limit, space, o);
        rb.check(std::string("r_lsc_holds_") + name, r.holds(), {{"report", to_json(r)}});
    }
    const auto right = ceiling_right_sequence();
    TailOptions t;
    t.convergence_tol = right.convergence_tol;
    const bool cont = is_r_continuous_along(map, rel, right.points, right.limit, space, t);
    rb.check("not_r_continuous_from_right", !cont, {}, "ceil(x_n) = 2 while ceil(1) = 1");

    RunOutput out;
    out.report = rb.finish(header(ExampleId::Ex1_13, spec, space));
    out.status = rb.all_pass() ? kExitOk : kExitCheckFailed;
    return out;
}

inline RunOutput verify_ex1_14(const SampleSpec& spec) {
    using namespace fixtures;
    const auto space = half_line_window();
    const auto rel = product_relation();
    const auto f = piecewise_function();
    ReportBuilder rb;
    const Point anchor = 0.0;

    const auto below = below_one_sequence();
    RlscOptions o;
    o.tail.convergence_tol = below.convergence_tol;
    const auto r = check_rlsc(f, anchor, rel, below.points, below.limit, space, o);
    rb.check("r_lsc_holds_below_one", r.holds(), {{"report", to_json(r)}});

    const auto above = above_one_sequence();
    rb.check("right_approach_not_preserving", !is_preserving(rel, above.points));
    RlscOptions o2;
    o2.tail.convergence_tol = above.convergence_tol;
    const auto lsc = check_rlsc(f, anchor, universal_relation(), above.points, above.limit, space, o2);
    rb.check("plain_lsc_fails_from_right", !lsc.holds() && lsc.tail_min == 0.5 && lsc.limit_value == 1.0,
             {{"report", to_json(lsc)}});

    const std::vector<Point> constant(8, Point(1.0));
    const auto c = check_rlsc(f, anchor, rel, constant, Point(1.0), space);
    rb.check("constant_sequence_equality", c.holds() && c.tail_min == c.limit_value, {{"report", to_json(c)}});

    RunOutput out;
    out.report = rb.finish(header(ExampleId::Ex1_14, spec, space));
    out.status = rb.all_pass() ? kExitOk : kExitCheckFailed;
    return out;
}

inline RunOutput verify_ex2_3(const SampleSpec& spec) {
    using namespace fixtures;
    const auto space = ex23_space();
    const auto rel = geq_relation();
    const auto T = ex23_map();
    const auto p = abs_sum_w_distance();
    const auto sample = sample_space(space, spec);
    ReportBuilder rb;

    const auto starts = find_start_points(rel, T, sample);
    rb.check("start_points_nonempty", !starts.empty(), {{"count", starts.size()}});
    rb.check("t_closed", check_t_closed(rel, T, sample).holds());
    rb.check("relation_complete", check_complete_on(rel, sample).holds());

    const auto dec = ex23_decreasing_sequence();
    TailOptions tail;
    tail.convergence_tol = dec.convergence_tol;
    const auto sc = witness_d_self_closed(rel, dec.points, dec.limit, space, tail);
    rb.check("d_self_closed_on_decreasing_sequence", sc.holds && sc.related.size() == dec.points.size(),
             {{"related", sc.related.size()}, {"length", dec.points.size()}});

    const auto tri = check_triangle(p, sample);
    rb.check("w1_triangle", tri.holds(), {{"report", to_json(tri)}});
    const std::vector<double> eps{0.5, 0.1, 0.01};
    const auto ladder = geometric_ladder();
    const auto w3 = check_w3(p, space, sample, eps, ladder);
    rb.check("w3_separation", w3.holds(), {{"report", to_json(w3)}});

    // Separation from the classical contractions at the pair (2, 1).
    const PointPair pair{Point(2.0), Point(1.0)};
    const auto row = classical_row(T, space, pair.first, pair.second);
    rb.check("banach_fails_at_2_1", row.banach_fails && row.d_txty == 1.5 && row.d_xy == 1.0, {{"row", to_json(row)}});
    rb.check("mt_contraction_fails_at_2_1", row.mt_fails && row.m_t == 1.25, {{"M_T", row.m_t}});
    const std::vector<PointPair> one{pair};
    const auto at21 = estimate_lambda(T, p, rel, one);
    rb.check("w_ratio_at_2_1", std::abs(at21.lambda_hat - 5.0 / 6.0) <= 1e-12, {{"ratio", at21.lambda_hat}});

    const auto pairs = build_related_pairs(rel, sample);
    const auto cmp = compare_classical(T, space, rel, pairs);
    rb.check("banach_failures_on_sample", cmp.banach_failures > 0,
             {{"banach_failures", cmp.banach_failures}, {"mt_failures", cmp.mt_failures}, {"pairs", pairs.size()}});

    const auto thm = verify_theorem(T, space, rel, p, sample, Point(2.0));
    rb.check("theorem_hypotheses", thm.overall == Overall::AllVerifiedOnSample, {{"theorem", to_json(thm)}});
    if (thm.estimate)
        rb.advisory("lambda_supremum_near_diagonal",
                    "related pairs approaching (2,2) push p(Tx,Ty)/p(x,y) towards 1; the sampled supremum is reported, "
                    "not a single constant for all of X",
                    {{"lambda_hat", thm.estimate->lambda_hat},
                     {"witness_pair", thm.estimate->witness_pair ? to_json(*thm.estimate->witness_pair) : Json()},
                     {"lambda_hat_with_diagonal", thm.estimate->lambda_hat_with_diagonal}});
    rb.advisory("not_a_self_map_on_sample",
                std::to_string(images_outside(T, space, sample)) + " sampled images (x/2 for x in [1,2)) leave [1,3)");

    RunOutput out;
    if (const auto lam = thm.lambda_hat()) {
        const auto orbit = iterate(T, Point(2.0), space, p, *lam);
        rb.check("orbit_fixed_point_2",
                 orbit.stop_reason == StopReason::Converged && orbit.steps() == 1 && orbit.last() == Point(2.0),
                 {{"orbit", to_json(orbit)}});
        const auto cert = certify_fixed_point(T, orbit.last(), space, p, 1e-9);
        rb.check("fixed_point_certificate", cert.has_value(),
                 cert ? Json{{"residual", cert->residual}, {"p_self", cert->p_self}} : Json::object());
        rb.check("cauchy_bound", certify_cauchy(orbit, p).holds);
        const std::vector<Point> cands{orbit.last()};
        const auto probe = probe_uniqueness(rel, T, p, space, *lam, cands, sample);
        rb.check("uniqueness_condition2", probe.verdict == Uniqueness::UniqueByCondition2,
                 {{"verdict", to_string(probe.verdict)}}, probe.detail);
        out.orbit = orbit;
    } else {
        rb.check("contraction_constant_available", false);
    }

    out.report = rb.finish(header(ExampleId::Ex2_3, spec, space));
    out.status = rb.all_pass() ? kExitOk : kExitCheckFailed;
    return out;
}

inline RunOutput verify_ex2_4(const SampleSpec& spec) {
    using namespace fixtures;
    const auto space = ex24_space();
    const auto rel = product_relation();
    const auto T = ex24_map();
    const auto p = second_argument_w_distance();
    const auto sample = sample_space(space, spec);
    ReportBuilder rb;

    const auto tri = check_triangle(p, sample);
    rb.check("w1_triangle", tri.holds(), {{"report", to_json(tri)}});
    const std::vector<double> eps{0.5, 0.1, 0.01};
    const auto w3 = check_w3(p, space, sample, eps, geometric_ladder());
    rb.check("w3_separation", w3.holds(), {{"report", to_json(w3)}});
    rb.check("t_closed", check_t_closed(rel, T, sample).holds());
    const auto starts = find_start_points(rel, T, sample);
    rb.check("start_points_nonempty", !starts.empty(), {{"count", starts.size()}});

    const auto pairs = build_related_pairs(rel, sample);
    const auto est = estimate_lambda(T, p, rel, pairs);
    rb.check("lambda_hat_is_three_quarters", std::abs(est.lambda_hat - 0.75) <= 1e-12 && est.zero_p_violations.empty(),
             {{"estimate", to_json(est)}});

    const auto row = classical_row(T, space, Point(1.0), Point(0.75));
    rb.check("mt_contraction_fails_at_1_3/4", row.mt_fails && row.d_txty == 0.5 && row.m_t == 0.5,
             {{"row", to_json(row)}});

    const double lam = est.lambda_hat;
    const auto orbit = iterate(T, Point(2.0), space, p, lam);
    const bool conv = orbit.stop_reason == StopReason::Converged && orbit.steps() <= 60;
    const auto cert = certify_fixed_point(T, orbit.last(), space, p, 1e-9);
    rb.check("orbit_from_2_converges_to_0", conv && cert && std::abs(orbit.last().scalar()) <= 1e-9,
             {{"orbit", to_json(orbit)}, {"residual", cert ? Json(cert->residual) : Json()}});
    const auto cauchy = certify_cauchy(orbit, p);
    rb.check("cauchy_bound", cauchy.holds, {{"pairs", cauchy.pairs_checked}, {"violations", cauchy.violations.size()}});
    rb.check("gap_chaining", gap_chaining_violations(orbit, lam).empty());
    rb.advisory("seed_outside_start_set",
                "x0 = 2 has (2, T2) = (2, 1.5) outside R; the orbit is R-preserving only from x1 = 1.5 on",
                {{"orbit_preserving", is_preserving(rel, orbit.points)}});

    // Long orbit so that the bound sequence itself vanishes.
    IterateOptions longrun;
    longrun.tol = 1e-300;
    longrun.max_iter = 80;
    const auto tail = iterate(T, Point(2.0), space, p, lam, longrun);
    const bool unique_limit = certify_limit_uniqueness(p, tail.points, Point(0.0), Point(0.0), tail.bound, tail.bound, space);
    rb.check("limit_uniqueness", unique_limit, {{"u_N", tail.bound.back()}});

    const auto thm = verify_theorem(T, space, rel, p, sample, Point(1.0));
    rb.check("theorem_hypotheses", thm.overall == Overall::AllVerifiedOnSample, {{"theorem", to_json(thm)}});

    const std::vector<Point> cands{Point(0.0)};
    const auto probe = probe_uniqueness(rel, T, p, space, lam, cands, sample);
    rb.check("uniqueness_condition1_z0",
             probe.verdict == Uniqueness::UniqueByCondition1 && probe.z && *probe.z == Point(0.0),
             {{"verdict", to_string(probe.verdict)}, {"z", probe.z ? to_json(*probe.z) : Json()}}, probe.detail);

    RunOutput out;
    out.orbit = orbit;
    out.report = rb.finish(header(ExampleId::Ex2_4, spec, space));
    out.status = rb.all_pass() ? kExitOk : kExitCheckFailed;
    return out;
}

}  // namespace detail

inline SampleSpec default_sample(ExampleId id) {
    SampleSpec s;
    switch (id) {
        case ExampleId::Ex1_7: s.step = 1.0; break;
        case ExampleId::Ex2_4: s.step = 0.01; break;
        default: s.step = 0.1; break;
    }
    return s;
}

/// Full check battery of one worked example.
inline RunOutput verify_example(ExampleId id, std::optional<double> step = std::nullopt, std::uint64_t seed = 0) {
    auto spec = default_sample(id);
    if (step) spec.step = *step;
    spec.seed = seed;
    switch (id) {
        case ExampleId::Ex1_7: return detail::verify_ex1_7(spec);
        case ExampleId::Ex1_13: return detail::verify_ex1_13(spec);
        case ExampleId::Ex1_14: return detail::verify_ex1_14(spec);
        case ExampleId::Ex2_3: return detail::verify_ex2_3(spec);
        case ExampleId::Ex2_4: return detail::verify_ex2_4(spec);
    }
    throw ConfigError("example_id: unknown");
}

inline Json to_json(const FbvpConfig& c, const FbvpProblem& p) {
    return {{"beta", c.beta},   {"k", c.k},         {"L", p.L},           {"f", c.f},
            {"f_scale", c.f_scale}, {"f_shift", c.f_shift}, {"variant", to_string(c.variant)},
            {"n", c.n},         {"tol", c.tol},     {"max_iter", c.max_iter}, {"x0", c.x0},
            {"seed", c.seed},   {"probe_count", c.probe_count}};
}

/// Solves the configured problem and checks the result.
inline RunOutput solve_fbvp_run(const FbvpConfig& cfg) {
    const auto problem = to_problem(cfg);
    ReportBuilder rb;
    RunOutput out;
    Json head{{"command", "solve-fbvp"}, {"problem", to_json(cfg, problem)}};

    const auto spot = spot_check_source(problem.f);
    rb.check("source_nonnegative", spot.min_value >= 0.0, {{"min_value", spot.min_value}});
    rb.check("source_lipschitz_within_L", spot.max_lipschitz_ratio <= problem.L * (1.0 + 1e-12) + 1e-15,
             {{"max_ratio", spot.max_lipschitz_ratio}, {"L", problem.L}});

    const auto x0 = Point::constant(problem.grid, cfg.x0);
    try {
        const auto sol = solve_fbvp(problem, x0, {cfg.tol, cfg.max_iter});
        Json s{{"iterations", sol.iterations},
               {"stop_reason", to_string(sol.stop_reason)},
               {"fixed_point_residual", sol.fixed_point_residual},
               {"boundary_residual", sol.boundary_residual},
               {"caputo_residual", sol.caputo_residual},
               {"lambda_paper", sol.lambda_paper},
               {"lambda_tight", sol.lambda_tight},
               {"contraction_factor", sol.contraction_factor},
               {"max_gap_ratio", sol.max_gap_ratio},
               {"k_snapped", sol.k_snapped},
               {"k_snap_distance", sol.k_snap_distance},
               {"x_at_1", sol.x.grid_fn().values.back()},
               {"sup_norm", sol.x.sup_norm()}};
        head["solution"] = s;

        if (sol.contraction_warning)
            rb.advisory("contraction_condition",
                        "L * lambda_tight >= 1: the contraction hypothesis fails, convergence is not guaranteed",
                        {{"contraction_factor", sol.contraction_factor}});
        rb.advisory("printed_lambda", "contraction constant as printed, for comparison only",
                    {{"lambda_paper", sol.lambda_paper}, {"L_lambda_paper", problem.L * sol.lambda_paper}});
        rb.check("converged", sol.stop_reason == StopReason::Converged, {{"iterations", sol.iterations}});
        rb.check("fixed_point_residual", sol.fixed_point_residual <= cfg.tol,
                 {{"residual", sol.fixed_point_residual}, {"tol", cfg.tol}});
        rb.check("x_at_0_is_zero", sol.x.grid_fn().values.front() == 0.0);
        if (!sol.contraction_warning)
            rb.check("gap_ratio_within_contraction", sol.max_gap_ratio <= sol.contraction_factor + 0.02,
                     {{"max_gap_ratio", sol.max_gap_ratio}, {"bound", sol.contraction_factor + 0.02}});
        if (problem.variant == OperatorVariant::GreenCorrected) {
            const double h = problem.grid.step();
            rb.check("boundary_condition", sol.boundary_residual <= h,
                     {{"boundary_residual", sol.boundary_residual}, {"tol", h}});
        } else {
            rb.advisory("boundary_condition_not_asserted",
                        "the printed operator adds the boundary terms, so x(1) = -int_0^k x cannot hold for f > 0",
                        {{"boundary_residual", sol.boundary_residual}});
        }

        if (!sol.contraction_warning && sol.stop_reason == StopReason::Converged) {
            const MetricSpace space(FunctionSpace{problem.grid});
            SampleSpec ss;
            ss.count = std::max<std::size_t>(cfg.probe_count, 1);
            ss.seed = cfg.seed;
            auto probe_sample = sample_space(space, ss);
            // Zero function first: it is the witness the existence argument uses.
            std::rotate(probe_sample.rbegin(), probe_sample.rbegin() + 1, probe_sample.rend());
            const FbvpOperator op(problem);
            ProbeOptions po;
            po.residual_tol = std::max(cfg.tol, sol.fixed_point_residual);
            po.limit.vanish_tol = 10.0 * cfg.tol;
            const std::vector<Point> cands{sol.x};
            const auto probe = probe_uniqueness(same_sign_relation(), op.as_self_map(), metric_w_distance(space),
                                                space, sol.contraction_factor, cands,
                                                std::span<const Point>(probe_sample).first(1), po);
            rb.check("uniqueness_condition1", probe.verdict == Uniqueness::UniqueByCondition1,
                     {{"verdict", to_string(probe.verdict)}}, probe.detail);
        }
        out.orbit = sol.orbit;
        out.solution = sol.x;
    } catch (const DivergenceError& e) {
        rb.check("converged", false, {{"steps", e.trace().steps()}}, e.what());
        out.orbit = e.trace();
    }
    out.report = rb.finish(std::move(head));
    out.status = rb.all_pass() ? kExitOk : kExitCheckFailed;
    return out;
}

/// Human-readable summary of a report; returns the status the report implies.
inline int summarize_report(const Json& report, std::ostream& os) {
    bool all = true;
    os << report.value("command", "?");
    if (report.contains("example")) os << ' ' << report["example"].get<std::string>();
    os << '\n';
    for (const auto& c : report.at("checks")) {
        const bool pass = c.at("pass").get<bool>();
        all = all && pass;
        os << (pass ? "  PASS  " : "  FAIL  ") << c.at("name").get<std::string>();
        if (c.contains("detail")) os << "  (" << c["detail"].get<std::string>() << ')';
        os << '\n';
    }
    for (const auto& a : report.at("advisories"))
        os << "  NOTE  " << a.at("name").get<std::string>() << ": " << a.at("detail").get<std::string>() << '\n';
    os << (all ? "status: pass\n" : "status: fail\n");
    return all ? kExitOk : kExitCheckFailed;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out: cannot write '" + path.string() + "'");
    f << text;
}

/// Executes one validated command, writing report.json / orbit.csv /
/// solution.csv under the output directory.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        if (cfg.command == Command::Report) {
            std::ifstream in(cfg.input_dir / "report.json");
            if (!in) throw ConfigError("in: no report.json in '" + cfg.input_dir.string() + "'");
            Json report;
            try {
                report = Json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(std::string("in: report.json is not valid: ") + e.what());
            }
            return summarize_report(report, out);
        }

        RunOutput res = cfg.command == Command::VerifyExample ? verify_example(*cfg.example, cfg.step, cfg.seed)
                                                              : solve_fbvp_run(*cfg.problem);
        std::filesystem::create_directories(cfg.output_dir);
        write_text(cfg.output_dir / "report.json", res.report.dump(2) + "\n");
        if (res.orbit) {
            std::ostringstream os;
            write_orbit_csv(os, *res.orbit);
            write_text(cfg.output_dir / "orbit.csv", os.str());
        }
        if (res.solution) {
            std::ostringstream os;
            write_solution_csv(os, *res.solution);
            write_text(cfg.output_dir / "solution.csv", os.str());
        }
        summarize_report(res.report, out);
        return res.status;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "usage error: out: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace relfix::cli
