#include "oscint/runner.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "oscint/optimality.hpp"
#include "oscint/scattering.hpp"

namespace oscint {

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string CsvTable::str() const
{
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A view of one config value that remembers where it came from, for diagnostics.
struct Node {
    const Json* j;
    std::string path;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError("config field '" + (path.empty() ? std::string("<root>") : path) + "': " + what);
    }
    std::string child(const std::string& k) const { return path.empty() ? k : path + "." + k; }
    bool has(const std::string& k) const { return j->is_object() && j->contains(k); }
    Node at(const std::string& k) const
    {
        if (!j->is_object()) fail("expected an object");
        auto it = j->find(k);
        if (it == j->end()) throw ConfigError("config: missing field '" + child(k) + "'");
        return {&*it, child(k)};
    }
    std::size_t size() const
    {
        if (!j->is_array()) fail("expected an array");
        return j->size();
    }
    Node operator[](std::size_t i) const { return {&(*j)[i], path + "[" + std::to_string(i) + "]"}; }

    double num() const
    {
        if (j->is_number()) return j->get<double>();
        if (j->is_string()) {
            const std::string s = j->get<std::string>();
            if (s == "inf" || s == "infinity") return kInf;
        }
        fail("expected a number");
    }
    double num(const std::string& k, double def) const { return has(k) ? at(k).num() : def; }
    long integer() const
    {
        if (j->is_number_integer()) return j->get<long>();
        if (j->is_number_float()) {
            const double v = j->get<double>();
            if (v == std::floor(v) && std::abs(v) < 1e15) return static_cast<long>(v);
        }
        fail("expected an integer");
    }
    long integer(const std::string& k, long def) const { return has(k) ? at(k).integer() : def; }
    std::string str() const
    {
        if (!j->is_string()) fail("expected a string");
        return j->get<std::string>();
    }
    std::string str(const std::string& k, const std::string& def) const { return has(k) ? at(k).str() : def; }
    bool boolean() const
    {
        if (!j->is_boolean()) fail("expected true or false");
        return j->get<bool>();
    }
    bool boolean(const std::string& k, bool def) const { return has(k) ? at(k).boolean() : def; }
    std::vector<double> nums() const
    {
        std::vector<double> v;
        for (std::size_t i = 0; i < size(); ++i) v.push_back((*this)[i].num());
        return v;
    }
};

// Runs a constructor that validates its arguments, reporting failures against the node.
template <class F>
auto guarded(const Node& n, F&& make)
{
    try {
        return make();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        n.fail(e.what());
    }
}

GridSpec parse_grid(const Node& n)
{
    const long d = n.integer("d", 1);
    const long size = n.at("n").integer();
    const double L = n.at("L").num();
    if (size <= 0) n.fail("n must be positive");
    return guarded(n, [&] { return GridSpec(static_cast<int>(d), static_cast<std::size_t>(size), L); });
}

Point parse_point(const Node& n, int d)
{
    if (n.j->is_number()) {
        if (d != 1) n.fail("expected an array of " + std::to_string(d) + " numbers");
        return {n.num(), 0.0};
    }
    auto v = n.nums();
    if (static_cast<int>(v.size()) != d) n.fail("expected " + std::to_string(d) + " coordinates");
    return {v[0], d == 2 ? v[1] : 0.0};
}

Point point_or_zero(const Node& n, const std::string& k, int d)
{
    return n.has(k) ? parse_point(n.at(k), d) : Point{0.0, 0.0};
}

cplx parse_complex(const Node& n)
{
    if (n.j->is_array()) {
        auto v = n.nums();
        if (v.size() != 2) n.fail("complex values are [re, im]");
        return {v[0], v[1]};
    }
    return {n.num(), 0.0};
}

Eigen::MatrixXd parse_matrix(const Node& n, int d)
{
    Eigen::MatrixXd M(d, d);
    if (static_cast<int>(n.size()) != d) n.fail("expected " + std::to_string(d) + " rows");
    for (int i = 0; i < d; ++i) {
        auto row = n[i].nums();
        if (static_cast<int>(row.size()) != d) n[i].fail("expected " + std::to_string(d) + " columns");
        for (int k = 0; k < d; ++k) M(i, k) = row[k];
    }
    return M;
}

Phase parse_phase(const Node& n, int d)
{
    const std::string type = n.str("type", "scalar");
    if (type == "scalar") {
        const double a = n.num("a", 0.0), b = n.num("b", 0.0), c = n.num("c", 0.0);
        return guarded(n, [&] { return Phase::scalar(a, b, c, d); });
    }
    if (type == "quadratic") {
        auto A = parse_matrix(n.at("A"), d), B = parse_matrix(n.at("B"), d), C = parse_matrix(n.at("C"), d);
        return guarded(n, [&] { return Phase::quadratic(A, B, C); });
    }
    n.at("type").fail("unknown phase type '" + type + "' (scalar, quadratic)");
}

Symbol parse_symbol(const Node& n, int d)
{
    const std::string type = n.at("type").str();
    Symbol m;
    if (type == "constant") {
        m = Symbol::constant(n.has("value") ? parse_complex(n.at("value")) : cplx(1.0), d);
    } else if (type == "bump") {
        const Point ec = point_or_zero(n, "eta_center", d), xc = point_or_zero(n, "xi_center", d);
        const double r = n.at("radius").num(), amp = n.num("amplitude", 1.0);
        m = guarded(n, [&] { return Symbol::bump(ec, xc, r, amp, d); });
    } else if (type == "coifman_meyer") {
        const std::string name = n.at("name").str();
        if (name == "ratio") {
            // eta.xi / (|eta|^2 + |xi|^2), homogeneous of degree 0
            m = Symbol::coifman_meyer(
                d,
                [](const Point& e, const Point& x) {
                    const double r2 = norm2(e) + norm2(x);
                    return cplx(r2 > 0 ? dot(e, x) / r2 : 0.0);
                },
                true);
        } else if (name == "eta1") {
            m = Symbol::coifman_meyer(d, [](const Point& e, const Point&) { return cplx(e[0]); });
        } else {
            n.at("name").fail("unknown Coifman-Meyer example '" + name + "' (ratio, eta1)");
        }
    } else {
        n.at("type").fail("unknown symbol type '" + type + "' (constant, bump, coifman_meyer)");
    }
    if (n.has("truncate")) {
        const double R = n.at("truncate").num();
        m = guarded(n.at("truncate"), [&] { return truncate_symbol(m, R); });
    }
    return m;
}

SampledField parse_field(const Node& n, const GridSpec& g)
{
    const std::string type = n.at("type").str();
    const int d = g.d;
    if (type == "gaussian") {
        const double s = n.num("sigma", 1.0);
        if (!(s > 0)) n.fail("sigma must be positive");
        const double amp = n.num("amplitude", 1.0);
        SampledField f = gaussian(g, s, point_or_zero(n, "center", d));
        f *= amp;
        return f;
    }
    if (type == "odd_gaussian") {
        // (x - c)_1 exp(-|x - c|^2 / (2 sigma^2))
        const double s = n.num("sigma", 1.0);
        if (!(s > 0)) n.fail("sigma must be positive");
        const Point c = point_or_zero(n, "center", d);
        return sample(g, Space::Physical, [&](const Point& x) {
            const Point y = x - c;
            return cplx(y[0] * std::exp(-norm2(y) / (2 * s * s)));
        });
    }
    if (type == "exp_abs") {
        const double s = n.num("scale", 1.0);
        if (!(s > 0)) n.fail("scale must be positive");
        const Point c = point_or_zero(n, "center", d);
        return sample(g, Space::Physical, [&](const Point& x) { return cplx(std::exp(-std::sqrt(norm2(x - c)) / s)); });
    }
    if (type == "random") {
        const long seed = n.at("seed").integer();
        const double band = n.num("band", 0.5);
        return guarded(n, [&] { return random_bandlimited(g, static_cast<std::uint64_t>(seed), band); });
    }
    if (type == "zero") return SampledField(g, Space::Physical);
    n.at("type").fail("unknown field type '" + type + "' (gaussian, odd_gaussian, exp_abs, random, zero)");
}

ExponentTriple parse_triple(const Node& n)
{
    auto v = n.nums();
    if (v.size() != 3) n.fail("a triple is [p, q, r]");
    return guarded(n, [&] { return ExponentTriple(v[0], v[1], v[2]); });
}

// Either an explicit list or {start, stop} with one of ratio, per_octave (geometric) or count (log-spaced).
std::vector<double> parse_schedule(const Node& n)
{
    if (n.j->is_array()) return n.nums();
    const double a = n.at("start").num(), b = n.at("stop").num();
    if (!(a > 0 && b > a)) n.fail("need 0 < start < stop");
    std::vector<double> v;
    if (n.has("count")) {
        const long c = n.at("count").integer();
        if (c < 2) n.at("count").fail("need at least 2 points");
        for (long i = 0; i < c; ++i) v.push_back(a * std::pow(b / a, static_cast<double>(i) / (c - 1)));
        return v;
    }
    double q = 0;
    if (n.has("per_octave")) {
        const long k = n.at("per_octave").integer();
        if (k < 1) n.at("per_octave").fail("must be positive");
        q = std::exp2(1.0 / k);
    } else {
        q = n.at("ratio").num();
    }
    if (!(q > 1)) n.fail("ratio must exceed 1");
    for (int i = 0;; ++i) {
        const double x = a * std::pow(q, i);
        if (x > b * (1 + 1e-9)) break;
        v.push_back(x);
    }
    return v;
}

std::string triple_label(const ExponentTriple& t)
{
    auto f = [](double v) { return std::isinf(v) ? std::string("inf") : format_number(v); };
    return f(t.p) + "_" + f(t.q) + "_" + f(t.r);
}

Json triple_json(const ExponentTriple& t)
{
    Json a = Json::array();
    for (double v : {t.p, t.q, t.r}) a.push_back(std::isinf(v) ? Json("inf") : Json(v));
    return a;
}

Json opt_num(const std::optional<double>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

Json cplx_json(cplx z)
{
    return Json::array({z.real(), z.imag()});
}

struct Checks {
    Json list = Json::array();
    bool ok = true;

    void below(const std::string& name, double value, double limit)
    {
        const bool pass = value < limit;
        list.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"relation", "<"}, {"pass", pass}});
        ok = ok && pass;
    }
    void at_least(const std::string& name, double value, double limit)
    {
        const bool pass = value >= limit;
        list.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"relation", ">="}, {"pass", pass}});
        ok = ok && pass;
    }
    void above(const std::string& name, double value, double limit)
    {
        const bool pass = value > limit;
        list.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"relation", ">"}, {"pass", pass}});
        ok = ok && pass;
    }
    void within(const std::string& name, double value, double lo, double hi)
    {
        const bool pass = value >= lo && value <= hi;
        list.push_back({{"name", name}, {"value", value}, {"range", Json::array({lo, hi})}, {"pass", pass}});
        ok = ok && pass;
    }
    void equals(const std::string& name, bool value, bool expected)
    {
        const bool pass = value == expected;
        list.push_back({{"name", name}, {"value", value}, {"expected", expected}, {"pass", pass}});
        ok = ok && pass;
    }
};

struct Context {
    Node cfg;
    Node tol;  // tolerance block, possibly empty
    Json& report;
    CsvTable& csv;
    Checks& checks;

    double tolerance(const std::string& k, double def) const { return tol.num(k, def); }
};

const Json kEmptyObject = Json::object();

// ---- kinds ----

void run_sweep(Context& c)
{
    const Node& n = c.cfg;
    const GridSpec g = parse_grid(n.at("grid"));
    const Phase phi = parse_phase(n.at("phase"), g.d);
    const Symbol m = parse_symbol(n.at("symbol"), g.d);
    const SampledField f = parse_field(n.at("f"), g), h = parse_field(n.at("g"), g);
    const auto lambdas = parse_schedule(n.at("lambdas"));
    std::vector<ExponentTriple> triples;
    if (n.has("triples")) {
        Node t = n.at("triples");
        for (std::size_t i = 0; i < t.size(); ++i) triples.push_back(parse_triple(t[i]));
    } else {
        triples.emplace_back(1.0, 1.0, kInf);
    }

    SweepOptions opt;
    const std::string path = n.str("path", "factored");
    if (path == "direct") opt.path = EnginePath::Direct;
    else if (path != "factored") n.at("path").fail("expected factored or direct");
    const std::string family = n.str("family", "fixed");
    if (family == "dispersed") opt.family = InputFamily::Dispersed;
    else if (family == "translated") opt.family = InputFamily::Translated;
    else if (family != "fixed") n.at("family").fail("expected fixed, dispersed or translated");
    opt.velocity = point_or_zero(n, "velocity", g.d);
    opt.weight_a = n.num("weight_a", 0.0);
    opt.weight_b = n.num("weight_b", 0.0);
    opt.truncation_radius = n.num("truncation_radius", 0.0);
    opt.drop_first_octave = n.boolean("drop_first_octave", true);

    auto rows = guarded(n, [&] { return exponent_table(phi, m, f, h, triples, lambdas, opt); });

    const bool ranged = c.tol.has("slope_range");
    std::vector<double> range = ranged ? c.tol.at("slope_range").nums() : std::vector<double>{};
    if (ranged && range.size() != 2) c.tol.at("slope_range").fail("expected [lo, hi]");
    // Predicted rates are upper bounds, so by default only a slope above the prediction
    // counts against them. A "gap" tolerance asks for a two-sided match instead.
    const bool two_sided = c.tol.has("gap");
    const double side_tol = two_sided ? c.tolerance("gap", 0.15) : c.tolerance("excess", 0.15);

    Json jr = Json::array();
    for (const auto& r : rows) {
        jr.push_back({{"triple", triple_json(r.triple)},
                      {"admissible", r.admissible},
                      {"slope", r.fit.slope},
                      {"intercept", r.fit.intercept},
                      {"residual", r.fit.residual},
                      {"fit_lambda_min", r.fit.fit_lambda_min},
                      {"fit_lambda_max", r.fit.fit_lambda_max},
                      {"fit_points", r.fit.fit_points},
                      {"predicted", opt_num(r.predicted)},
                      {"gap", opt_num(r.gap)},
                      {"truncation_radius", r.fit.truncation_radius}});
        if (!r.admissible) continue;
        const std::string name = "slope " + triple_label(r.triple);
        if (ranged) c.checks.within(name, r.fit.slope, range[0], range[1]);
        else if (two_sided) c.checks.below("gap " + triple_label(r.triple), *r.gap, side_tol);
        else c.checks.below("excess " + triple_label(r.triple), r.fit.slope - *r.predicted, side_tol);
    }
    c.report["rows"] = jr;

    c.csv.header = {"lambda"};
    for (const auto& t : triples) c.csv.header.push_back(triples.size() == 1 ? "ratio" : "ratio_" + triple_label(t));
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        std::vector<std::string> row{format_number(lambdas[i])};
        for (const auto& r : rows) row.push_back(format_number(r.fit.ratios[i]));
        c.csv.rows.push_back(row);
    }
}

void run_kernel_decay(Context& c)
{
    const Node& n = c.cfg;
    const GridSpec g = parse_grid(n.at("grid"));
    const Phase phi = parse_phase(n.at("phase"), g.d);
    const Symbol m = parse_symbol(n.at("symbol"), g.d);
    const double lambda = n.at("lambda").num();
    const Point x = point_or_zero(n, "x", g.d);
    const auto scaled = parse_schedule(n.at("offsets"));  // in units of 1/lambda
    std::vector<double> offsets;
    for (double s : scaled) offsets.push_back(s / lambda);
    const auto collapse = n.has("collapse_points") ? n.at("collapse_points").nums() : std::vector<double>{1.0, 2.0, 4.0};

    OscillatoryOp op{phi, m, lambda, g};
    TTStarProfile prof = guarded(n, [&] { return ttstar_kernel_decay(op, x, offsets); });
    c.report["lambda"] = lambda;
    c.report["n_fit"] = prof.n_fit;
    c.checks.at_least("n_fit", prof.n_fit, c.tolerance("n_fit_min", 2.0));

    OscillatoryOp op2 = op;
    op2.lambda = 2.0 * lambda;
    Json jc = Json::array();
    for (double s : collapse) {
        const double a = std::abs(ttstar_kernel(op, x, s / lambda));
        const double b = std::abs(ttstar_kernel(op2, x, s / (2.0 * lambda)));
        const double rel = std::abs(a - b) / a;
        jc.push_back({{"scaled_offset", s}, {"abs_kernel", a}, {"abs_kernel_doubled", b}, {"relative_change", rel}});
        c.checks.below("collapse s=" + format_number(s), rel, c.tolerance("collapse", 0.2));
    }
    c.report["collapse"] = jc;

    c.csv.header = {"scaled_offset", "offset", "abs_kernel"};
    for (std::size_t i = 0; i < offsets.size(); ++i)
        c.csv.rows.push_back({format_number(scaled[i]), format_number(offsets[i]), format_number(prof.values[i])});
}

CounterexampleOneConfig parse_ce1(const Node& n)
{
    CounterexampleOneConfig cfg;
    cfg.mu = n.num("mu", cfg.mu);
    cfg.k = n.num("k", cfg.k);
    if (n.has("grid")) cfg.grid = parse_grid(n.at("grid"));
    if (n.has("probes")) cfg.probes = parse_schedule(n.at("probes"));
    if (n.has("taper")) {
        auto t = n.at("taper").nums();
        if (t.size() != 2) n.at("taper").fail("expected [lo, hi]");
        cfg.taper_lo = t[0];
        cfg.taper_hi = t[1];
    }
    return cfg;
}

void run_counterexample1(Context& c)
{
    const Node& n = c.cfg;
    CounterexampleOneConfig cfg = parse_ce1(n);
    auto samples = guarded(n, [&] { return counterexample1_ratio(cfg); });
    const double var = last_decade_variation(samples);
    c.report["mu"] = cfg.mu;
    c.report["last_decade_variation"] = var;
    c.checks.below("last decade variation", var, c.tolerance("variation", 0.15));

    if (n.has("divergence")) {
        Node dv = n.at("divergence");
        CounterexampleOneConfig base = cfg;
        if (dv.has("grid")) base.grid = parse_grid(dv.at("grid"));
        const double r0 = dv.at("r0").num();
        const int doublings = static_cast<int>(dv.integer("doublings", 3));
        const double min_growth = dv.num("min_growth", 1.25);
        Node cases = dv.at("cases");
        Json jd = Json::array();
        for (std::size_t i = 0; i < cases.size(); ++i) {
            Node cs = cases[i];
            CounterexampleOneConfig cc = base;
            const double p = cs.at("p").num();
            cc.mu = cs.num("mu", 1.0 - 1.0 / p + 0.02);
            auto rep = guarded(cs, [&] { return counterexample1_divergence(cc, p, r0, doublings, min_growth); });
            jd.push_back({{"p", p}, {"r", rep.r}, {"mu", cc.mu}, {"half_widths", rep.half_widths}, {"norms", rep.norms},
                          {"growth", rep.growth}, {"certified", rep.certified}});
            if (cs.has("expect_certified"))
                c.checks.equals("divergence p=" + format_number(p), rep.certified, cs.at("expect_certified").boolean());
        }
        c.report["divergence"] = jd;
    }

    c.csv.header = {"radius", "compensated"};
    for (const auto& s : samples) c.csv.rows.push_back({format_number(s.radius), format_number(s.value)});
}

void run_counterexample2(Context& c)
{
    const Node& n = c.cfg;
    CounterexampleTwoConfig cfg;
    cfg.mu = n.num("mu", cfg.mu);
    cfg.d = static_cast<int>(n.integer("d", cfg.d));
    if (n.has("identity_grid")) cfg.identity_grid = parse_grid(n.at("identity_grid"));
    if (n.has("tail_grid")) cfg.tail_grid = parse_grid(n.at("tail_grid"));
    if (n.has("fit")) {
        auto w = n.at("fit").nums();
        if (w.size() != 2) n.at("fit").fail("expected [lo, hi]");
        cfg.fit_lo = w[0];
        cfg.fit_hi = w[1];
    }
    const std::string origin = n.str("origin", "cell_average");
    if (origin == "excise") cfg.origin = OriginRule::Excise;
    else if (origin != "cell_average") n.at("origin").fail("expected cell_average or excise");
    if (n.has("phase")) {
        Node p = n.at("phase");
        cfg.a = p.num("a", cfg.a);
        cfg.b = p.num("b", cfg.b);
        cfg.c = p.num("c", cfg.c);
    }
    auto rep = guarded(n, [&] { return counterexample2_check(cfg); });
    c.report["identity_error"] = rep.identity_error;
    c.report["tail_exponent"] = rep.tail_exponent;
    c.report["tail_residual"] = rep.tail_residual;
    c.report["predicted_tail"] = rep.predicted_tail;
    c.report["no_power_tail"] = rep.no_power_tail;
    c.checks.below("identity error", rep.identity_error, c.tolerance("identity", 1e-6));
    if (rep.no_power_tail) c.checks.equals("power tail present", false, true);
    else c.checks.below("tail exponent gap", std::abs(rep.tail_exponent - rep.predicted_tail), c.tolerance("tail", 0.15));

    c.csv.header = {"radius", "abs_value"};
    for (const auto& [r, v] : rep.tail_samples) c.csv.rows.push_back({format_number(r), format_number(v)});
}

// phi(x) = sum_k c_k x_1^k
struct Polynomial {
    std::vector<double> coef;
    double operator()(double x) const
    {
        double s = 0;
        for (std::size_t k = coef.size(); k-- > 0;) s = s * x + coef[k];
        return s;
    }
    double deriv(double x) const
    {
        double s = 0;
        for (std::size_t k = coef.size(); k-- > 1;) s = s * x + k * coef[k];
        return s;
    }
};

void run_finite_part(Context& c)
{
    Node cases = c.cfg.at("cases");
    if (cases.size() == 0) cases.fail("at least one case is required");
    Json jcases = Json::array();
    c.csv.header = {"case", "T", "re", "im"};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        Node cs = cases[i];
        const std::string name = cs.str("name", "case" + std::to_string(i));
        const GridSpec g = parse_grid(cs.at("grid"));
        if (g.d != 1) cs.at("grid").fail("finite-part cases are one-dimensional");
        const SampledField f = parse_field(cs.at("f"), g);
        Polynomial poly{cs.has("phase") ? cs.at("phase").at("coefficients").nums() : std::vector<double>{0.0, 1.0}};
        const auto T = parse_schedule(cs.at("T_list"));
        LambdaQuadrature q;
        q.rel_tol = cs.num("rel_tol", q.rel_tol);

        ScalarPhase ph = [poly](const Point& x) { return poly(x[0]); };
        auto ex = guarded(cs, [&] { return dt_extrapolate(ph, f, T, q); });
        Json jc{{"name", name},
                {"values", Json::array()},
                {"decrements", ex.decrements},
                {"delta", opt_num(ex.delta)},
                {"at_roundoff", ex.at_roundoff},
                {"extrapolated", cplx_json(ex.extrapolated)}};
        for (std::size_t k = 0; k < T.size(); ++k) {
            jc["values"].push_back(cplx_json(ex.values[k]));
            c.csv.rows.push_back({name, format_number(T[k]), format_number(ex.values[k].real()), format_number(ex.values[k].imag())});
        }
        if (cs.has("expect")) {
            const cplx want = parse_complex(cs.at("expect"));
            c.checks.below(name + " limit", std::abs(ex.extrapolated - want), cs.num("tol", 1e-2));
        }
        if (cs.boolean("reference", false)) {
            cplx ref = guarded(cs, [&] {
                return fp_reference_pairing([poly](double x) { return poly(x); }, f, [poly](double x) { return poly.deriv(x); });
            });
            jc["reference"] = cplx_json(ref);
            c.checks.below(name + " reference agreement", std::abs(ref - ex.extrapolated), cs.num("reference_tol", 1e-2));
        }
        if (cs.has("delta_min")) {
            if (!ex.delta) c.checks.equals(name + " decrement exponent available", false, true);
            else c.checks.above(name + " delta", *ex.delta, cs.at("delta_min").num());
        }
        jcases.push_back(jc);
    }
    c.report["cases"] = jcases;
}

void run_fp_multiplier(Context& c)
{
    const Node& n = c.cfg;
    const GridSpec g = parse_grid(n.at("grid"));
    const Phase phi = parse_phase(n.at("phase"), g.d);
    const Symbol m = parse_symbol(n.at("symbol"), g.d);
    const ExponentTriple t = n.has("triple") ? parse_triple(n.at("triple")) : ExponentTriple(1.0, 1.0, kInf);
    FinitePartConfig cfg;
    cfg.lambda_max = n.at("lambda_max").num();
    cfg.quad.order = static_cast<int>(n.integer("quad_order", cfg.quad.order));
    cfg.quad.rel_tol = n.num("rel_tol", cfg.quad.rel_tol);

    if (n.boolean("check_d1_rejection", true)) {
        GridSpec g1(1, 128, g.half_width);
        SampledField a = gaussian(g1, 1.0);
        std::string msg;
        bool rejected = false;
        try {
            fp_bilinear_apply(Phase::scalar(0.0, 1.0, 0.0, 1), Symbol::constant(1.0, 1), a, a, cfg, t);
        } catch (const std::invalid_argument& e) {
            msg = e.what();
            rejected = msg.find("dimension 1") != std::string::npos;
        }
        c.report["d1_diagnostic"] = msg;
        c.checks.equals("d=1 rejected with diagnostic", rejected, true);
    }

    auto level = [&](const GridSpec& gs, double lmax) {
        SampledField f = parse_field(n.at("f"), gs), h = parse_field(n.at("g"), gs);
        FinitePartConfig cc = cfg;
        cc.lambda_max = lmax;
        auto res = guarded(n, [&] { return fp_bilinear_apply(phi, m, f, h, cc, t); });
        const double denom = lp_norm(f, t.p) * lp_norm(h, t.q);
        const double ratio = denom > 0 ? lp_norm(res.field, t.r) / denom : 0.0;
        return std::make_pair(res, ratio);
    };

    const double nf = n.num("refine_n_factor", 2.0), lf = n.num("refine_L_factor", std::sqrt(2.0));
    const GridSpec fine = guarded(n, [&] {
        return GridSpec(g.d, static_cast<std::size_t>(std::llround(g.n * nf)), g.half_width * lf);
    });

    auto [base, ratio0] = level(g, cfg.lambda_max);
    auto [longer, ratio1] = level(g, 2.0 * cfg.lambda_max);
    auto [refined, ratio2] = level(fine, 2.0 * cfg.lambda_max);
    const double change = lp_norm(longer.field - base.field, t.r);
    const double ratio_change = ratio0 > 0 ? std::abs(ratio2 - ratio0) / ratio0 : 0.0;
    const double grid_change = ratio1 > 0 ? std::abs(ratio2 - ratio1) / ratio1 : 0.0;

    c.report["rho"] = base.rho;
    c.report["tail_estimate"] = base.tail_estimate;
    c.report["doubling_change"] = change;
    c.report["norm_ratio"] = ratio0;
    c.report["norm_ratio_refined"] = ratio2;
    c.report["norm_ratio_change"] = ratio_change;
    c.checks.below("lambda_max doubling change / tail estimate", base.tail_estimate > 0 ? change / base.tail_estimate : kInf,
                   c.tolerance("doubling_factor", 2.0));
    c.report["norm_ratio_grid_change"] = grid_change;
    // refinement of grid and lambda_max together, then the grid alone at the doubled lambda_max
    c.checks.below("norm ratio change under refinement", ratio_change, c.tolerance("ratio_change", 0.1));
    c.checks.below("norm ratio change under grid refinement alone", grid_change, c.tolerance("ratio_change", 0.1));

    c.csv.header = {"level", "n", "L", "lambda_max", "norm_ratio", "tail_estimate", "evaluations"};
    auto row = [&](const char* name, const GridSpec& gs, double lm, double ratio, const FpBilinearResult& r) {
        c.csv.rows.push_back({name, std::to_string(gs.n), format_number(gs.half_width), format_number(lm), format_number(ratio),
                              format_number(r.tail_estimate), std::to_string(r.evaluations)});
    };
    row("base", g, cfg.lambda_max, ratio0, base);
    row("doubled", g, 2.0 * cfg.lambda_max, ratio1, longer);
    row("refined", fine, 2.0 * cfg.lambda_max, ratio2, refined);
}

void run_scatter(Context& c)
{
    const Node& n = c.cfg;
    ScatterConfig cfg;
    const GridSpec g = parse_grid(n.at("grid"));
    cfg.u0 = parse_field(n.at("u0"), g);
    cfg.P = DispersionSymbol::laplacian_symbol(n.num("laplacian", 1.0));
    cfg.m = n.has("symbol") ? parse_symbol(n.at("symbol"), g.d) : Symbol::constant(1.0, g.d);
    cfg.t_max = n.at("t_max").num();
    cfg.dt = n.at("dt").num();
    cfg.fp.lambda_max = n.num("lambda_max", cfg.t_max);
    cfg.fp.quad.order = static_cast<int>(n.integer("quad_order", cfg.fp.quad.order));
    if (n.has("triple")) cfg.triple = parse_triple(n.at("triple"));

    auto lam = guarded(n, [&] { return second_born_lambda(cfg); });
    auto tim = guarded(n, [&] { return second_born_time(cfg); });
    const double disc = relative_l2_error(lam.field, tim.field);
    const double disc_trunc = relative_l2_error(lam.truncated, tim.truncated);
    auto path_json = [](const ScatterResult& r) {
        return Json{{"exponent", r.exponent}, {"tail_fraction", r.tail_fraction}, {"tail_norm", r.tail_norm},
                    {"l2_norm", lp_norm(r.field, 2.0)}, {"evaluations", r.evaluations}};
    };
    c.report["lambda_path"] = path_json(lam);
    c.report["time_path"] = path_json(tim);
    c.report["discrepancy"] = disc;
    c.report["discrepancy_truncated"] = disc_trunc;
    c.checks.below("lambda/time relative L2 discrepancy", disc, c.tolerance("discrepancy", 1e-2));

    c.csv.header = {"path", "horizon", "step", "exponent", "tail_fraction", "l2_norm", "evaluations"};
    auto row = [&](const char* name, double horizon, double step, const ScatterResult& r) {
        c.csv.rows.push_back({name, format_number(horizon), format_number(step), format_number(r.exponent),
                              format_number(r.tail_fraction), format_number(lp_norm(r.field, 2.0)), std::to_string(r.evaluations)});
    };
    row("lambda", cfg.fp.lambda_max, 0.0, lam);
    row("time", cfg.t_max, cfg.dt, tim);

    if (n.boolean("check_dt_halving", true)) {
        ScatterConfig half = cfg;
        half.dt = 0.5 * cfg.dt;
        auto fine = guarded(n, [&] { return second_born_time(half); });
        const double change = relative_l2_error(fine.field, tim.field);
        c.report["dt_halving_change"] = change;
        c.checks.below("time step halving change", change, c.tolerance("dt_halving", 1e-3));
        row("time_half_step", half.t_max, half.dt, fine);
    }
}

std::vector<std::pair<Point, Point>> sample_set(const Node& n, int d)
{
    const int per_axis = static_cast<int>(n.integer("per_axis", 9));
    if (per_axis < 2) n.fail("per_axis must be at least 2");
    if (n.has("symbol")) return support_samples(parse_symbol(n.at("symbol"), d), per_axis);
    return support_samples(Symbol::bump({0, 0}, {0, 0}, n.num("box", 1.0), 1.0, d), per_axis);
}

void run_check_phase(Context& c)
{
    const Node& n = c.cfg;
    const int d = static_cast<int>(n.integer("d", 1));
    if (d != 1 && d != 2) n.at("d").fail("dimension must be 1 or 2");
    const Phase phi = parse_phase(n.at("phase"), d);
    auto samples = sample_set(n, d);
    auto rep = nondegeneracy_report(phi, samples, c.tolerance("degeneracy", 1e-8));
    Json conds = Json::array();
    c.csv.header = {"condition", "min_abs_det", "degenerate"};
    for (int k = 0; k < 4; ++k) {
        conds.push_back({{"name", NondegeneracyReport::names[k]}, {"min_abs_det", rep.min_abs_det[k]}, {"degenerate", rep.degenerate[k]}});
        c.csv.rows.push_back({NondegeneracyReport::names[k], format_number(rep.min_abs_det[k]), rep.degenerate[k] ? "1" : "0"});
    }
    c.report["conditions"] = conds;
    c.report["samples"] = rep.sample_count;
    if (phi.is_scalar()) {
        auto sc = quadratic_split_conditions(phi);
        c.report["split_conditions"] = {{"values", sc.values}, {"all_pass", sc.all_pass()}};
    }
    c.checks.equals("all four conditions pass", rep.all_pass(), n.boolean("expect_pass", true));
}

void run_check_symbol(Context& c)
{
    const Node& n = c.cfg;
    const int d = static_cast<int>(n.integer("d", 1));
    if (d != 1 && d != 2) n.at("d").fail("dimension must be 1 or 2");
    const Symbol m = parse_symbol(n.at("symbol"), d);
    const int order = static_cast<int>(n.integer("max_order", 2));
    const auto radii = n.has("radii") ? parse_schedule(n.at("radii")) : std::vector<double>{1, 2, 4, 8, 16, 32};
    const int per_ring = static_cast<int>(n.integer("samples_per_ring", 64));
    auto rep = guarded(n, [&] { return cm_bound_check(m, order, radii, per_ring); });
    c.report["slopes"] = rep.slope;
    c.report["passes"] = rep.passes;
    c.checks.equals("Coifman-Meyer bounds", rep.passes, n.boolean("expect_pass", true));
    c.csv.header = {"radius", "sup0", "sup1", "sup2"};
    for (std::size_t i = 0; i < rep.radii.size(); ++i)
        c.csv.rows.push_back({format_number(rep.radii[i]), format_number(rep.sup[i][0]), format_number(rep.sup[i][1]),
                              format_number(rep.sup[i][2])});
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    DecayFit fit = fit_power_law(x, y, false);
    return fit.slope;
}

void run_dispersive(Context& c)
{
    const Node& n = c.cfg;
    const GridSpec g = parse_grid(n.at("grid"));
    const SampledField f = parse_field(n.at("f"), g);
    const auto times = parse_schedule(n.at("times"));
    std::vector<double> norms;
    c.csv.header = {"t", "sup_norm"};
    for (double t : times) {
        norms.push_back(lp_norm(free_propagator(f, t), kInf));
        c.csv.rows.push_back({format_number(t), format_number(norms.back())});
    }
    const double slope = guarded(n, [&] { return fitted_slope(times, norms); });
    const double expected = n.num("expected_slope", -0.5 * g.d);
    c.report["slope"] = slope;
    c.report["expected_slope"] = expected;
    c.checks.below("slope gap", std::abs(slope - expected), c.tolerance("slope", 0.05));
}

void run_oracle(Context& c)
{
    const Node& n = c.cfg;
    const GridSpec g = parse_grid(n.at("grid"));
    const SampledField f = parse_field(n.at("f"), g), h = parse_field(n.at("g"), g);
    Node ph = n.at("phases"), sy = n.at("symbols");
    const auto lambdas = n.at("lambdas").nums();
    const double tol = c.tolerance("relative_error", 1e-6);
    double worst = 0;
    c.csv.header = {"phase", "symbol", "lambda", "relative_error"};
    for (std::size_t i = 0; i < ph.size(); ++i) {
        const Phase phi = parse_phase(ph[i], g.d);
        for (std::size_t k = 0; k < sy.size(); ++k) {
            const Symbol m = parse_symbol(sy[k], g.d);
            for (double l : lambdas) {
                OscillatoryOp op{phi, m, l, g};
                const double err = guarded(n, [&] { return relative_l2_error(apply_factored(op, f, h), apply_direct(op, f, h)); });
                worst = std::max(worst, err);
                c.csv.rows.push_back({std::to_string(i), std::to_string(k), format_number(l), format_number(err)});
                c.checks.below("phase " + std::to_string(i) + " symbol " + std::to_string(k) + " lambda " + format_number(l), err, tol);
            }
        }
    }
    c.report["worst_relative_error"] = worst;
}

void run_product_identity(Context& c)
{
    Node cases = c.cfg.at("cases");
    const double tol = c.tolerance("relative_error", 1e-10);
    c.csv.header = {"d", "path", "relative_error"};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        Node cs = cases[i];
        const GridSpec g = parse_grid(cs.at("grid"));
        const SampledField f = parse_field(cs.at("f"), g), h = parse_field(cs.at("g"), g);
        SampledField expect(g, Space::Physical);
        const double scale = std::pow(2.0 * std::numbers::pi, 0.5 * g.d);
        for (std::size_t j = 0; j < g.size(); ++j) expect[j] = scale * f[j] * h[j];
        OscillatoryOp op{Phase::scalar(1.0, 1.0, 1.0, g.d), Symbol::constant(1.0, g.d), 0.0, g};
        const std::pair<const char*, SampledField> paths[] = {{"direct", apply_direct(op, f, h)},
                                                              {"factored", apply_factored(op, f, h)},
                                                              {"pseudoproduct", apply_pseudoproduct(op.symbol, f, h)}};
        for (const auto& [name, out] : paths) {
            const double err = relative_l2_error(out, expect);
            c.csv.rows.push_back({std::to_string(g.d), name, format_number(err)});
            c.checks.below("d=" + std::to_string(g.d) + " " + name, err, tol);
        }
    }
}

void run_admissibility(Context& c)
{
    Node cases = c.cfg.at("cases");
    c.csv.header = {"p", "q", "r", "admissible", "expected"};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const ExponentTriple t = parse_triple(cases[i].at("triple"));
        const bool got = admissible(t), want = cases[i].at("admissible").boolean();
        c.csv.rows.push_back({format_number(t.p), format_number(t.q), format_number(t.r), got ? "1" : "0", want ? "1" : "0"});
        c.checks.equals("triple " + t.str(), got, want);
    }
}

using Handler = void (*)(Context&);

struct Entry {
    ExperimentInfo info;
    Handler run;
};

const std::vector<Entry>& registry()
{
    static const std::vector<Entry> r{
        {{"sweep", "lambda sweep of norm ratios with fitted decay slopes per exponent triple",
          {"grid", "phase", "symbol", "f", "g", "lambdas"}, {{"excess", 0.15}}},
         run_sweep},
        {{"kernel-decay", "TT* kernel decay in the offset and scaling collapse under (lambda,u) -> (2 lambda,u/2)",
          {"grid", "phase", "symbol", "lambda", "offsets"}, {{"n_fit_min", 2.0}, {"collapse", 0.2}}},
         run_kernel_decay},
        {{"counterexample-1", "compensated ratio |B_1(f,f)(x)| |x|^{2 mu} over probe radii, optional box divergence",
          {"mu", "grid", "probes"}, {{"variation", 0.15}}},
         run_counterexample1},
        {{"counterexample-2", "identity B = e^{i Laplacian} F^2 and the power tail of the output",
          {"mu"}, {{"identity", 1e-6}, {"tail", 0.15}}},
         run_counterexample2},
        {{"finite-part", "truncated pairings <D_T,f>, extrapolation in T and reference principal values",
          {"cases"}, {{"tol", 1e-2}, {"reference_tol", 1e-2}}},
         run_finite_part},
        {{"fp-multiplier", "singular bilinear multiplier from the finite part, lambda_max doubling and grid refinement",
          {"grid", "phase", "symbol", "f", "g", "lambda_max"}, {{"doubling_factor", 2.0}, {"ratio_change", 0.1}}},
         run_fp_multiplier},
        {{"scatter", "second Born term from the lambda integral and from Duhamel time stepping",
          {"grid", "u0", "t_max", "dt"}, {{"discrepancy", 1e-2}, {"dt_halving", 1e-3}}},
         run_scatter},
        {{"check-phase", "four nondegeneracy determinants of a quadratic phase on sample points",
          {"phase"}, {{"degeneracy", 1e-8}}},
         run_check_phase},
        {{"check-symbol", "Coifman-Meyer derivative bounds sampled on rings", {"symbol"}, {}},
         run_check_symbol},
        {{"dispersive", "sup-norm decay of the free Schroedinger propagator", {"grid", "f", "times"}, {{"slope", 0.05}}},
         run_dispersive},
        {{"oracle", "direct summation against the factored path", {"grid", "f", "g", "phases", "symbols", "lambdas"},
          {{"relative_error", 1e-6}}},
         run_oracle},
        {{"product-identity", "lambda = 0 operator against the scaled pointwise product", {"cases"}, {{"relative_error", 1e-10}}},
         run_product_identity},
        {{"admissibility", "admissibility of exponent triples against expected flags", {"cases"}, {}}, run_admissibility},
    };
    return r;
}

}

const std::vector<ExperimentInfo>& experiment_catalogue()
{
    static const std::vector<ExperimentInfo> cat = [] {
        std::vector<ExperimentInfo> v;
        for (const auto& e : registry()) v.push_back(e.info);
        return v;
    }();
    return cat;
}

std::string list_experiments()
{
    std::ostringstream os;
    for (const auto& e : experiment_catalogue()) {
        os << e.kind << "\n  " << e.summary << "\n  required:";
        for (const auto& r : e.required) os << ' ' << r;
        os << "\n  tolerances:";
        if (e.tolerances.empty()) os << " exact";
        for (const auto& [k, v] : e.tolerances) os << ' ' << k << '=' << format_number(v);
        os << '\n';
    }
    return os.str();
}

Json parse_config_text(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        throw ConfigError("malformed config at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
    }
}

RunResult run_experiment(const Json& config)
{
    RunResult res;
    try {
        Node root{&config, ""};
        if (!config.is_object()) root.fail("a config is a JSON object");
        const std::string kind = root.at("kind").str();
        const Entry* entry = nullptr;
        for (const auto& e : registry())
            if (e.info.kind == kind) entry = &e;
        if (!entry) root.at("kind").fail("unknown experiment kind '" + kind + "'; see 'oscint list'");

        Node tol = root.has("tolerance") ? root.at("tolerance") : Node{&kEmptyObject, "tolerance"};
        const double old_budget = direct_budget();
        if (root.has("direct_budget")) set_direct_budget(root.at("direct_budget").num());

        Json report = Json::object();
        report["kind"] = kind;
        if (root.has("name")) report["name"] = root.at("name").str();
        Checks checks;
        Context ctx{root, tol, report, res.csv, checks};
        try {
            entry->run(ctx);
        } catch (...) {
            set_direct_budget(old_budget);
            throw;
        }
        set_direct_budget(old_budget);
        report["checks"] = checks.list;
        report["passed"] = checks.ok;
        res.report = std::move(report);
        res.passed = checks.ok;
        res.exit_code = checks.ok ? kExitPass : kExitToleranceFail;
    } catch (const std::exception& e) {
        res.exit_code = kExitError;
        res.passed = false;
        res.error = e.what();
        res.report = Json{{"error", res.error}, {"passed", false}};
        res.csv = {};
    }
    return res;
}

RunResult run_config_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        RunResult r;
        r.error = "cannot read config file '" + path + "'";
        r.report = Json{{"error", r.error}, {"passed", false}};
        return r;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    Json cfg;
    try {
        cfg = parse_config_text(ss.str());
    } catch (const ConfigError& e) {
        RunResult r;
        r.error = e.what();
        r.report = Json{{"error", r.error}, {"passed", false}};
        return r;
    }
    return run_experiment(cfg);
}

void write_results(const RunResult& r, const std::string& dir, const std::string& stem)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base = fs::path(dir) / stem;
    {
        std::ofstream js(base.string() + ".json", std::ios::binary);
        if (!js) throw std::runtime_error("cannot write " + base.string() + ".json");
        js << r.report.dump(2) << '\n';
    }
    if (!r.csv.header.empty()) {
        std::ofstream cs(base.string() + ".csv", std::ios::binary);
        if (!cs) throw std::runtime_error("cannot write " + base.string() + ".csv");
        cs << r.csv.str();
    }
}

}
