#include "output.hpp"

#include "expsumkit/remez.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

using namespace esk;
using namespace esk::cli;
using nlohmann::json;

namespace {

struct Common {
    std::string format = "csv";
    std::string out;
    int bits = 0;
};

struct KernelFlags {
    std::string eta = "1", a = "0.5", b = "1";
};

// decimal, or 2^k for exact powers of two
Real parse_real(const std::string& s)
{
    if (s.rfind("2^", 0) == 0) {
        long e = std::stol(s.substr(2));
        return ldexp(Real(1), e);
    }
    return Real(s);
}

std::vector<std::string> default_r_list()
{
    std::vector<std::string> v;
    for (int k = 1; k <= 20; ++k) v.push_back("2^-" + std::to_string(k));
    return v;
}

Format parse_format(const std::string& f)
{
    if (f == "csv") return Format::Csv;
    if (f == "json") return Format::Json;
    throw ArgumentError("--format must be csv or json");
}

OutputSpec spec_for(const Common& c, const std::string& path, int bits)
{
    return OutputSpec{parse_format(c.format), path, digits_for_bits(bits)};
}

json base_meta(const std::string& cmd, int bits)
{
    json m;
    m["command"] = cmd;
    m["bits"] = bits;
    m["schema"] = "expsumkit-csv v1";
    return m;
}

PowerKernel make_kernel(const KernelFlags& k, int bits)
{
    PrecisionScope ps(bits + 32);
    return PowerKernel(parse_real(k.eta), parse_real(k.a), parse_real(k.b));
}

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", c.out, "output path (stdout if omitted)");
    sub->add_option("--bits", c.bits, "working precision in bits (>= 64)");
}

void add_kernel(CLI::App* sub, KernelFlags& k)
{
    sub->add_option("--eta", k.eta, "exponent of the power density t^(eta-1)");
    sub->add_option("--a", k.a, "lower end of [a,b]; accepts 2^k");
    sub->add_option("--b", k.b, "upper end of [a,b]");
}

json kernel_meta(const KernelFlags& k, int M)
{
    return json{{"eta", k.eta}, {"a", k.a}, {"b", k.b}, {"M", M}};
}

int cmd_rhohat(const Common& c, const std::vector<std::string>& rs, const std::vector<std::string>& kinds)
{
    const int bits = c.bits ? c.bits : 128;
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    std::vector<TransformKind> ks;
    for (const auto& k : kinds) ks.push_back(parse_transform(k));
    if (ks.empty()) ks.assign(std::begin(kAllTransforms), std::end(kAllTransforms));
    std::vector<Real> rv;
    for (const auto& s : rs) {
        Real r = parse_real(s);
        if (!(r > 0) || !(r < 1)) throw ArgumentError("--r values must lie in (0,1)");
        rv.push_back(r);
    }
    const std::size_t n = rv.size() * ks.size();
    std::vector<std::vector<Cell>> rows(n);
    parallel_for(static_cast<int>(n), [&](int i) {
        const Real& r = rv[i / ks.size()];
        TransformKind k = ks[i % ks.size()];
        Transform psi(k, r, ctx);
        Real rho = psi.rho_hat();
        rows[i] = {Cell(r), Cell(to_string(k)), Cell(rho), Cell(sqr(rho))};
    });
    Table t{{"r", "kind", "rho_hat", "rho_hat_sq"}, {}};
    for (auto& row : rows) t.add(std::move(row));
    json meta = base_meta("rhohat-table", bits);
    meta["r"] = rs;
    write_table(t, spec_for(c, c.out, bits), meta);
    return 0;
}

int cmd_hr(const Common& c, const std::vector<std::string>& rs)
{
    const int bits = c.bits ? c.bits : 128;
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    Table t{{"r", "h_r", "rho", "prefactor", "ratio"}, {}};
    for (const auto& s : rs) {
        Real r = parse_real(s);
        if (!(r > 0) || !(r < 1)) throw ArgumentError("--r values must lie in (0,1)");
        HrRow row = hr_row(r, ctx);
        t.add({r, row.h, row.rho, row.prefactor, row.ratio});
    }
    json meta = base_meta("hr-table", bits);
    meta["r"] = rs;
    write_table(t, spec_for(c, c.out, bits), meta);
    return 0;
}

Table expsum_table(const ExpSum& es, const Real& f0)
{
    Table t{{"nu", "t", "c", "sum_c", "f0"}, {}};
    Real s = coeff_sum(es);
    for (std::size_t v = 0; v < es.size(); ++v) t.add({static_cast<long>(v + 1), es.t[v], es.c[v], s, f0});
    return t;
}

// error curve on a 64-per-decade grid merged with the refined maximum
Table curve_table(const ExpSum& es, const KernelEvaluator& f, const ScanResult& sc, const ErrorExpansion* ex)
{
    const PowerKernel& k = f.kernel();
    Vec xs = log_grid(ldexp(1 / k.b, -20), ldexp(1 / k.a, 20), 64);
    xs.push_back(sc.x_at_max);
    std::sort(xs.begin(), xs.end(), [](const Real& a, const Real& b) { return a < b; });
    Vec err = error_grid(es, f, xs);
    Table t{{"x", "E"}, {}};
    if (ex) {
        t.columns.push_back("partial_sum");
        t.columns.push_back("envelope");
    }
    Real env = ex ? ex->envelope() : Real(0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<Cell> row{xs[i], err[i]};
        if (ex) {
            row.emplace_back(ex->partial_sum(xs[i]));
            row.emplace_back(env);
        }
        t.add(std::move(row));
    }
    return t;
}

int cmd_gauss(const Common& c, const KernelFlags& kf, int M, const std::string& kind, int mds, const std::string& curve,
              int terms)
{
    if (M < 1) throw ArgumentError("--m must be positive");
    const int bits = c.bits ? c.bits : precision_policy(make_kernel(kf, 128), M);
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    PowerKernel k = make_kernel(kf, bits);
    Transform psi(parse_transform(kind), k.a / k.b, ctx);
    if (mds <= 0) mds = default_mds(k.a / k.b);
    ExpSum es = gauss_expsum(k, psi, M, mds, ctx);
    KernelEvaluator f(k, 2, ctx);
    ScanResult sc = max_error_scan(es, f, ctx);
    Real f0 = f_at_zero(k, 0, ctx);

    json meta = base_meta("gauss-expsum", bits);
    meta["kernel"] = kernel_meta(kf, M);
    meta["transform"] = kind;
    meta["mds"] = mds;
    meta["max_abs_error"] = sc.max_abs.exact_str();
    meta["x_at_max"] = sc.x_at_max.exact_str();
    meta["stenger_bound"] = stenger_bound(k, psi, M, ctx).exact_str();
    write_table(expsum_table(es, f0), spec_for(c, c.out, bits), meta);
    if (!curve.empty()) {
        std::unique_ptr<ErrorExpansion> ex;
        if (terms > 0) ex = std::make_unique<ErrorExpansion>(epsilon_coeffs(k, psi, M, 2 * M + terms - 1, mds, ctx));
        write_table(curve_table(es, f, sc, ex.get()), spec_for(c, curve, bits), meta);
    }
    return 0;
}

int cmd_best(const Common& c, const KernelFlags& kf, int M, int mds, const std::string& curve, const std::string& alt)
{
    if (M < 1) throw ArgumentError("--m must be positive");
    PowerKernel k0 = make_kernel(kf, 128);
    const int bits = c.bits ? c.bits : precision_policy(k0, M);
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    PowerKernel k = make_kernel(kf, bits);
    RemezConfig cfg;
    cfg.bits = bits;
    cfg.mds = mds;
    RemezResult rr = remez(k, M, cfg);
    KernelEvaluator f(k, 2, ctx);
    ScanResult sc = max_error_scan(rr.expsum, f, ctx);

    json meta = base_meta("best-expsum", bits);
    meta["kernel"] = kernel_meta(kf, M);
    meta["mds"] = rr.mds;
    meta["level"] = rr.level.exact_str();
    meta["iterations"] = rr.iterations;
    meta["spread"] = rr.spread();
    meta["max_abs_error"] = sc.max_abs.exact_str();
    meta["x_at_max"] = sc.x_at_max.exact_str();
    write_table(expsum_table(rr.expsum, f_at_zero(k, 0, ctx)), spec_for(c, c.out, bits), meta);
    if (!alt.empty()) {
        Table t{{"i", "x", "E"}, {}};
        for (std::size_t i = 0; i < rr.alternation_x.size(); ++i)
            t.add({static_cast<long>(i), rr.alternation_x[i], rr.alternation_e[i]});
        write_table(t, spec_for(c, alt, bits), meta);
    }
    if (!curve.empty()) write_table(curve_table(rr.expsum, f, sc, nullptr), spec_for(c, curve, bits), meta);
    return 0;
}

int cmd_phi_sample(const Common& c, const std::string& rs, int points)
{
    if (points < 2) throw ArgumentError("--points must be at least 2");
    const int bits = c.bits ? c.bits : 128;
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    Real r = parse_real(rs);
    Transform phi(TransformKind::Phi, r, ctx);
    Table t{{"u", "phi", "dphi"}, {}};
    for (int i = 0; i < points; ++i) {
        Real u = Real(2 * i - (points - 1)) / (points - 1);
        t.add({u, phi.eval(u), phi.deriv(u)});
    }
    json meta = base_meta("phi-sample", bits);
    meta["r"] = rs;
    write_table(t, spec_for(c, c.out, bits), meta);
    return 0;
}

int cmd_basis_sample(const Common& c, const std::string& rs, const std::string& kind, int nmax, int per_decade)
{
    if (nmax < 0) throw ArgumentError("--nmax must be nonnegative");
    const int bits = c.bits ? c.bits : 128;
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    Real r = parse_real(rs);
    Transform psi(parse_transform(kind), r, ctx);
    BasisEvaluator ev(psi, nmax, default_basis_tol(), ctx);
    const Real rho = psi.rho_hat();
    Vec xs = log_grid(Real(1) / 100, 1000 / r, per_decade);
    std::vector<Vec> vals(xs.size());
    parallel_for(static_cast<int>(xs.size()), [&](int i) { vals[i] = ev.eval_all(xs[i]); });
    Table t{{"x", "n", "chi", "scaled"}, {}};
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (int n = 0; n <= nmax; ++n) t.add({xs[i], static_cast<long>(n), vals[i][n], pow(rho, n) * vals[i][n]});
    json meta = base_meta("basis-sample", bits);
    meta["r"] = rs;
    meta["transform"] = kind;
    meta["basis_points"] = ev.points();
    write_table(t, spec_for(c, c.out, bits), meta);
    return 0;
}

int cmd_emh_scan(const Common& c, const KernelFlags& kf, int Mmax, int points, const std::string& route_s, int mds)
{
    if (Mmax < 1) throw ArgumentError("--m must be positive");
    if (points < 2) throw ArgumentError("--points must be at least 2");
    EmhRoute route = route_s == "gauss" ? EmhRoute::Gauss : route_s == "det" ? EmhRoute::Det : EmhRoute::Inverse;
    const int bits = c.bits ? c.bits : precision_policy(make_kernel(kf, 128), Mmax);
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    PowerKernel k = make_kernel(kf, bits);
    const Real hstar = solve_hr(k.a / k.b, ctx) / k.b;
    const Real f0 = f_at_zero(k, 0, ctx);
    // h from hstar/16 to 16 hstar, log spaced
    Vec hs(points);
    for (int i = 0; i < points; ++i) hs[i] = hstar * exp(log(Real(16)) * (Real(2 * i) / (points - 1) - 1));
    std::vector<std::vector<Cell>> rows(static_cast<std::size_t>(Mmax) * points);
    parallel_for(static_cast<int>(rows.size()), [&](int j) {
        int M = j / points + 1;
        const Real& h = hs[j % points];
        Real e = emh(k, M, h, route, ctx, mds);
        rows[j] = {Cell(static_cast<long>(M)), Cell(h), Cell(e / f0), Cell(eh_bound(k.a, k.b, M, h))};
    });
    Table t{{"M", "h", "emh_rel", "bound"}, {}};
    for (auto& row : rows) t.add(std::move(row));
    json meta = base_meta("emh-scan", bits);
    meta["kernel"] = kernel_meta(kf, Mmax);
    meta["route"] = route_s;
    meta["h_star"] = hstar.exact_str();
    write_table(t, spec_for(c, c.out, bits), meta);
    return 0;
}

int cmd_mre_scan(const Common& c, const KernelFlags& kf, int M, const std::vector<std::string>& kinds,
                 const std::vector<int>& mds_list)
{
    if (M < 1) throw ArgumentError("--m must be positive");
    const int bits = c.bits ? c.bits : precision_policy(make_kernel(kf, 128), M);
    PrecisionContext ctx(bits);
    PrecisionScope ps(bits);
    PowerKernel k = make_kernel(kf, bits);
    const Real h = solve_hr(k.a / k.b, ctx) / k.b;
    std::vector<TransformKind> ks;
    for (const auto& s : kinds) ks.push_back(parse_transform(s));
    if (ks.empty()) ks.assign(std::begin(kAllTransforms), std::end(kAllTransforms));
    Table t{{"kind", "mds", "mre"}, {}};
    for (TransformKind kind : ks) {
        for (int mds : mds_list) {
            if (mds < M) throw ArgumentError("--mds values must be at least M");
            Real v;
            try {
                ExpSum coarse = init_exchange(k, M, h, mds, ctx, kind);
                ExpSum fine = init_exchange(k, M, h, 2 * mds, ctx, kind);
                v = mre(coarse, fine);
            } catch (const NumericalError&) {
                mpfr_set_nan(v.get());
            }
            t.add({to_string(kind), static_cast<long>(mds), v});
        }
    }
    json meta = base_meta("mre-scan", bits);
    meta["kernel"] = kernel_meta(kf, M);
    write_table(t, spec_for(c, c.out, bits), meta);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"expsumkit: exponential sum approximations of finite Laplace transforms"};
    app.require_subcommand(1);

    Common c;
    KernelFlags kf;
    std::vector<std::string> rlist = default_r_list(), kinds;
    std::string r1 = "0.5", kind = "phi", curve, alt, route = "inverse";
    int M = 4, mds = 0, points = 201, h_points = 64, nmax = 5, per_decade = 32, terms = 0;
    std::vector<int> mds_list{24, 48, 96, 192, 384};

    auto* rh = app.add_subcommand("rhohat-table", "rho_hat of every transform over a list of r");
    add_common(rh, c);
    rh->add_option("--r", rlist, "values of r (accepts 2^k)")->delimiter(',');
    rh->add_option("--transform", kinds, "phi|exp|p1|p2|r01")->delimiter(',');

    auto* hr = app.add_subcommand("hr-table", "h_r and the derived bound factors");
    add_common(hr, c);
    hr->add_option("--r", rlist, "values of r (accepts 2^k)")->delimiter(',');

    auto* ge = app.add_subcommand("gauss-expsum", "Gaussian quadrature exponential sum");
    add_common(ge, c);
    add_kernel(ge, kf);
    ge->add_option("--m", M, "number of terms");
    ge->add_option("--transform", kind, "phi|exp|p1|p2|r01");
    ge->add_option("--mds", mds, "discretization size M_DS");
    ge->add_option("--curve", curve, "also write the error curve here");
    ge->add_option("--expansion-terms", terms, "add the partial sum over n = 2M..2M+terms-1 to the curve");

    auto* be = app.add_subcommand("best-expsum", "minimax exponential sum by the Remez algorithm");
    add_common(be, c);
    add_kernel(be, kf);
    be->add_option("--m", M, "number of terms");
    be->add_option("--mds", mds, "discretization size for the initial rule");
    be->add_option("--curve", curve, "also write the error curve here");
    be->add_option("--alt-out", alt, "write the alternation points here");

    auto* ps = app.add_subcommand("phi-sample", "Phi_r and its derivative on [-1,1]");
    add_common(ps, c);
    ps->add_option("--r", r1, "r (accepts 2^k)");
    ps->add_option("--points", points, "number of equispaced samples");

    auto* bs = app.add_subcommand("basis-sample", "basis functions chi_n on a log grid");
    add_common(bs, c);
    bs->add_option("--r", r1, "r (accepts 2^k)");
    bs->add_option("--transform", kind, "phi|exp|p1|p2|r01");
    bs->add_option("--nmax", nmax, "largest n");
    bs->add_option("--per-decade", per_decade, "grid density");

    auto* es = app.add_subcommand("emh-scan", "E_{M,h}/f(0) and its bound over an h grid");
    add_common(es, c);
    add_kernel(es, kf);
    es->add_option("--m", M, "largest M");
    es->add_option("--points", h_points, "h grid size");
    es->add_option("--route", route, "gauss|det|inverse")->check(CLI::IsMember({"gauss", "det", "inverse"}));
    es->add_option("--mds", mds, "discretization size for the gauss route");

    auto* ms = app.add_subcommand("mre-scan", "convergence of the initial rule in M_DS");
    add_common(ms, c);
    add_kernel(ms, kf);
    ms->add_option("--m", M, "number of terms");
    ms->add_option("--transform", kinds, "phi|exp|p1|p2|r01")->delimiter(',');
    ms->add_option("--mds", mds_list, "M_DS values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c.bits && c.bits < 64) throw ArgumentError("--bits must be at least 64");
        if (*rh) return cmd_rhohat(c, rlist, kinds);
        if (*hr) return cmd_hr(c, rlist);
        if (*ge) return cmd_gauss(c, kf, M, kind, mds, curve, terms);
        if (*be) return cmd_best(c, kf, M, mds, curve, alt);
        if (*ps) return cmd_phi_sample(c, r1, points);
        if (*bs) return cmd_basis_sample(c, r1, kind, nmax, per_decade);
        if (*es) return cmd_emh_scan(c, kf, M, h_points, route, mds);
        if (*ms) return cmd_mre_scan(c, kf, M, kinds, mds_list);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
