#include "sigmabilap/cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sigmabilap/cone_exponents.hpp"
#include "sigmabilap/corner_spectrum.hpp"
#include "sigmabilap/errors.hpp"
#include "sigmabilap/format.hpp"
#include "sigmabilap/grid.hpp"
#include "sigmabilap/kernel1d.hpp"
#include "sigmabilap/twostep_solver.hpp"

namespace sigmabilap::cli {

namespace {

constexpr double pi = std::numbers::pi;

struct RegionArgs {
    int na = 200, nk = 200;
    double amin = 0.0, amax = pi, kmin = -12.0, kmax = -0.05, eps = 1e-3;
    bool alpha_closed = false;
    unsigned threads = 0;
};

struct CornerArgs {
    double alpha = 0.0, kappa = 0.0, eps = 1e-3, tol = 1e-10;
    std::optional<double> eta;
    bool profile = false;
};

struct KernelArgs {
    std::optional<double> t, a, b, delta, kappa;
    std::optional<int> sample;
    double tol = 1e-8;
};

struct SolveArgs {
    std::string domain_file, domain = "lshape", sigma_file, rhs = "generic", field = "v";
    int n = 64, corner = 0;
    double sigma = 1.0;
    bool correct = true;
};

struct ConeArgs {
    std::optional<double> alpha, mu;
    int d = 3, l = 1;
    double beta = 0.0;
    bool critical = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionViolation("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Pulls --config out of args and splices its key=value pairs in right after
// the subcommand name, so explicit flags (which come later) win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::vector<std::string> injected;
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw PreconditionViolation("--config needs a path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
            continue;
        }
        std::istringstream in(read_file(path));
        for (const auto& [k, v] : parse_key_values(in)) injected.push_back("--" + k + "=" + v);
    }
    std::vector<std::string> out{args.empty() ? std::string("sigmabilap") : args[0]};
    std::size_t i = 0;
    while (i < rest.size() && !rest[i].empty() && rest[i][0] == '-') out.push_back(rest[i++]);
    if (i < rest.size()) out.push_back(rest[i++]);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(i), rest.end());
    return out;
}

void emit_region_map(const RegionArgs& a, std::ostream& os) {
    RegionMapSpec spec;
    spec.n_alpha = a.na;
    spec.n_kappa = a.nk;
    spec.alpha_min = a.amin;
    spec.alpha_max = a.amax;
    spec.kappa_min = a.kmin;
    spec.kappa_max = a.kmax;
    spec.alpha_open = !a.alpha_closed;
    spec.eps_boundary = a.eps;
    spec.threads = a.threads;
    write_region_csv(os, region_map(spec));
}

void emit_eta0(const CornerArgs& a, std::ostream& os) {
    const CornerProblem p{a.alpha, a.kappa};
    p.validate();
    RootScanOptions opts;
    opts.root_tol = a.tol;
    const auto r = find_eta0(p, opts);
    os << "alpha,kappa,eta0,residual,bracket_lo,bracket_hi,sign_changes\n";
    os << fmt17(a.alpha) << ',' << fmt17(a.kappa) << ',';
    if (r)
        os << fmt17(r->eta0) << ',' << fmt17(r->residual) << ',' << fmt17(r->bracket.first) << ','
           << fmt17(r->bracket.second) << ',' << r->sign_changes_found << '\n';
    else
        os << ",,,,0\n";
}

void emit_classify(const CornerArgs& a, std::ostream& os) {
    const CornerProblem p{a.alpha, a.kappa};
    p.validate();
    const RegionReport r = classify_region(p, a.eps);
    os << "alpha,kappa,g,ell_minus,ell_plus,membership\n"
       << fmt17(a.alpha) << ',' << fmt17(a.kappa) << ',' << fmt17(r.g_value) << ','
       << fmt17(r.ell_minus) << ',' << fmt17(r.ell_plus) << ',' << to_string(r.membership) << '\n';
}

void emit_corner_det(const CornerArgs& a, std::ostream& os) {
    const CornerProblem p{a.alpha, a.kappa};
    p.validate();
    double eta = 0.0;
    if (a.eta) {
        eta = *a.eta;
    } else {
        const auto r = find_eta0(p);
        if (!r) throw NumericalFailure("no singular exponent on Re lambda = 1 for these inputs");
        eta = r->eta0;
    }
    const cplx lambda(1.0, eta);
    const cplx det = transmission_determinant(p, lambda);
    os << "alpha,kappa,eta,det_re,det_im,normalized_det";
    if (a.profile) os << ",A_re,A_im,B_re,B_im,C_re,C_im,D_re,D_im,interface_residual";
    os << '\n'
       << fmt17(a.alpha) << ',' << fmt17(a.kappa) << ',' << fmt17(eta) << ',' << fmt17(det.real())
       << ',' << fmt17(det.imag()) << ',' << fmt17(normalized_determinant(p, lambda));
    if (a.profile) {
        const AngularProfile ang = angular_profile(p, lambda);
        for (const cplx& c : ang.coeffs) os << ',' << fmt17(c.real()) << ',' << fmt17(c.imag());
        os << ',' << fmt17(interface_residual(ang));
    }
    os << '\n';
}

void emit_kernel1d(const KernelArgs& a, std::ostream& os) {
    KernelDomain dom;
    ContrastRoots closed;
    const int chosen = int(a.t.has_value()) + int(a.delta.has_value()) + int(a.a.has_value() || a.b.has_value());
    if (chosen != 1) throw PreconditionViolation("give exactly one of --t, --delta or --a/--b");
    if (a.delta) {
        dom = ThreeSegmentDomain{*a.delta};
        closed = critical_contrasts_three_segment(*a.delta);
    } else {
        TwoSegmentDomain two;
        if (a.t) {
            if (!(*a.t < 0.0)) throw PreconditionViolation("--t must be negative");
            two = {-1.0, -*a.t};
        } else {
            if (!a.a || !a.b) throw PreconditionViolation("--a and --b go together");
            two = {*a.a, *a.b};
        }
        if (!(two.a < 0.0 && two.b > 0.0)) throw PreconditionViolation("need a < 0 < b");
        dom = two;
        closed = critical_contrasts_two_segment(two.b / two.a);
    }
    if (a.sample || a.kappa) {
        if (a.sample && a.kappa) throw PreconditionViolation("give --sample or --kappa, not both");
        double kappa = 0.0;
        if (a.sample) {
            if (*a.sample < 0 || *a.sample >= static_cast<int>(closed.roots.size()))
                throw PreconditionViolation("--sample index out of range");
            kappa = closed.roots[*a.sample];
        } else {
            kappa = *a.kappa;
        }
        const auto v = kernel_basis(dom, kappa, a.tol);
        if (!v) throw NumericalFailure("no kernel element at kappa = " + fmt17(kappa));
        os << "x,v,v1,v2\n";
        for (const KernelSample& s : sample_kernel(*v))
            os << fmt17(s.x) << ',' << fmt17(s.v) << ',' << fmt17(s.v1) << ',' << fmt17(s.v2) << '\n';
        return;
    }
    const ContrastRoots scan = scan_critical_contrasts(dom);
    os << "kappa,source\n";
    for (double r : closed.roots) os << fmt17(r) << ",ClosedForm\n";
    for (double r : scan.roots) os << fmt17(r) << ",DeterminantScan\n";
}

NodeField load_rhs(const Grid2D& g, const std::string& spec) {
    if (spec == "one") return g.interpolate([](double, double) { return 1.0; });
    if (spec == "sin")
        return g.interpolate([](double x, double y) {
            return 4.0 * std::pow(pi, 4) * std::sin(pi * x) * std::sin(pi * y);
        });
    if (spec == "generic")
        return g.interpolate([](double x, double y) { return 1.0 + x - 0.5 * y + x * y; });
    std::istringstream in(read_file(spec));
    NodeField f = g.zeros();
    std::string line;
    while (std::getline(in, line)) {
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        double x, y, v;
        if (!(ls >> x >> y >> v)) continue;  // header or blank
        const double fi = (x - g.x0()) / g.h(), fj = (y - g.y0()) / g.h();
        const long i = std::lround(fi), j = std::lround(fj);
        if (std::abs(fi - i) > 1e-6 || std::abs(fj - j) > 1e-6 || i < 0 || j < 0 || i > g.nx() ||
            j > g.ny())
            throw PreconditionViolation("rhs point is not a grid node: " + line);
        const int k = g.node_index(static_cast<int>(i), static_cast<int>(j));
        if (g.kind(k) == NodeKind::Interior) f(k) = v;
    }
    return f;
}

void emit_solve(const SolveArgs& a, std::ostream& os, std::ostream& err) {
    Grid2D grid = [&] {
        if (!a.domain_file.empty()) {
            std::istringstream in(read_file(a.domain_file));
            return build_domain(parse_key_values(in));
        }
        std::multimap<std::string, std::string> kv{{"domain", a.domain}, {"n", std::to_string(a.n)}};
        return build_domain(kv);
    }();
    SigmaField sigma = SigmaField::constant(grid, a.sigma);
    if (!a.sigma_file.empty()) {
        std::istringstream in(read_file(a.sigma_file));
        sigma = read_sigma_file(in, grid);
    }
    sigma.validate(grid);
    const NodeField f = load_rhs(grid, a.rhs);
    if ((a.field == "zeta" || a.field == "psi") &&
        (a.corner < 0 || a.corner >= static_cast<int>(grid.corners().size())))
        throw PreconditionViolation("--corner index out of range for this domain");

    const PoissonSolver solver(grid);
    std::vector<CornerSingularity> sings = compute_all_zeta(solver);
    for (auto& s : sings) attach_sigma(solver, sigma, s);
    const FieldSolution sol = a.correct ? corrected_two_step_solve(solver, sigma, f, sings)
                                        : two_step_solve(solver, sigma, f);
    const Pairing pair(grid);
    const NodeField g = sigma.inverse_at_nodes(grid).cwiseProduct(sol.p);
    err << "residual_p=" << fmt17(sol.residual_p) << " residual_v=" << fmt17(sol.residual_v);
    for (const auto& s : sings)
        err << " c" << s.corner << '=' << fmt17(singular_coefficient(pair, g, s.zeta));
    err << '\n';

    const NodeField* field = nullptr;
    if (a.field == "v")
        field = &sol.v;
    else if (a.field == "p")
        field = &sol.p;
    else if (a.field == "zeta")
        field = &sings[a.corner].zeta;
    else if (a.field == "psi")
        field = &sings[a.corner].psi;
    else
        throw PreconditionViolation("--field must be v, p, zeta or psi");
    os << "x,y,value\n";
    for (int k : grid.interior_nodes()) {
        const Point pt = grid.node(k);
        os << fmt17(pt.x) << ',' << fmt17(pt.y) << ',' << fmt17((*field)(k)) << '\n';
    }
}

void emit_cone(const ConeArgs& a, std::ostream& os) {
    if (a.d < 2) throw PreconditionViolation("--d must be at least 2");
    if (a.l < 1) throw PreconditionViolation("--l must be at least 1");
    std::optional<double> alpha = a.alpha;
    double mu = 0.0;
    if (a.critical) {
        if (a.alpha || a.mu) throw PreconditionViolation("--critical excludes --alpha and --mu");
        alpha = critical_aperture();
    }
    if (a.mu) {
        if (!(*a.mu > 0.0)) throw PreconditionViolation("--mu must be positive");
        mu = *a.mu;
    } else {
        if (!alpha) throw PreconditionViolation("give --alpha, --mu or --critical");
        if (a.d != 3) throw PreconditionViolation("cap eigenvalues are computed for d = 3 only");
        if (!(*alpha > 0.0 && *alpha <= 0.9 * pi))
            throw PreconditionViolation("--alpha must lie in (0, 0.9 pi]");
        mu = cap_mu1(*alpha);
    }
    const double lp = lambda_pm(a.d, mu).second;
    os << "alpha,mu1,lambda_plus,classification\n";
    os << (alpha ? fmt17(*alpha) : std::string()) << ',' << fmt17(mu) << ',' << fmt17(lp) << ','
       << to_string(fredholm_classify({a.beta, a.l, a.d}, lp)) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sign-changing bilaplacian toolkit"};
    app.name(raw_args.empty() ? "sigmabilap" : raw_args[0]);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.add_option("--config", "key=value file applied before the command-line flags");
    std::string output;

    auto add_output = [&](CLI::App* sc) {
        sc->add_option("-o,--output", output, "output file (default stdout)");
        sc->add_option("--config", "key=value file applied before the command-line flags");
    };

    RegionArgs ra;
    auto* region = app.add_subcommand("region-map", "membership and singular exponents over a grid");
    region->add_option("--na", ra.na, "alpha samples")->check(CLI::PositiveNumber);
    region->add_option("--nk", ra.nk, "kappa samples")->check(CLI::PositiveNumber);
    region->add_option("--amin", ra.amin, "alpha lower end");
    region->add_option("--amax", ra.amax, "alpha upper end");
    region->add_option("--kmin", ra.kmin, "kappa lower end");
    region->add_option("--kmax", ra.kmax, "kappa upper end");
    region->add_option("--eps", ra.eps, "boundary tolerance on g")->check(CLI::PositiveNumber);
    region->add_flag("--alpha-closed", ra.alpha_closed, "include the alpha endpoints");
    region->add_option("--threads", ra.threads, "worker threads (0: all cores)");
    add_output(region);

    CornerArgs ca;
    auto* eta0 = app.add_subcommand("eta0", "singular exponent 1 + i eta0");
    eta0->add_option("--alpha", ca.alpha, "aperture in (0, pi)")->required();
    eta0->add_option("--kappa", ca.kappa, "negative contrast")->required();
    eta0->add_option("--tol", ca.tol, "root tolerance on |h|")->check(CLI::PositiveNumber);
    add_output(eta0);

    auto* det = app.add_subcommand("corner-det", "4x4 transmission determinant on Re lambda = 1");
    det->add_option("--alpha", ca.alpha, "aperture in (0, pi)")->required();
    det->add_option("--kappa", ca.kappa, "negative contrast")->required();
    det->add_option("--eta", ca.eta, "imaginary part (default: eta0)");
    det->add_flag("--profile", ca.profile, "also print the null vector (A, B, C, D)");
    add_output(det);

    auto* cls = app.add_subcommand("classify", "region membership of (alpha, kappa)");
    cls->add_option("--alpha", ca.alpha, "aperture in (0, pi)")->required();
    cls->add_option("--kappa", ca.kappa, "negative contrast")->required();
    cls->add_option("--eps", ca.eps, "boundary tolerance on g")->check(CLI::PositiveNumber);
    add_output(cls);

    KernelArgs ka;
    auto* k1 = app.add_subcommand("kernel1d", "critical contrasts of the 1D examples");
    k1->add_option("--t", ka.t, "ratio b/a < 0 (a = -1)");
    k1->add_option("--a", ka.a, "left end");
    k1->add_option("--b", ka.b, "right end");
    k1->add_option("--delta", ka.delta, "three-segment half width in (0, 1)");
    k1->add_option("--sample", ka.sample, "sample the kernel at the i-th closed-form contrast");
    k1->add_option("--kappa", ka.kappa, "sample the kernel at this contrast");
    k1->add_option("--tol", ka.tol, "singularity tolerance")->check(CLI::PositiveNumber);
    add_output(k1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "two-step solve on a grid-aligned domain");
    solve->add_option("--domain-file", sa.domain_file, "key=value domain description");
    solve->add_option("--domain", sa.domain, "rectangle, lshape or notched");
    solve->add_option("--n", sa.n, "cells per side")->check(CLI::PositiveNumber);
    solve->add_option("--sigma", sa.sigma, "constant sigma");
    solve->add_option("--sigma-file", sa.sigma_file, "cellwise sigma values");
    solve->add_option("--rhs", sa.rhs, "one, sin, generic or an x,y,value file");
    solve->add_flag("--correct,!--no-correct", sa.correct, "apply the singular-function correction");
    solve->add_option("--field", sa.field, "v, p, zeta or psi");
    solve->add_option("--corner", sa.corner, "corner index for zeta/psi");
    add_output(solve);

    ConeArgs co;
    auto* cone = app.add_subcommand("cone", "conical tip exponent and Fredholm class");
    cone->add_option("--alpha", co.alpha, "cap half-aperture");
    cone->add_option("--mu", co.mu, "first Laplace-Beltrami eigenvalue");
    cone->add_option("--d", co.d, "dimension");
    cone->add_option("--beta", co.beta, "weight");
    cone->add_option("--l", co.l, "regularity index");
    cone->add_flag("--critical", co.critical, "use the critical aperture");
    add_output(cone);

    try {
        const std::vector<std::string> args = expand_config(raw_args);
        std::vector<const char*> argv;
        for (const auto& s : args) argv.push_back(s.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    std::ostringstream buf;
    try {
        if (region->parsed())
            emit_region_map(ra, buf);
        else if (eta0->parsed())
            emit_eta0(ca, buf);
        else if (det->parsed())
            emit_corner_det(ca, buf);
        else if (cls->parsed())
            emit_classify(ca, buf);
        else if (k1->parsed())
            emit_kernel1d(ka, buf);
        else if (solve->parsed())
            emit_solve(sa, buf, err);
        else if (cone->parsed())
            emit_cone(co, buf);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }

    if (output.empty()) {
        out << buf.str();
    } else {
        std::ofstream f(output, std::ios::binary);
        if (!f) {
            err << "error: cannot write " << output << '\n';
            return kUsage;
        }
        f << buf.str();
    }
    return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace sigmabilap::cli
