// skewlab command-line driver.
//
// Exit status: 0 success, 1 input or validation error, 2 inconclusive classification.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "skewlab/circle_maps.hpp"
#include "skewlab/classify.hpp"
#include "skewlab/error.hpp"
#include "skewlab/hhu.hpp"
#include "skewlab/holonomy.hpp"
#include "skewlab/plante.hpp"
#include "skewlab/report.hpp"
#include "skewlab/skew_system.hpp"

namespace {

using namespace skewlab;

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = std::numbers::pi;

struct RunConfig {
    std::string command;
    std::string input;
    std::string out;
    std::int64_t iters = -1;
    int depth = -1;
    double tol = -1.0;
    std::uint64_t seed = 1;
    int grid = -1;
    std::string variant = "cos";
    std::int64_t orbits = 10;
    std::string direction = "forward";
    int freq = 0;

    std::int64_t iters_or(std::int64_t d) const { return iters > 0 ? iters : d; }
    int depth_or(int d) const { return depth > 0 ? depth : d; }
    double tol_or(double d) const { return tol > 0.0 ? tol : d; }
    int grid_or(int d) const { return grid > 0 ? grid : d; }
};

using Files = std::vector<std::pair<std::string, std::string>>;

void provenance(Report& r, const RunConfig& c, std::int64_t iters, int depth, double tol, int grid) {
    r.section("provenance");
    r.set("tool", "skewlab");
    r.set("version", kVersion);
    r.set("command", c.command);
    r.set("input", c.input.empty() ? std::string("-") : c.input);
    r.set("iters", iters);
    r.set("depth", depth);
    r.set("tol", tol);
    r.set("seed", c.seed);
    r.set("grid", grid);
    if (c.command == "hhu") r.set("variant", c.variant);
    if (c.command == "decompose" || c.command == "orbit") r.set("direction", c.direction);
    if (c.command == "decompose") r.set("orbits", c.orbits);
}

void emit(const RunConfig& c, const Report& r, const Files& files) {
    const std::string text = r.str();
    std::cout << text;
    if (c.out.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(c.out);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream f(fs::path(c.out) / name, std::ios::binary);
        if (!f) throw ParseError("cannot write " + (fs::path(c.out) / name).string());
        f << body;
    };
    write(c.command + ".report", text);
    for (const auto& [name, body] : files) write(name, body);
}

std::string intervals(const std::vector<HeightInterval>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += "[" + format_real(v[i].lo) + ":" + format_real(v[i].hi) + "]";
    }
    return s.empty() ? "none" : s;
}

Direction parse_direction(const std::string& s) {
    if (s == "forward") return Direction::Forward;
    if (s == "backward") return Direction::Backward;
    throw ParseError("direction must be forward or backward");
}

void system_section(Report& r, const SkewProductSystem& sys) {
    r.section("system");
    r.set("dim", sys.dim());
    r.set("phase_space", sys.phase_space() == PhaseSpace::MappingTorus ? "mapping_torus" : "torus_product");
    r.set("theta", sys.fiber().theta);
    r.set("terms", static_cast<std::int64_t>(sys.fiber().terms.size()));
    r.set("conjugator_terms", static_cast<std::int64_t>(sys.fiber().conjugator.size()));
    r.set("min_derivative", sys.bounds().min_derivative);
    r.set("max_derivative", sys.bounds().max_derivative);
}

void classification_sections(Report& r, const ClassificationReport& c) {
    r.section("classification");
    r.set("case", to_string(c.tag));
    if (c.tag == CaseTag::JointlyIntegrable) r.set("theta", c.theta());
    r.set("rotation_rho", c.rotation.rho);
    r.set("rotation_error_bound", c.rotation.error_bound);
    r.set("rational", c.rotation.rational);
    if (c.rotation.rational) {
        r.set("p", c.rotation.p);
        r.set("q", c.rotation.q);
    }
    r.set("irrational_case", c.irrational_case);
    r.set("n", c.n);
    r.set("k", intervals(c.k));
    r.set("u", intervals(c.u));
    r.set("indeterminate_bands", intervals(c.indeterminate_bands));
    r.set("indeterminate_fraction", c.indeterminate_fraction);
    r.set("generator_max_displacement", c.generator_max_displacement);
    r.set("min_displacement", c.min_displacement);
    r.set("max_displacement", c.max_displacement);
    r.set("tail_bound", c.tail_bound);
    r.set("k_invariance_residual", c.k_invariance_residual);
    r.set("period_residual", c.period_residual);
    if (c.semiconjugacy) r.set("semiconjugacy_defect", c.semiconjugacy->defect);
    for (std::size_t i = 0; i < c.intervals.size(); ++i) {
        const auto& iv = c.intervals[i];
        r.section("interval." + std::to_string(i));
        r.set("support", intervals({iv.interval}));
        r.set("sub_case", to_string(iv.sub_case));
        if (iv.fixed_height) {
            r.set("fixed_height", *iv.fixed_height);
            r.set("lambda", iv.lambda);
        }
        if (iv.sub_case == IntervalCase::AttractorRepeller) r.set("escape_distance", iv.escape_distance);
    }
}

ClassifyOptions classify_options(const RunConfig& c) {
    ClassifyOptions o;
    o.depth = c.depth_or(kDefaultDepth);
    o.tol = c.tol_or(kFixedTolerance);
    o.grid = c.grid_or(256);
    o.rotation_iters = c.iters_or(1'000'000);
    return o;
}

int cmd_classify(const RunConfig& c) {
    const auto sys = load_system(c.input);
    const auto o = classify_options(c);
    Report r;
    provenance(r, c, o.rotation_iters, o.depth, o.tol, o.grid);
    system_section(r, sys);
    try {
        const auto rep = classify(sys, o);
        classification_sections(r, rep);
        emit(c, r, {{"displacement.csv", csv_table(rep.heights, rep.displacement)}});
        return 0;
    } catch (const InconclusiveError& e) {
        r.section("classification");
        r.set("case", "inconclusive");
        r.set("reason", e.what());
        emit(c, r, {});
        std::cerr << "inconclusive: " << e.what() << '\n';
        return 2;
    }
}

int cmd_decompose(const RunConfig& c) {
    const auto sys = load_system(c.input);
    auto co = classify_options(c);
    co.rotation_iters = 1'000'000;
    DecomposeOptions o;
    o.n_orbits = c.orbits;
    o.n_iters = c.iters_or(100'000);
    o.seed = c.seed;
    o.quadrature = c.grid_or(12);
    o.direction = parse_direction(c.direction);
    Report r;
    provenance(r, c, o.n_iters, co.depth, co.tol, o.quadrature);
    system_section(r, sys);
    ClassificationReport rep;
    try {
        rep = classify(sys, co);
    } catch (const InconclusiveError& e) {
        r.section("classification");
        r.set("case", "inconclusive");
        r.set("reason", e.what());
        emit(c, r, {});
        std::cerr << "inconclusive: " << e.what() << '\n';
        return 2;
    }
    classification_sections(r, rep);
    const auto tests = c.freq > 0 ? trig_test_family(sys.dim(), c.freq) : default_test_functions(sys.dim());
    const auto d = decompose(sys, rep, tests, o);
    r.section("decomposition");
    r.set("n", d.n);
    r.set("components", static_cast<std::int64_t>(d.components.size()));
    std::string names;
    for (std::size_t i = 0; i < tests.size(); ++i) names += (i ? ", " : "") + tests[i].name(sys.dim());
    r.set("tests", names);
    std::string csv = "component,label,test,mean,dispersion,band,integral\n";
    char buf[256];
    for (std::size_t k = 0; k < d.components.size(); ++k) {
        const auto& comp = d.components[k];
        r.section("component." + std::to_string(k));
        r.set("label", comp.label);
        r.set("support", intervals({comp.support}));
        r.set("is_interval", comp.is_interval);
        r.set("ergodic_signature", comp.ergodic_signature);
        r.set("mean", comp.mean);
        r.set("dispersion", comp.dispersion);
        r.set("band", comp.band);
        r.set("integral", comp.integral);
        for (std::size_t i = 0; i < tests.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.17g,%.17g,%.17g,%.17g\n", k, comp.label.c_str(),
                          tests[i].name(sys.dim()).c_str(), comp.mean[i], comp.dispersion[i], comp.band[i],
                          comp.integral[i]);
            csv += buf;
        }
    }
    emit(c, r, {{"birkhoff.csv", csv}});
    return 0;
}

int cmd_rotnum(const RunConfig& c) {
    const auto map = load_circle_map(c.input);
    const auto iters = c.iters_or(1'000'000);
    const int grid = c.grid_or(MonotoneCircleLift::kDefaultGrid);
    const CircleFn f = [&map](double x) { return map(x); };
    const auto rot = rotation_number(f, iters);
    Report r;
    provenance(r, c, iters, 0, 0.0, grid);
    r.section("rotation");
    r.set("rho", rot.rho);
    r.set("error_bound", rot.error_bound);
    r.set("rational", rot.rational);
    if (rot.rational) {
        r.set("p", rot.p);
        r.set("q", rot.q);
        r.set("periodic_point", rot.periodic_point);
    }
    r.set("value", rot.value());
    const auto lift = MonotoneCircleLift::from_function(f, grid);
    const auto mu = invariant_measure(f, iters, grid);
    r.section("measure");
    r.set("atomic", mu.atomic());
    if (mu.atomic()) r.set("atoms", mu.atoms);
    r.set("invariance_residual", invariance_residual(lift, mu));
    Files files{{"lift.csv", lift_csv(lift)}, {"measure.csv", measure_csv(mu)}};
    if (!rot.rational) {
        const auto s = semiconjugacy_to_rotation(lift, iters, grid);
        r.section("semiconjugacy");
        r.set("defect", s.defect);
        files.emplace_back("semiconjugacy.csv", map_csv(s.p));
    }
    emit(c, r, files);
    return 0;
}

int cmd_holonomy(const RunConfig& c) {
    const auto sys = load_system(c.input);
    const int depth = c.depth_or(kDefaultDepth);
    const int grid = c.grid_or(256);
    const double tol = c.tol_or(kFixedTolerance);
    Report r;
    provenance(r, c, 0, depth, tol, grid);
    system_section(r, sys);
    const auto gens = generator_loops(sys.base());
    Files files;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const SuLoopMap g(sys, gens[i], depth);
        std::vector<double> x(static_cast<std::size_t>(grid)), y(x.size());
        double worst = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] = static_cast<double>(k) / grid;
            y[k] = g(x[k]);
            worst = std::max(worst, std::abs(y[k] - x[k]));
        }
        const auto cv = gens[i].closing_vector(sys.dim());
        std::string closing;
        for (int d = 0; d < sys.dim(); ++d) closing += (d ? ", " : "") + std::to_string(cv[d]);
        r.section("generator." + std::to_string(i));
        r.set("closing_vector", closing);
        r.set("legs", static_cast<std::int64_t>(gens[i].legs.size()));
        r.set("max_displacement", worst);
        r.set("derivative_at_0", g.derivative(0.0));
        r.set("tail_bound", g.tail_bound());
        r.set("certified", g.tail_bound() < 1e-9);
        files.emplace_back("su_loop_" + std::to_string(i) + ".csv", csv_table(x, y));
    }
    const auto k = detect_compact_classes(sys, gens, grid, tol, depth);
    r.section("compact_classes");
    r.set("k", intervals(k.fixed));
    r.set("indeterminate_bands", intervals(k.indeterminate));
    r.set("min_displacement", k.min_displacement);
    r.set("max_displacement", k.max_displacement);
    r.set("tail_bound", k.tail_bound);
    files.emplace_back("displacement.csv", displacement_csv(k));
    emit(c, r, files);
    return 0;
}

int cmd_plante(const RunConfig& c) {
    const auto action = load_action(c.input);
    const int grid = c.grid_or(1000);
    Report r;
    provenance(r, c, 0, 0, 0.0, grid);
    const auto mu = invariant_measure(action);
    r.section("measure");
    r.set("atomic", mu.atomic);
    if (mu.atomic) r.set("spacing", mu.spacing);
    r.set("invariance_residual", mu.invariance_residual);
    const auto tau = translation_number(action, mu);
    r.section("translation");
    r.set("tau", tau.tau);
    r.set("base_point_spread", tau.base_point_spread);
    const double lambda = conjugation_scaling(action, mu, tau);
    r.section("scaling");
    r.set("lambda", lambda);
    try {
        const auto p = master_semiconjugacy(action, grid);
        r.section("semiconjugacy");
        r.set("fixed_point", p.fixed_point);
        r.set("zero_set", intervals({HeightInterval{p.zero_lo, p.zero_hi}}));
        r.set("f_fixed_residual", std::abs(action.f(p.fixed_point) - p.fixed_point));
        r.set("residual_g", p.residual_g);
        r.set("residual_f", p.residual_f);
        emit(c, r, {{"semiconjugacy.csv", semiconjugacy_csv(p)}});
        return 0;
    } catch (const DomainError& e) {
        r.section("semiconjugacy");
        r.set("status", "excluded");
        r.set("reason", e.what());
        emit(c, r, {});
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_hhu(const RunConfig& c) {
    HhuParameters p;
    p.forcing = parse_forcing(c.variant);
    const int grid = c.grid_or(2000);
    const int depth = c.depth_or(400);
    Report r;
    provenance(r, c, 0, depth, 0.0, grid);
    r.section("hhu");
    r.set("variant", to_string(p.forcing));
    r.set("lambda", p.lambda);
    r.set("lambda_identity_residual", std::abs(p.lambda * p.lambda - p.lambda - 1.0));

    const GraphSeries u(p, GraphKind::Unstable, depth), cg(p, GraphKind::Stable, depth);
    const auto ug = build_unstable_graph(p, grid, depth);
    const auto sg = build_stable_graph(p, grid, depth);
    auto extreme = [](const InvariantGraph& g, bool want_max) {
        double best = want_max ? -INFINITY : INFINITY;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            if (g.x[i] <= 0.01 || g.x[i] >= kPi - 0.01) continue;
            best = want_max ? std::max(best, g.slope[i]) : std::min(best, g.slope[i]);
        }
        return best;
    };
    const auto us = refined_slopes(u, kPi - 1e-3, 1e-5);
    const auto cs = refined_slopes(cg, 1e-3, 1e-5);
    r.section("unstable_graph");
    r.set("u0", u(0.0));
    r.set("u0_expected", p.fixed_height(0.0));
    r.set("residual", ug.residual);
    r.set("tail", ug.tail);
    r.set("max_slope_interior", extreme(ug, true));
    r.set("slope_negative", extreme(ug, true) < 0.0);
    r.set("fd_slope_near_pi", us);
    r.set("threshold_pass", us[0] < -50.0 && us[1] < -50.0);
    r.section("stable_graph");
    r.set("residual", sg.residual);
    r.set("tail", sg.tail);
    r.set("min_slope_interior", extreme(sg, false));
    r.set("slope_positive", extreme(sg, false) > 0.0);
    r.set("fd_slope_near_0", cs);
    r.set("threshold_pass", cs[0] > 50.0 && cs[1] > 50.0);
    const auto b = stable_graph_bound(p, sg);
    r.set("box_bound", b.bound);
    r.set("sup_abs", b.sup_abs);
    r.set("box_excess", b.box_excess);
    r.set("bounded", b.passed);
    if (p.forcing == Forcing::SinMinusX) r.set("oddness_residual", oddness_residual(cg, grid));

    const auto sys = build_3d_system(p);
    r.section("system");
    r.set("equivariance_residual", sys.equivariance_residual());
    const auto f0 = sys.fixed_point(0.0), fpi = sys.fixed_point(kPi);
    r.set("fixed_point_0", std::vector<double>(f0.begin(), f0.end()));
    r.set("fixed_point_pi", std::vector<double>(fpi.begin(), fpi.end()));
    const auto cone = cone_check(sys);
    r.section("cone");
    r.set("passed", cone.passed);
    r.set("k_max", 20);
    for (const auto& t : cone.tori) {
        const std::string tag = t.x == 0.0 ? "x0" : "xpi";
        r.set(tag + ".k", t.k);
        r.set(tag + ".norms_at_kmax", std::vector<double>{t.s, t.c, t.u});
    }
    const auto leaves = compact_leaf_check(p);
    r.section("leaves");
    r.set("invariant_tori", leaves.invariant_tori);
    r.set("compact_leaves", leaves.compact_leaves);
    r.set("leaf_range", leaves.leaf_range);
    r.set("graph_leaves_unbounded", leaves.graph_leaves_unbounded);
    emit(c, r,
         {{"u.csv", graph_csv(ug)}, {"c.csv", graph_csv(sg)}, {"leaves.csv", leaf_csv(u, {-1.0, 0.0, 1.0}, 200)}});
    return 0;
}

int cmd_orbit(const RunConfig& c) {
    const auto sys = load_system(c.input);
    const auto iters = c.iters_or(1000);
    if (iters > kMaxSteps) throw DomainError("orbit length exceeds the step cap");
    const auto dir = parse_direction(c.direction);
    const int d = sys.dim();
    SkewPoint p = random_point(c.seed, 0, d);
    Report r;
    provenance(r, c, iters, 0, 0.0, 0);
    system_section(r, sys);
    r.section("orbit");
    auto coords = [d](const SkewPoint& q) {
        const auto v = q.v.to_real(d);
        std::vector<double> out(v.begin(), v.begin() + d);
        out.push_back(q.z);
        return out;
    };
    r.set("start", coords(p));
    std::string csv = d == 3 ? "k,x,y,w,z\n" : "k,x,y,z\n";
    char buf[160];
    const auto tests = default_test_functions(d);
    std::vector<double> sums(tests.size(), 0.0);
    for (std::int64_t k = 0; k <= iters; ++k) {
        if (k > 0) {
            if (dir == Direction::Forward) sys.forward(p);
            else sys.backward(p);
            for (std::size_t i = 0; i < tests.size(); ++i) sums[i] += tests[i](p, d);
        }
        const auto v = p.v.to_real(d);
        if (d == 3) std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(k), v[0], v[1], v[2], p.z);
        else std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(k), v[0], v[1], p.z);
        csv += buf;
    }
    r.set("end", coords(p));
    for (auto& s : sums) s /= static_cast<double>(std::max<std::int64_t>(iters, 1));
    std::string names;
    for (std::size_t i = 0; i < tests.size(); ++i) names += (i ? ", " : "") + tests[i].name(d);
    r.set("tests", names);
    r.set("birkhoff_means", sums);
    emit(c, r, {{"orbit.csv", csv}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skewlab: skew products over toral automorphisms"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    RunConfig cfg;

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
        bool needs_input;
    };
    const Command commands[] = {
        {"classify", "classify a .sys system into the three cases", cmd_classify, true},
        {"decompose", "classify, then estimate the ergodic decomposition by Birkhoff averages", cmd_decompose, true},
        {"rotnum", "rotation number, invariant measure and semiconjugacy of a .map circle map", cmd_rotnum, true},
        {"holonomy", "su-loop maps and compact-class detection for a .sys system", cmd_holonomy, true},
        {"plante", "translation numbers and the semiconjugacy P of a .act line action", cmd_plante, true},
        {"hhu", "invariant graphs, cone check and compact leaves of the T^3 example", cmd_hhu, false},
        {"orbit", "orbit of a seeded random point of a .sys system", cmd_orbit, true},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& cmd : commands) {
        auto* s = app.add_subcommand(cmd.name, cmd.help);
        auto* in = s->add_option("--input", cfg.input, "input file");
        if (cmd.needs_input) in->required();
        s->add_option("--out", cfg.out, "output directory for the report and CSV files");
        s->add_option("--iters", cfg.iters, "iterations (command-specific default)");
        s->add_option("--depth", cfg.depth, "truncation depth");
        s->add_option("--tol", cfg.tol, "fixed-height tolerance");
        s->add_option("--seed", cfg.seed, "random seed");
        s->add_option("--grid", cfg.grid, "grid size (command-specific meaning)");
        s->add_option("--variant", cfg.variant, "hhu forcing: cos or odd");
        s->add_option("--orbits", cfg.orbits, "orbits per component (decompose)");
        s->add_option("--direction", cfg.direction, "forward or backward");
        s->add_option("--freq", cfg.freq, "test family frequency bound (decompose; 0 = default family)");
        subs.emplace_back(s, &cmd);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    for (const auto& [s, cmd] : subs) {
        if (!s->parsed()) continue;
        cfg.command = cmd->name;
        try {
            return cmd->run(cfg);
        } catch (const InconclusiveError& e) {
            std::cerr << "inconclusive: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return 1;
}
