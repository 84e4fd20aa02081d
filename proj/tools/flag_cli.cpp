#include "flag/core_model.hpp"
#include "flag/evaluation.hpp"
#include "flag/gof.hpp"
#include "flag/interpret.hpp"
#include "flag/io.hpp"
#include "flag/selection.hpp"
#include "flag/simulation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace flag;

constexpr int kExitInput = 2;
constexpr int kExitNotConverged = 3;

struct Options {
    std::string data;
    std::string out = ".";
    std::string model;
    std::string scales;
    std::string design;
    double gamma = 0.02;
    double rho = 10.0;
    std::string gamma_grid;
    std::string rho_grid;
    double lambda = SolverConfig{}.lambda;
    double tol = SolverConfig{}.tol_abs;
    double tol_rel = SolverConfig{}.tol_rel;
    int max_iter = SolverConfig{}.max_iter;
    int boot = 200;
    int burn_in = GibbsConfig{}.burn_in_sweeps;
    int thin = GibbsConfig{}.thin_sweeps;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool strict = false;
    bool trace = false;
    int setting = 1;
    long n = 1000;
    std::vector<int> settings{1, 3};
    std::vector<long> ns{250, 2000};
    int reps = 10;
    int min_clique = 3;
    bool no_kaiser = false;
    double edge_strength = BuiltinMagnitudes{}.edge_strength;
    double loading = BuiltinMagnitudes{}.loading;
    double two_factor_loading = BuiltinMagnitudes{}.two_factor_loading;
};

std::string out_path(const Options& o, const std::string& name) {
    std::filesystem::create_directories(o.out);
    return (std::filesystem::path(o.out) / name).string();
}

template <typename Writer>
void write_with(const std::string& path, Writer&& w) {
    std::ostringstream os;
    w(os);
    write_text_file(path, os.str());
}

SolverConfig solver_config(const Options& o) {
    SolverConfig c;
    c.lambda = o.lambda;
    c.tol_abs = o.tol;
    c.tol_rel = o.tol_rel;
    c.max_iter = o.max_iter;
    c.validate();
    return c;
}

GridConfig grid_config(const Options& o) {
    GridConfig g;
    if (!o.gamma_grid.empty()) g.gammas = parse_lattice(o.gamma_grid);
    if (!o.rho_grid.empty()) g.rhos = parse_lattice(o.rho_grid);
    g.solver = solver_config(o);
    g.jobs = o.jobs;
    return g;
}

GibbsConfig gibbs_config(const Options& o) {
    GibbsConfig g;
    g.burn_in_sweeps = o.burn_in;
    g.thin_sweeps = o.thin;
    g.seed = o.seed;
    g.validate();
    return g;
}

BuiltinMagnitudes magnitudes(const Options& o) {
    return {o.edge_strength, o.loading, o.two_factor_loading};
}

BinaryDataset load_data(const Options& o) {
    if (o.data.empty()) throw InputError("--data is required for this command");
    return read_dataset_csv(o.data);
}

nlohmann::json grid_json(const GridConfig& g) {
    return {{"gamma", g.gammas}, {"rho", g.rhos}, {"lambda", g.solver.lambda}, {"tol_abs", g.solver.tol_abs},
            {"tol_rel", g.solver.tol_rel}, {"max_iter", g.solver.max_iter}};
}

ModelFile model_from_fit(const Matrix& l, const Matrix& s, Index k_hat) {
    ModelFile m;
    m.l = l;
    m.s = s;
    m.k_hat = k_hat;
    m.a = loadings_from_L(l, k_hat).matrix();
    m.edges = support_edges(s);
    return m;
}

std::string summary_line(Index k_hat, std::size_t n_edges) {
    return "K_hat=" + std::to_string(k_hat) + " edges=" + std::to_string(n_edges);
}

int cmd_fit(const Options& o) {
    const BinaryDataset data = load_data(o);
    SolverConfig cfg = solver_config(o);
    cfg.record_trace = o.trace;
    if (o.gamma < 0.0 || o.rho < 0.0) throw InputError("--gamma and --rho must be nonnegative");
    const RegularizedFit fit = admm_fit(data, o.gamma, o.rho * o.gamma, cfg);
    const Structure st = extract_structure(fit);
    ModelFile model = model_from_fit(fit.l_hat, fit.s_hat, st.rank);
    model.provenance = {{"command", "fit"},     {"gamma", o.gamma},         {"rho", o.rho},
                        {"delta", fit.delta},   {"lambda", cfg.lambda},     {"converged", fit.converged},
                        {"iterations", fit.iterations}, {"objective", fit.objective}, {"data", o.data}};
    write_model(out_path(o, "model.json"), model);
    if (o.trace) write_with(out_path(o, "trace.csv"), [&](std::ostream& os) { write_trace_csv(os, fit.trace); });
    std::cout << summary_line(st.rank, st.edges.size()) << " converged=" << (fit.converged ? "yes" : "no")
              << " iterations=" << fit.iterations << " objective=" << std::setprecision(10) << fit.objective << '\n';
    return (o.strict && !fit.converged) ? kExitNotConverged : 0;
}

int cmd_select(const Options& o) {
    const BinaryDataset data = load_data(o);
    const GridConfig grid = grid_config(o);
    const SelectionResult sel = grid_search_select(data, grid);
    const PathEntry& best = sel.best();
    ModelFile model = model_from_fit(sel.final_l, sel.final_s, best.k_hat);
    model.edges = best.edges;
    model.provenance = {{"command", "select"}, {"grid", grid_json(grid)}, {"gamma", best.gamma}, {"rho", best.rho},
                        {"delta", best.delta}, {"bic", best.bic}, {"log_pl_refit", best.log_pl_refit},
                        {"free_params", best.free_params}, {"refit_converged", best.refit_converged}, {"data", o.data}};
    write_model(out_path(o, "model.json"), model);
    write_with(out_path(o, "path.csv"), [&](std::ostream& os) { write_path_csv(os, sel.path); });
    int unconverged = 0;
    for (const auto& e : sel.path) unconverged += e.fit.converged ? 0 : 1;
    std::cout << summary_line(best.k_hat, best.edges.size()) << " gamma=" << best.gamma << " rho=" << best.rho
              << " bic=" << std::setprecision(10) << best.bic << " unconverged_grid_points=" << unconverged << '\n';
    return (o.strict && (unconverged > 0 || !best.refit_converged)) ? kExitNotConverged : 0;
}

int cmd_simulate(const Options& o) {
    if (o.n < 0) throw InputError("--n must be nonnegative");
    SimDesign design;
    nlohmann::json truth;
    if (!o.design.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text_file(o.design));
            design = SimDesign(matrix_from_json(j.at("A")), matrix_from_json(j.at("S")));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(o.design + ": malformed design file (" + e.what() + ")");
        }
        truth["design"] = o.design;
    } else {
        design = builtin_design(o.setting, magnitudes(o));
        truth["setting"] = o.setting;
    }
    const SimulatedData sim = simulate_dataset(design, o.n, o.seed);
    write_dataset_csv(out_path(o, "data.csv"), sim.data);
    truth["seed"] = o.seed;
    truth["N"] = o.n;
    truth["A"] = matrix_to_json(design.loadings());
    truth["L"] = matrix_to_json(sim.truth.latent());
    truth["S"] = matrix_to_json(sim.truth.graph());
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [p, q] : support_edges(sim.truth.graph())) edges.push_back({p + 1, q + 1});
    truth["edges"] = std::move(edges);
    truth["theta_acceptance_rate"] = sim.acceptance_rate;
    write_text_file(out_path(o, "truth.json"), truth.dump(2) + "\n");
    std::cout << "N=" << o.n << " J=" << design.n_items() << " K=" << design.n_factors() << " wrote "
              << out_path(o, "data.csv") << '\n';
    return 0;
}

int cmd_gof(const Options& o) {
    const BinaryDataset data = load_data(o);
    FlagParams params;
    int code = 0;
    if (!o.model.empty()) {
        const ModelFile m = read_model(o.model);
        params = FlagParams(m.l, m.s);
    } else {
        const SelectionResult sel = grid_search_select(data, grid_config(o));
        params = FlagParams(sel.final_l, sel.final_s);
        if (o.strict && !sel.best().refit_converged) code = kExitNotConverged;
    }
    const GofReport rep = parametric_bootstrap_gof(data, params, o.boot, gibbs_config(o), o.jobs);
    write_with(out_path(o, "gof.txt"), [&](std::ostream& os) { write_gof_report(os, rep); });
    write_with(out_path(o, "bootstrap.csv"), [&](std::ostream& os) { write_bootstrap_csv(os, rep); });
    std::cout << std::setprecision(6) << "statistic=" << rep.stat_observed << " p_lower=" << rep.p_lower
              << " p_upper=" << rep.p_upper << " p_two_sided=" << rep.p_two_sided << '\n';
    return code;
}

void write_matrix_csv(std::ostream& os, const Matrix& m, const std::string& prefix) {
    os << std::setprecision(10);
    for (Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << prefix << c + 1;
    os << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
        os << '\n';
    }
}

int cmd_interpret(const Options& o) {
    if (o.model.empty()) throw InputError("--model is required for interpret");
    const ModelFile m = read_model(o.model);
    const Index k = m.k_hat;
    const Matrix a = loadings_from_L(m.l, k).matrix();
    Matrix a_rot = a;
    if (k >= 1) {
        VarimaxOptions vo;
        vo.kaiser = !o.no_kaiser;
        const RotationResult rot = varimax(a, vo);
        a_rot = rot.a_rot;
        write_with(out_path(o, "rotation.csv"), [&](std::ostream& os) { write_matrix_csv(os, rot.t, "factor"); });
    }
    write_with(out_path(o, "loadings.csv"), [&](std::ostream& os) { write_matrix_csv(os, a_rot, "factor"); });
    if (!o.data.empty() && k >= 1) {
        const BinaryDataset data = load_data(o);
        const Matrix scores = factor_scores(a_rot, data);
        write_with(out_path(o, "scores.csv"), [&](std::ostream& os) { write_matrix_csv(os, scores, "factor"); });
        if (!o.scales.empty()) {
            std::istringstream in(read_text_file(o.scales));
            const ScaleKey key = read_scale_key(in, data.n_items());
            const Matrix corr = scale_correlations(scores, key, data);
            write_with(out_path(o, "correlations.csv"), [&](std::ostream& os) {
                os << "factor";
                for (const auto& l : key.labels) os << ',' << l;
                os << '\n' << std::setprecision(6);
                for (Index r = 0; r < corr.rows(); ++r) {
                    os << r + 1;
                    for (Index c = 0; c < corr.cols(); ++c) {
                        os << ',';
                        if (std::isnan(corr(r, c)))
                            os << "NA";
                        else
                            os << corr(r, c);
                    }
                    os << '\n';
                }
            });
        }
    } else if (!o.scales.empty()) {
        throw InputError("--scales needs --data and a model with at least one factor");
    }
    const auto cliques = clique_report(m.s, o.min_clique);
    write_with(out_path(o, "cliques.txt"), [&](std::ostream& os) { write_clique_report(os, cliques); });
    std::cout << "K=" << k << " cliques(size>=" << o.min_clique << ")=" << cliques.size() << '\n';
    return 0;
}

int cmd_eval(const Options& o) {
    StudyConfig c;
    c.settings = o.settings;
    c.ns.assign(o.ns.begin(), o.ns.end());
    c.reps = o.reps;
    c.seed = o.seed;
    c.magnitudes = magnitudes(o);
    c.jobs = o.jobs;
    const SolverConfig solver = solver_config(o);
    const std::string gg = o.gamma_grid;
    const std::string rg = o.rho_grid;
    c.grid = [=](Index n) {
        GridConfig g = study_grid(n);
        if (!gg.empty()) g.gammas = parse_lattice(gg);
        if (!rg.empty()) g.rhos = parse_lattice(rg);
        g.solver = solver;
        return g;
    };
    const auto results = run_simulation_study(c);
    write_with(out_path(o, "table1.csv"), [&](std::ostream& os) { write_table1_csv(os, results); });
    write_with(out_path(o, "figure3.csv"), [&](std::ostream& os) { write_figure3_csv(os, results); });
    write_with(out_path(o, "replicates.csv"), [&](std::ostream& os) { write_replicates_csv(os, results); });
    for (const auto& r : results)
        std::cout << "setting=" << r.setting << " N=" << r.n << " C1=" << r.c1_mean << " C2=" << r.c2_mean << " C3=" << r.c3_mean
                  << " C4=" << r.c4_mean << " failures=" << r.failures << '\n';
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"Fused latent and graphical model for binary data"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value file; keys are long flag names");
    Options o;

    app.add_option("--data", o.data, "Response CSV (one subject per row, 0/1 fields)");
    app.add_option("--out", o.out, "Output directory")->capture_default_str();
    app.add_option("--model", o.model, "Model file written by fit or select");
    app.add_option("--scales", o.scales, "Scale key CSV: item_index,scale_label,reverse_flag");
    app.add_option("--design", o.design, "Custom design JSON with matrices A and S (simulate)");
    app.add_option("--gamma", o.gamma, "Graph penalty (fit)")->capture_default_str();
    app.add_option("--rho", o.rho, "Ratio delta/gamma (fit)")->capture_default_str();
    app.add_option("--gamma-grid", o.gamma_grid, "gamma lattice lo:hi:n, points lo+(hi-lo)i/n");
    app.add_option("--rho-grid", o.rho_grid, "rho lattice lo:hi:n");
    app.add_option("--lambda", o.lambda, "ADMM scale parameter")->capture_default_str();
    app.add_option("--tol", o.tol, "Absolute ADMM tolerance")->capture_default_str();
    app.add_option("--tol-rel", o.tol_rel, "Relative ADMM tolerance")->capture_default_str();
    app.add_option("--max-iter", o.max_iter, "ADMM iteration cap")->capture_default_str();
    app.add_option("--boot", o.boot, "Bootstrap replicates (gof)")->capture_default_str();
    app.add_option("--burn-in", o.burn_in, "Gibbs burn-in sweeps")->capture_default_str();
    app.add_option("--thin", o.thin, "Gibbs sweeps between retained states")->capture_default_str();
    app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
    app.add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--strict", o.strict, "Exit 3 when a solver does not converge");
    app.add_flag("--trace", o.trace, "Write the ADMM trace (fit)");
    app.add_option("--setting", o.setting, "Built-in design 1, 2 or 3 (simulate)")->capture_default_str();
    app.add_option("--n", o.n, "Sample size (simulate)")->capture_default_str();
    app.add_option("--settings", o.settings, "Designs for eval")->delimiter(',')->capture_default_str();
    app.add_option("--ns", o.ns, "Sample sizes for eval")->delimiter(',')->capture_default_str();
    app.add_option("--reps", o.reps, "Replications per cell (eval)")->capture_default_str();
    app.add_option("--min-clique", o.min_clique, "Smallest clique reported (interpret)")->capture_default_str();
    app.add_flag("--no-kaiser", o.no_kaiser, "Varimax without row normalization");
    app.add_option("--edge-strength", o.edge_strength, "Built-in edge strength")->capture_default_str();
    app.add_option("--loading", o.loading, "Built-in loading, settings 1 and 2")->capture_default_str();
    app.add_option("--two-factor-loading", o.two_factor_loading, "Built-in loading, setting 3")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "Single regularized fit at (gamma, rho * gamma)");
    auto* select = app.add_subcommand("select", "Grid search, refit and BIC selection");
    auto* simulate = app.add_subcommand("simulate", "Simulate a dataset and its truth");
    auto* gof = app.add_subcommand("gof", "Parametric bootstrap goodness of fit");
    auto* interpret = app.add_subcommand("interpret", "Loadings, varimax, scores, scale correlations, cliques");
    auto* eval = app.add_subcommand("eval", "Simulation study (criteria C1-C4)");
    for (auto* sub : {fit, select, simulate, gof, interpret, eval}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << " (see --help)\n";
        return kExitInput;
    }

    std::cerr << "# resolved configuration\n" << app.config_to_str(true, false);

    try {
        if (*fit) return cmd_fit(o);
        if (*select) return cmd_select(o);
        if (*simulate) return cmd_simulate(o);
        if (*gof) return cmd_gof(o);
        if (*interpret) return cmd_interpret(o);
        return cmd_eval(o);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
