/* Command-line front end.
 *
 * Subcommands: generate | denoise | experiment | compare | eval-tgv.
 * Every run prints one machine-parseable summary line `RESULT key=value ...`.
 * Exit codes: 0 success, 1 usage error, 2 solver non-convergence, 3 I/O error.
 * Each subcommand accepts --config FILE with plain key=value lines (# starts
 * a comment); explicit flags beat config values beat defaults.
 */
#pragma once

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tgv/harness.hpp"

namespace tgv::cli {

namespace detail {

inline ScalarField make_image(const std::string& image, const std::string& in_path, int n,
                              double radius_frac, double offset_frac, double sigma,
                              std::uint64_t seed, double spacing = 1.0) {
    ScalarField f;
    if (!in_path.empty()) {
        f = read_image(in_path);
    } else if (image == "disk") {
        f = gen_disk(n, radius_frac);
    } else if (image == "disk-offset") {
        f = gen_disk(n, radius_frac, offset_frac, 0.0);
    } else if (image == "squares") {
        f = gen_squares(n);
    } else if (image == "ramp-ellipse") {
        f = gen_ramp_ellipse(n);
    } else if (image == "step-1d") {
        f = gen_step_1d(n);
    } else {
        throw CLI::ValidationError("--image", "unknown image kind: " + image);
    }
    if (in_path.empty()) f.shape.spacing = spacing;
    if (sigma > 0.0) f = add_noise(f, sigma, seed);
    return f;
}

// "from:to" or "from:to:count" -> log-spaced values
inline std::vector<double> parse_geometric_list(const std::string& text, int default_count) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 2 || parts.size() > 3)
        throw CLI::ValidationError("list", "expected from:to[:count], got " + text);
    const double from = std::strtod(parts[0].c_str(), nullptr);
    const double to = std::strtod(parts[1].c_str(), nullptr);
    const int count = parts.size() == 3 ? std::atoi(parts[2].c_str()) : default_count;
    if (!(from > 0.0) || !(to > 0.0) || count < 1)
        throw CLI::ValidationError("list", "bad geometric list: " + text);
    return geometric_values(from, to, count);
}

/* plain key=value config, one pair per line, '#' starts a comment.
 * Values fill in options the command line did not set, so explicit flags
 * beat the config file, which beats defaults. */
inline void apply_config(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::string line;
    int lineno = 0;
    auto is_space = [](unsigned char ch) { return std::isspace(ch) != 0; };
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && is_space(line.back())) line.pop_back();
        std::size_t b = 0;
        while (b < line.size() && is_space(line[b])) ++b;
        line.erase(0, b);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--config",
                                       "expected key=value at line " + std::to_string(lineno));
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && is_space(key.back())) key.pop_back();
        std::size_t vb = 0;
        while (vb < value.size() && is_space(value[vb])) ++vb;
        value.erase(0, vb);
        CLI::Option* op = cmd->get_option_no_throw("--" + key);
        if (op == nullptr || key == "config")
            throw CLI::ValidationError("--config",
                                       "unknown key '" + key + "' at line " + std::to_string(lineno));
        if (op->count() > 0) continue;
        op->add_result(value);
        op->run_callback();
    }
}

inline double linf_distance(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::abs(a.v[k] - b.v[k]));
    return m;
}

struct CommonFlags {
    int n = 64;
    double alpha = 1.0;
    double beta = 1.0;
    int p = 2;
    double tol = 1e-8;
    int max_iter = 20000;
    std::string metric = "change";
    double sigma = 0.0;
    std::uint64_t seed = 42;
    double radius_frac = 0.35;
    double offset_frac = 0.1;
    double spacing = 1.0;
    int jobs = 1;
    std::string config_path;

    SolverConfig solver_config() const {
        SolverConfig cfg;
        cfg.p = p;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        cfg.metric = metric == "gap" ? ConvergenceMetric::DualityGap : ConvergenceMetric::IterateChange;
        return cfg;
    }
};

inline void add_solver_flags(CLI::App* cmd, CommonFlags& c) {
    cmd->add_option("--p", c.p, "fidelity exponent (1 or 2)")->check(CLI::IsMember({1, 2}));
    cmd->add_option("--tol", c.tol, "convergence tolerance");
    cmd->add_option("--max-iter", c.max_iter, "iteration cap");
    cmd->add_option("--metric", c.metric, "convergence metric")->check(CLI::IsMember({"change", "gap"}));
}

inline void add_image_flags(CLI::App* cmd, CommonFlags& c) {
    cmd->add_option("--n", c.n, "grid size");
    cmd->add_option("--sigma", c.sigma, "noise level");
    cmd->add_option("--seed", c.seed, "noise seed");
    cmd->add_option("--radius-frac", c.radius_frac, "disk radius as a fraction of n");
    cmd->add_option("--offset-frac", c.offset_frac, "disk centre offset as a fraction of n");
    cmd->add_option("--spacing", c.spacing, "grid spacing (recorded in image files)");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout) {
    using detail::CommonFlags;
    CLI::App app{"discrete TV / TGV^2 denoising and parameter-regime experiments"};
    app.require_subcommand(1);
    int exit_code = 0;

    // ---- generate ----
    auto* gen = app.add_subcommand("generate", "write a test image");
    CommonFlags gc;
    std::string gen_kind, gen_out;
    gen->add_option("kind", gen_kind, "disk | disk-offset | squares | ramp-ellipse | step-1d")
        ->required();
    detail::add_image_flags(gen, gc);
    gen->add_option("--out", gen_out, "output path (.pgm binary, anything else text matrix)")
        ->required();
    gen->add_option("--config", gc.config_path, "plain key=value config file");
    gen->callback([&]() {
        detail::apply_config(gen, gc.config_path);
        ScalarField f = detail::make_image(gen_kind, "", gc.n, gc.radius_frac,
                                           gen_kind == "disk" ? 0.0 : gc.offset_frac, gc.sigma,
                                           gc.seed, gc.spacing);
        write_image(gen_out, f);
        out << "RESULT command=generate kind=" << gen_kind << " n=" << gc.n << " sigma="
            << format_full(gc.sigma) << " seed=" << gc.seed << " out=" << gen_out << "\n";
    });

    // ---- denoise ----
    auto* den = app.add_subcommand("denoise", "run one solver on an image");
    CommonFlags dc;
    std::string den_in, den_model = "tgv2", den_out, den_out_w, den_log;
    den->add_option("--in", den_in, "input image")->required();
    den->add_option("--model", den_model, "tv | tgv2 | tv2-1d")
        ->check(CLI::IsMember({"tv", "tgv2", "tv2-1d"}));
    den->add_option("--alpha", dc.alpha, "first-order weight");
    den->add_option("--beta", dc.beta, "second-order weight");
    detail::add_solver_flags(den, dc);
    den->add_option("--out", den_out, "solution image path")->required();
    den->add_option("--out-w", den_out_w, "optional w output (channel blocks stacked row-wise)");
    den->add_option("--log", den_log, "optional per-checkpoint CSV log");
    den->add_option("--config", dc.config_path, "plain key=value config file");
    den->callback([&]() {
        detail::apply_config(den, dc.config_path);
        ScalarField f = read_image(den_in);
        SolverConfig cfg = dc.solver_config();
        SolveResult r;
        if (den_model == "tv")
            r = solve_tv(f, dc.alpha, cfg);
        else if (den_model == "tgv2")
            r = solve_tgv2(f, dc.alpha, dc.beta, cfg);
        else
            r = solve_tv2_1d(f, dc.beta, cfg);
        write_image(den_out, r.u);
        if (!den_out_w.empty() && !r.w.empty()) {
            // channel blocks stacked along axis 1
            if (f.shape.dims == 1) {
                ScalarField stacked(grid_1d(f.shape.n1));
                for (int i = 0; i < f.shape.n1; ++i) stacked.v[i] = r.w.at(0, i);
                write_image(den_out_w, stacked);
            } else {
                ScalarField stacked(grid_2d(f.shape.n1 * r.w.channels(), f.shape.n2));
                for (int c = 0; c < r.w.channels(); ++c)
                    for (int i = 0; i < f.shape.n1; ++i)
                        for (int j = 0; j < f.shape.n2; ++j)
                            stacked.at(c * f.shape.n1 + i, j) = r.w.at(c, f.shape.index(i, j));
                write_image(den_out_w, stacked);
            }
        }
        if (!den_log.empty()) write_history_csv(den_log, r);
        out << "RESULT command=denoise model=" << den_model << " energy=" << format_full(r.objective)
            << " iterations=" << r.iterations << " converged=" << (r.converged ? 1 : 0) << " out="
            << den_out << "\n";
        if (!r.converged) exit_code = 2;
    });

    // ---- experiment ----
    auto* exp = app.add_subcommand("experiment", "run a parameter-regime experiment, write CSV");
    CommonFlags ec;
    std::string exp_name, exp_image = "disk", exp_in, exp_out, exp_beta_list, exp_alpha_list;
    std::string exp_expect = "same";
    int exp_rungs = 8, exp_bisect_steps = 40;
    double exp_ew_tol = 1e-4;
    exp->add_option("name", exp_name,
                    "to-data | tv-equivalence | regression | affine-correction | beta-star")
        ->required()
        ->check(CLI::IsMember({"to-data", "tv-equivalence", "regression", "affine-correction",
                               "beta-star"}));
    exp->add_option("--image", exp_image, "disk | disk-offset | squares | ramp-ellipse | step-1d");
    exp->add_option("--in", exp_in, "input image path (overrides --image)");
    exp->add_option("--alpha", ec.alpha, "alpha (fixed value or ladder base)");
    exp->add_option("--beta", ec.beta, "beta (fixed value or ladder base)");
    exp->add_option("--beta-list", exp_beta_list, "geometric beta sweep from:to[:count]");
    exp->add_option("--alpha-list", exp_alpha_list, "geometric alpha sweep from:to[:count]");
    exp->add_option("--rungs", exp_rungs, "doubling-ladder length (regression)");
    exp->add_option("--bisect-steps", exp_bisect_steps, "bisection steps (beta-star)");
    exp->add_option("--expect", exp_expect, "tv-equivalence verdict: same | differ")
        ->check(CLI::IsMember({"same", "differ"}));
    exp->add_option("--ew-tol", exp_ew_tol, "||E w|| pass tolerance (affine-correction)");
    exp->add_option("--jobs", ec.jobs, "parallel sweep points");
    detail::add_image_flags(exp, ec);
    detail::add_solver_flags(exp, ec);
    exp->add_option("--out", exp_out, "CSV output path");
    exp->add_option("--config", ec.config_path, "plain key=value config file");
    exp->callback([&]() {
        detail::apply_config(exp, ec.config_path);
        const std::string csv = exp_out.empty() ? "experiment-" + exp_name + ".csv" : exp_out;
        SolverConfig cfg = ec.solver_config();
        bool pass = false;
        std::string detail_kv;
        if (exp_name == "beta-star") {
            const int n = exp->count("--n") > 0 ? ec.n : 128;  // 1-D default length
            ScalarField f = detail::make_image(exp_in.empty() ? "step-1d" : exp_image, exp_in, n,
                                               ec.radius_frac, 0.0, ec.sigma, ec.seed, ec.spacing);
            BetaStarOptions opt;
            opt.bisect_steps = exp_bisect_steps;
            BetaStarResult bs = find_beta_star(f, ec.alpha, cfg, opt);
            ExperimentReport rep = beta_star_report(bs, ec.alpha);
            double verify_max = -1.0, verify_dist = -1.0;
            if (bs.found && std::isfinite(bs.beta_star)) {
                SolveResult tg = solve_tgv2(f, ec.alpha, bs.beta_star / 2.0, cfg);
                SolveResult t2 = solve_tv2_1d(f, bs.beta_star / 2.0, cfg);
                verify_max = max_abs_graddiff(tg.u, tg.w);
                verify_dist = rel_l2_distance(tg.u, t2.u);
                rep.rows.push_back({bs.beta_star / 2.0, verify_max, verify_dist});
                std::sort(rep.rows.begin(), rep.rows.end(),
                          [](const auto& a, const auto& b) { return a[0] < b[0]; });
                pass = verify_max <= thresholds::prop2_max_graddiff &&
                       verify_dist <= thresholds::prop2_tv2_dist;
            }
            rep.metadata.emplace_back("seed", std::to_string(ec.seed));
            rep.write_csv(csv);
            detail_kv = " beta_star=" + format_full(bs.beta_star) +
                        " verify_max_du_w=" + format_full(verify_max) +
                        " verify_dist_tv2=" + format_full(verify_dist);
        } else {
            ScalarField f = detail::make_image(exp_image, exp_in, ec.n, ec.radius_frac,
                                               ec.offset_frac, ec.sigma, ec.seed, ec.spacing);
            if (exp_name == "to-data") {
                const bool alpha_sweep = !exp_alpha_list.empty();
                if (alpha_sweep && !exp_beta_list.empty())
                    throw CLI::ValidationError("to-data", "give either --beta-list or --alpha-list");
                std::vector<double> values = detail::parse_geometric_list(
                    alpha_sweep ? exp_alpha_list : (exp_beta_list.empty() ? "1e-1:1e-5" : exp_beta_list), 5);
                ExperimentReport rep = experiment_to_data(
                    f, alpha_sweep ? SweepVar::Alpha : SweepVar::Beta,
                    alpha_sweep ? ec.beta : ec.alpha, values, cfg, ec.jobs);
                rep.metadata.emplace_back("seed", std::to_string(ec.seed));
                rep.write_csv(csv);
                bool envelope_ok = true;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < rep.rows.size(); ++k) {
                    const double e = rep.cell(k, "rel_l2_err");
                    if (e > best + 1e-12) envelope_ok = false;
                    best = std::min(best, e);
                }
                const double grad_scale = radon_norm_vec(grad(f));
                const double final_rel = rep.cell(rep.rows.size() - 1, "rel_l2_err");
                const double final_term = rep.cell(rep.rows.size() - 1,
                                                   alpha_sweep ? "ew_mass" : "du_minus_w_mass");
                pass = envelope_ok && final_rel <= thresholds::to_data_final_rel &&
                       final_term <= thresholds::to_data_term_rel * grad_scale;
                detail_kv = " final_rel=" + format_full(final_rel) +
                            " final_term=" + format_full(final_term) +
                            " grad_scale=" + format_full(grad_scale);
            } else if (exp_name == "tv-equivalence") {
                ExperimentReport rep = experiment_tv_equivalence(f, ec.alpha, ec.beta, cfg);
                rep.metadata.emplace_back("seed", std::to_string(ec.seed));
                rep.write_csv(csv);
                const double dist = rep.cell(0, "rel_l2_distance");
                pass = exp_expect == "same" ? dist <= thresholds::tv_equiv_same
                                            : dist >= thresholds::tv_equiv_diff;
                detail_kv = " rel_l2_distance=" + format_full(dist) + " expect=" + exp_expect;
            } else if (exp_name == "regression") {
                std::vector<std::pair<double, double>> ladder;
                for (int k = 0; k < exp_rungs; ++k)
                    ladder.emplace_back(ec.alpha * std::pow(2.0, k), ec.beta * std::pow(2.0, k));
                ExperimentReport rep = experiment_regression(f, ladder, cfg, ec.jobs);
                rep.metadata.emplace_back("seed", std::to_string(ec.seed));
                rep.write_csv(csv);
                // below threshold at some rung and stays below afterwards
                int first_pass = -1;
                pass = false;
                for (std::size_t k = 0; k < rep.rows.size(); ++k) {
                    if (rep.cell(k, "rel_dist_to_regression") <= thresholds::regression_rel) {
                        if (first_pass < 0) first_pass = static_cast<int>(k);
                    } else if (first_pass >= 0) {
                        first_pass = -2;  // rose back above: fail
                        break;
                    }
                }
                pass = first_pass >= 0;
                detail_kv = " first_pass_rung=" + std::to_string(first_pass) + " final_dist=" +
                            format_full(rep.cell(rep.rows.size() - 1, "rel_dist_to_regression"));
            } else {  // affine-correction
                ExperimentReport rep = experiment_affine_correction(f, ec.alpha, ec.beta, cfg);
                rep.metadata.emplace_back("seed", std::to_string(ec.seed));
                rep.write_csv(csv);
                const double ew = rep.cell(0, "ew_mass");
                const double dist = rep.cell(0, "rel_l2_distance_to_tv");
                pass = ew <= exp_ew_tol && dist >= thresholds::tv_equiv_diff;
                detail_kv = " ew_mass=" + format_full(ew) + " rel_l2_distance_to_tv=" + format_full(dist);
            }
        }
        out << "RESULT command=experiment name=" << exp_name << " pass=" << (pass ? 1 : 0)
            << detail_kv << " csv=" << csv << "\n";
    });

    // ---- compare ----
    auto* cmp = app.add_subcommand("compare", "distances between two images");
    std::string cmp_a, cmp_b;
    cmp->add_option("a", cmp_a, "first image")->required();
    cmp->add_option("b", cmp_b, "second image")->required();
    cmp->callback([&]() {
        ScalarField a = read_image(cmp_a);
        ScalarField b = read_image(cmp_b);
        if (a.shape != b.shape) throw std::invalid_argument("compare: shape mismatch");
        out << "RESULT command=compare rel_l2=" << format_full(rel_l2_distance(a, b))
            << " linf=" << format_full(detail::linf_distance(a, b)) << "\n";
    });

    // ---- eval-tgv ----
    auto* ev = app.add_subcommand("eval-tgv", "evaluate TGV^2_{beta,alpha}(u) by the cascade");
    CommonFlags vc;
    std::string ev_in;
    ev->add_option("--in", ev_in, "input image")->required();
    ev->add_option("--alpha", vc.alpha, "alpha");
    ev->add_option("--beta", vc.beta, "beta");
    detail::add_solver_flags(ev, vc);
    ev->add_option("--config", vc.config_path, "plain key=value config file");
    ev->callback([&]() {
        detail::apply_config(ev, vc.config_path);
        ScalarField u = read_image(ev_in);
        EvalTgvResult r = eval_tgv(u, vc.alpha, vc.beta, vc.solver_config());
        out << "RESULT command=eval-tgv value=" << format_full(r.value)
            << " iterations=" << r.inner.iterations << " converged=" << (r.inner.converged ? 1 : 0)
            << "\n";
        if (!r.inner.converged) exit_code = 2;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}

}  // namespace tgv::cli
