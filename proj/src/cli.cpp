#include "netlasso/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "netlasso/io.hpp"
#include "netlasso/stats.hpp"

namespace netlasso {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

void require(bool cond, const std::string& field, const std::string& what) {
    if (!cond) throw Error(ErrorCode::InvalidArgument, what, field);
}

void require_file(const std::string& path, const std::string& field) {
    require(!path.empty(), field, "--" + field + " is required");
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::IoError, "file not found: " + path, field);
}

int weight_sources(const RunConfig& c) {
    return (c.gmt.empty() ? 0 : 1) + (c.pairs.empty() ? 0 : 1) + (c.weights.empty() ? 0 : 1);
}

void validate_tuning(const RunConfig& c) {
    require(c.s >= 1, "s", "--s must be >= 1");
    require(c.slack >= 0, "slack", "--slack must be >= 0");
    require(c.c.has_value() != c.r.has_value(), "c", "exactly one of --c and --r is required");
    require(weight_sources(c) == 1, "weights", "exactly one of --gmt, --pairs, --weights is required");
    if (!c.gmt.empty()) {
        require_file(c.gmt, "gmt");
        require_file(c.snpmap, "snpmap");
    }
    if (!c.pairs.empty()) require_file(c.pairs, "pairs");
    if (!c.weights.empty()) require_file(c.weights, "weights");
    require(c.diag_mode == "ones" || c.diag_mode == "reciprocal", "diag-mode", "--diag-mode must be ones or reciprocal");
    require(c.tol > 0.0, "tol", "--tol must be positive");
    require(c.max_cycles >= 1, "max-cycles", "--max-cycles must be >= 1");
}

WeightMatrix build_weight_source(const RunConfig& c, const std::vector<std::string>& snp_ids) {
    if (!c.weights.empty()) return load_weight_triplets(c.weights, snp_ids);
    if (!c.pairs.empty()) {
        return load_pair_list(c.pairs, snp_ids, c.snpmap.empty() ? std::nullopt : std::optional<std::string>(c.snpmap));
    }
    const BipartiteMap bm = load_gmt(c.gmt, c.snpmap, snp_ids, GmtOptions{c.max_genes});
    return build_weights(build_adjacency(bm), c.diag_mode == "reciprocal" ? DiagMode::Reciprocal : DiagMode::Ones,
                         c.binary_weights);
}

TuneSpec tune_spec(const RunConfig& c) {
    TuneSpec spec;
    spec.s_target = c.s;
    spec.s_slack = c.slack;
    spec.c = c.c;
    spec.r = c.r;
    spec.solver.tol = c.tol;
    spec.solver.max_cycles = c.max_cycles;
    return spec;
}

Dataset load_adjusted(const std::string& geno, const std::string& pheno, const std::optional<std::string>& covar) {
    Dataset ds = load_dataset(geno, pheno, covar);
    return ds.covariates ? residualize(ds) : ds;
}

json base_metadata(const RunConfig& c) {
    json meta;
    meta["command"] = c.command;
    meta["version"] = kVersion;
    meta["seed"] = c.seed;
    meta["threads"] = resolve_threads(c.threads);
    meta["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION);
    return meta;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'", path);
    out << j.dump(2) << '\n';
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'", path);
    for (const auto& l : lines) out << l << '\n';
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'", path);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) {
        if (!l.empty()) out.push_back(l);
    }
    return out;
}

void run_simulate(const RunConfig& c, json& meta) {
    std::ifstream in(c.design);
    SimDesign d = parse_design(in);
    meta["design"] = format_design(d);
    std::vector<SimReplicate> reps(static_cast<std::size_t>(d.replicates));
    parallel_for(reps.size(), [&](std::size_t r) { reps[r] = simulate_replicate(d, static_cast<int>(r)); }, c.threads);
    for (std::size_t r = 0; r < reps.size(); ++r) {
        const fs::path dir = fs::path(c.out) / ("rep" + std::to_string(r + 1));
        fs::create_directories(dir);
        write_genotypes((dir / "geno.tsv").string(), reps[r].data);
        write_phenotype((dir / "pheno.tsv").string(), reps[r].data);
        write_weight_triplets((dir / "weights.tsv").string(), reps[r].weights, reps[r].data.snp_ids);
    }
    write_truth((fs::path(c.out) / "truth.tsv").string(), reps.front().truth, reps.front().data.snp_ids);
    std::ofstream((fs::path(c.out) / "design.txt").string()) << format_design(d);
    meta["replicates"] = d.replicates;
}

void run_fit(const RunConfig& c, json& meta) {
    const Dataset ds = load_adjusted(c.geno, c.pheno, c.covar.empty() ? std::nullopt : std::optional<std::string>(c.covar));
    const WeightMatrix w = build_weight_source(c, ds.snp_ids);
    const StandardizedDesign sd = standardize(ds);
    const TuneSpec spec = tune_spec(c);
    const double cval = resolve_c(sd, w, spec);
    const TuneResult tr = lambda1_for_target(sd, w, spec, cval);
    const FitReport rep = refit_dataset(ds, tr.solution.coeffs.terms());
    const fs::path out(c.out);
    write_solution((out / "solution.tsv").string(), tr.solution, ds.snp_ids, SolutionMeta{tr.lambda1, tr.lambda2});
    write_fit_report((out / "fit_report.tsv").string(), rep, ds.snp_ids);
    write_lines((out / "snp_ids.txt").string(), ds.snp_ids);
    meta["n"] = ds.n();
    meta["p"] = ds.p();
    meta["allowed_pairs"] = w.pair_count();
    meta["c"] = cval;
    meta["lambda1"] = tr.lambda1;
    meta["lambda2"] = tr.lambda2;
    meta["probes"] = tr.probes;
    meta["monotonicity_violations"] = tr.monotonicity_violations;
    meta["cycles"] = tr.solution.cycles_used;
    meta["converged"] = tr.solution.converged;
    meta["objective"] = tr.solution.objective;
    meta["selected_mains"] = tr.solution.coeffs.main_count();
    meta["selected_interactions"] = tr.solution.coeffs.interaction_count();
}

void run_meta(const RunConfig& c, json& meta) {
    CohortSet cs;
    for (const auto& e : load_cohort_list(c.cohort_list)) {
        cs.cohorts.push_back(load_adjusted(e.geno, e.pheno, e.covar));
        cs.labels.push_back(e.label);
    }
    cs.validate();
    const auto& ids = cs.cohorts.front().snp_ids;
    const WeightMatrix w = build_weight_source(c, ids);
    const TuneSpec spec = tune_spec(c);
    const MetaOptions opts{resolve_threads(c.threads)};
    MetaResult res;
    switch (c.procedure[0]) {
        case 'A': res = run_procedure_a(pool_cohorts(cs), w, spec, c.K, c.seed, opts); break;
        case 'B': res = run_procedure_b(cs, w, spec, c.K, c.seed, opts); break;
        case 'C': res = run_procedure_c(cs, w, spec, c.K, c.seed, opts); break;
        default: res = run_procedure_d(cs, w, spec, c.K, c.seed, opts); break;
    }
    write_meta_result((fs::path(c.out) / "meta_result.tsv").string(), res, ids);
    meta["procedure"] = std::string(1, res.procedure);
    meta["K"] = res.K;
    meta["cohorts"] = cs.size();
    meta["skipped_units"] = res.skipped_units;
    meta["terms"] = res.terms.size();
}

void run_eval(const RunConfig& c, json& meta) {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(c.results)) {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / "fit_report.tsv")) dirs.push_back(entry.path());
    }
    if (fs::is_regular_file(fs::path(c.results) / "fit_report.tsv")) dirs.emplace_back(c.results);
    if (dirs.empty()) throw Error(ErrorCode::EmptyData, "no fit_report.tsv found under results", "results");
    std::sort(dirs.begin(), dirs.end());
    const std::vector<std::string> ids = read_lines((dirs.front() / "snp_ids.txt").string());
    const Truth truth = load_truth(c.truth, ids);
    std::vector<ReplicateOutcome> outcomes;
    for (const auto& d : dirs) {
        ReplicateOutcome o;
        o.report = read_fit_report((d / "fit_report.tsv").string(), ids);
        o.selected = o.report.terms;
        std::sort(o.selected.begin(), o.selected.end());
        outcomes.push_back(std::move(o));
    }
    const EvalCurves ev = evaluate(outcomes, truth, c.max_threshold);
    write_eval_curves((fs::path(c.out) / "one_minus_fdr.tsv").string(), (fs::path(c.out) / "power.tsv").string(), ev);
    meta["replicates"] = ev.replicates;
}

}  // namespace

void RunConfig::validate() const {
    require(!out.empty(), "out", "--out is required");
    require(threads >= 0, "threads", "--threads must be >= 0");
    if (command == "simulate") {
        require_file(design, "design");
    } else if (command == "fit") {
        require_file(geno, "geno");
        require_file(pheno, "pheno");
        if (!covar.empty()) require_file(covar, "covar");
        validate_tuning(*this);
    } else if (command == "meta") {
        require(procedure == "A" || procedure == "B" || procedure == "C" || procedure == "D", "procedure",
                "--procedure must be one of A, B, C, D");
        require_file(cohort_list, "cohort-list");
        require(K >= 1, "K", "--K must be >= 1");
        validate_tuning(*this);
    } else if (command == "eval") {
        require(fs::is_directory(results), "results", "--results must be a directory");
        require_file(truth, "truth");
        require(max_threshold >= 1, "max-threshold", "--max-threshold must be >= 1");
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'", "command");
    }
}

void dispatch(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out);
    json meta = base_metadata(cfg);
    const auto start = std::chrono::steady_clock::now();
    if (cfg.command == "simulate") run_simulate(cfg, meta);
    else if (cfg.command == "fit") run_fit(cfg, meta);
    else if (cfg.command == "meta") run_meta(cfg, meta);
    else run_eval(cfg, meta);
    meta["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json((fs::path(cfg.out) / "metadata.json").string(), meta);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Network-guided hierarchical interaction selection"};
    app.set_config("--config", "", "flat key=value file; command-line flags override it");
    app.allow_config_extras(false);
    RunConfig cfg;
    double c_val = 0.0;
    double r_val = 0.0;
    app.add_option("command", cfg.command, "simulate | fit | meta | eval")
        ->required()
        ->check(CLI::IsMember({"simulate", "fit", "meta", "eval"}));
    app.add_option("--out", cfg.out, "output directory");
    app.add_option("--threads", cfg.threads, "worker threads (default: NETLASSO_THREADS or all cores)");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--design", cfg.design, "simulation design file");
    app.add_option("--geno", cfg.geno, "genotype TSV");
    app.add_option("--pheno", cfg.pheno, "phenotype TSV");
    app.add_option("--covar", cfg.covar, "covariate TSV");
    app.add_option("--gmt", cfg.gmt, "GMT gene-set file");
    app.add_option("--snpmap", cfg.snpmap, "snp_id -> gene_id TSV");
    app.add_option("--max-genes", cfg.max_genes, "keep gene sets with fewer genes (0 = all)");
    app.add_option("--pairs", cfg.pairs, "pair list TSV");
    app.add_option("--weights", cfg.weights, "weight triplet TSV");
    app.add_option("--diag-mode", cfg.diag_mode, "ones | reciprocal");
    app.add_flag("--binary", cfg.binary_weights, "weight every allowed pair 1");
    app.add_option("--s", cfg.s, "target number of main effects");
    app.add_option("--slack", cfg.slack, "accepted deviation from --s");
    auto* c_opt = app.add_option("--c", c_val, "lambda2 / lambda1");
    auto* r_opt = app.add_option("--r", r_val, "threshold ratio; c is derived from it");
    app.add_option("--tol", cfg.tol, "solver tolerance");
    app.add_option("--max-cycles", cfg.max_cycles, "solver cycle cap");
    app.add_option("--procedure", cfg.procedure, "meta procedure A|B|C|D");
    app.add_option("--cohort-list", cfg.cohort_list, "cohort list TSV");
    app.add_option("--K", cfg.K, "number of splits");
    app.add_option("--results", cfg.results, "directory of fit outputs");
    app.add_option("--truth", cfg.truth, "truth file");
    app.add_option("--max-threshold", cfg.max_threshold, "largest rank threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        const json err{{"code", "ParseError"}, {"message", e.what()}, {"field", ""}};
        std::cerr << err.dump() << '\n';
        return 2;
    }
    if (c_opt->count() > 0) cfg.c = c_val;
    if (r_opt->count() > 0) cfg.r = r_val;

    try {
        dispatch(cfg);
    } catch (const Error& e) {
        const json err{{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"field", e.field()}};
        std::cerr << err.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        const json err{{"code", "Internal"}, {"message", e.what()}, {"field", ""}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace netlasso
