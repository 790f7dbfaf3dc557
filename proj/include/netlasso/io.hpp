#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netlasso/meta_analysis.hpp"
#include "netlasso/simulation.hpp"

namespace netlasso {

// "%.10g"
std::string fmt_num(double v);

// Header: sample_id then SNP ids; one row of dosages per sample.
Dataset load_genotypes(const std::string& path);
// Rows of sample_id, value (header line optional when its value is non-numeric).
std::vector<std::pair<std::string, double>> load_phenotype(const std::string& path);
// Header: sample_id then covariate names.
std::pair<std::vector<std::string>, Matrix> load_covariates(const std::string& path);

/// Genotypes joined with phenotype (and covariates) by sample id; the
/// sample sets must match exactly. Covariates are kept unresidualized.
Dataset load_dataset(const std::string& geno, const std::string& pheno,
                     const std::optional<std::string>& covar = std::nullopt);

void write_genotypes(const std::string& path, const Dataset& ds);
void write_phenotype(const std::string& path, const Dataset& ds);

struct GmtOptions {
    // Keep gene sets with fewer than this many genes (0 = no filter).
    int max_genes = 0;
};

/// GMT gene sets projected onto SNPs through a snp_id -> gene_id map. Genes
/// without SNPs and map rows for SNPs outside `snp_ids` are ignored; gene sets
/// left without SNPs are dropped.
BipartiteMap load_gmt(const std::string& gmt_path, const std::string& snpmap_path,
                      const std::vector<std::string>& snp_ids, const GmtOptions& opts = {});

/// Two ids per row. With a SNP map the ids are genes and every SNP pair across
/// the two genes is allowed; without one the ids are SNP ids.
WeightMatrix load_pair_list(const std::string& path, const std::vector<std::string>& snp_ids,
                            const std::optional<std::string>& snpmap_path = std::nullopt);

// Triplet TSV "j_id k_id weight", then a "[diag]" line and "snp_id weight" rows.
WeightMatrix load_weight_triplets(const std::string& path, const std::vector<std::string>& snp_ids);
void write_weight_triplets(const std::string& path, const WeightMatrix& w, const std::vector<std::string>& snp_ids);

struct SolutionMeta {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};
void write_solution(const std::string& path, const Solution& sol, const std::vector<std::string>& snp_ids,
                    const SolutionMeta& meta);
void write_fit_report(const std::string& path, const FitReport& rep, const std::vector<std::string>& snp_ids);
void write_meta_result(const std::string& path, const MetaResult& res, const std::vector<std::string>& snp_ids);
void write_eval_curves(const std::string& fdr_path, const std::string& power_path, const EvalCurves& ev);

// Reads back a FitReport TSV (term, beta, se, t, rank).
FitReport read_fit_report(const std::string& path, const std::vector<std::string>& snp_ids);

struct CohortEntry {
    std::string label;
    std::string geno;
    std::string pheno;
    std::optional<std::string> covar;
};
// Rows: label, genotype path, phenotype path[, covariate path]; relative
// paths resolve against the list file's directory.
std::vector<CohortEntry> load_cohort_list(const std::string& path);

// Truth file: one "main <snp_id>" or "pair <snp_id> <snp_id>" per row.
Truth load_truth(const std::string& path, const std::vector<std::string>& snp_ids);
void write_truth(const std::string& path, const Truth& truth, const std::vector<std::string>& snp_ids);

}  // namespace netlasso
