#include "netlasso/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace netlasso {

namespace fs = std::filesystem;

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, '\t')) {
        if (!cur.empty() && cur.back() == '\r') cur.pop_back();
        out.push_back(cur);
    }
    if (!line.empty() && line.back() == '\t') out.emplace_back();
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'", path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'", path);
    return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

double parse_value(const std::string& tok, const std::string& path, std::size_t line_no) {
    if (tok.empty() || tok == "NA" || tok == "NaN" || tok == "nan" || tok == ".") {
        throw Error(ErrorCode::MissingValue, "missing value at line " + std::to_string(line_no), path);
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used != tok.size()) {
        throw Error(ErrorCode::ParseError, "bad number '" + tok + "' at line " + std::to_string(line_no), path);
    }
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "non-finite value at line " + std::to_string(line_no), path);
    return v;
}

std::unordered_map<std::string, int> index_of(const std::vector<std::string>& ids) {
    std::unordered_map<std::string, int> idx;
    for (std::size_t i = 0; i < ids.size(); ++i) idx.emplace(ids[i], static_cast<int>(i));
    return idx;
}

int lookup(const std::unordered_map<std::string, int>& idx, const std::string& id, const std::string& field) {
    const auto it = idx.find(id);
    if (it == idx.end()) throw Error(ErrorCode::UnknownId, "unknown id '" + id + "'", field);
    return it->second;
}

// gene -> SNP indices (only SNPs present in snp_ids)
std::unordered_map<std::string, std::vector<int>> load_snp_map(const std::string& path,
                                                               const std::vector<std::string>& snp_ids) {
    const auto idx = index_of(snp_ids);
    std::unordered_map<std::string, std::vector<int>> genes;
    std::ifstream in = open_in(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto f = split_tabs(line);
        if (f.size() < 2) throw Error(ErrorCode::ParseError, "expected snp_id<TAB>gene_id at line " + std::to_string(line_no), path);
        if (line_no == 1 && f[0] == "snp_id") continue;
        const auto it = idx.find(f[0]);
        if (it == idx.end()) continue;
        auto& v = genes[f[1]];
        if (std::find(v.begin(), v.end(), it->second) == v.end()) v.push_back(it->second);
    }
    return genes;
}

}  // namespace

Dataset load_genotypes(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyData, "genotype file is empty", path);
    auto header = split_tabs(line);
    if (header.size() < 2) throw Error(ErrorCode::ParseError, "genotype header needs sample_id and SNP ids", path);
    Dataset ds;
    ds.snp_ids.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto f = split_tabs(line);
        if (f.size() != header.size()) {
            throw Error(ErrorCode::ParseError, "wrong field count at line " + std::to_string(line_no), path);
        }
        ds.sample_ids.push_back(f[0]);
        std::vector<double> row;
        row.reserve(f.size() - 1);
        for (std::size_t c = 1; c < f.size(); ++c) {
            const double v = parse_value(f[c], path, line_no);
            if (v < 0.0 || v > 2.0) {
                throw Error(ErrorCode::ParseError, "dosage outside [0, 2] at line " + std::to_string(line_no), path);
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::EmptyData, "genotype file has no samples", path);
    ds.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.snp_ids.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    ds.y = Vector::Zero(ds.x.rows());
    return ds;
}

std::vector<std::pair<std::string, double>> load_phenotype(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<std::pair<std::string, double>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto f = split_tabs(line);
        if (f.size() != 2) throw Error(ErrorCode::ParseError, "expected sample_id<TAB>value at line " + std::to_string(line_no), path);
        if (line_no == 1 && f[0] == "sample_id") continue;
        out.emplace_back(f[0], parse_value(f[1], path, line_no));
    }
    if (out.empty()) throw Error(ErrorCode::EmptyData, "phenotype file has no rows", path);
    return out;
}

std::pair<std::vector<std::string>, Matrix> load_covariates(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyData, "covariate file is empty", path);
    const auto header = split_tabs(line);
    if (header.size() < 2) throw Error(ErrorCode::ParseError, "covariate header needs sample_id and names", path);
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto f = split_tabs(line);
        if (f.size() != header.size()) throw Error(ErrorCode::ParseError, "wrong field count at line " + std::to_string(line_no), path);
        ids.push_back(f[0]);
        std::vector<double> row;
        for (std::size_t c = 1; c < f.size(); ++c) row.push_back(parse_value(f[c], path, line_no));
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return {std::move(ids), std::move(m)};
}

Dataset load_dataset(const std::string& geno, const std::string& pheno, const std::optional<std::string>& covar) {
    Dataset ds = load_genotypes(geno);
    const auto sidx = index_of(ds.sample_ids);
    if (sidx.size() != ds.sample_ids.size()) throw Error(ErrorCode::DuplicateId, "duplicate sample id in genotypes", geno);

    auto align = [&](const std::vector<std::string>& ids, const std::string& path) {
        if (ids.size() != ds.sample_ids.size()) {
            throw Error(ErrorCode::SampleMismatch, "sample count differs from genotypes", path);
        }
        std::vector<int> pos(ids.size(), -1);
        std::vector<char> seen(ids.size(), 0);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto it = sidx.find(ids[i]);
            if (it == sidx.end()) throw Error(ErrorCode::SampleMismatch, "sample '" + ids[i] + "' not in genotypes", path);
            if (seen[static_cast<std::size_t>(it->second)]++) throw Error(ErrorCode::DuplicateId, "duplicate sample '" + ids[i] + "'", path);
            pos[i] = it->second;
        }
        return pos;
    };

    const auto ph = load_phenotype(pheno);
    std::vector<std::string> ph_ids;
    for (const auto& [id, v] : ph) ph_ids.push_back(id);
    const auto pos = align(ph_ids, pheno);
    for (std::size_t i = 0; i < ph.size(); ++i) ds.y[pos[i]] = ph[i].second;

    if (covar) {
        auto [ids, m] = load_covariates(*covar);
        const auto cpos = align(ids, *covar);
        Matrix aligned(m.rows(), m.cols());
        for (std::size_t i = 0; i < ids.size(); ++i) aligned.row(cpos[i]) = m.row(static_cast<Eigen::Index>(i));
        ds.covariates = std::move(aligned);
    }
    validate(ds);
    return ds;
}

void write_genotypes(const std::string& path, const Dataset& ds) {
    std::ofstream out = open_out(path);
    out << "sample_id";
    for (const auto& id : ds.snp_ids) out << '\t' << id;
    out << '\n';
    for (int i = 0; i < ds.n(); ++i) {
        out << (ds.sample_ids.empty() ? "s" + std::to_string(i + 1) : ds.sample_ids[static_cast<std::size_t>(i)]);
        for (int j = 0; j < ds.p(); ++j) out << '\t' << fmt_num(ds.x(i, j));
        out << '\n';
    }
}

void write_phenotype(const std::string& path, const Dataset& ds) {
    std::ofstream out = open_out(path);
    out << "sample_id\tvalue\n";
    for (int i = 0; i < ds.n(); ++i) {
        out << (ds.sample_ids.empty() ? "s" + std::to_string(i + 1) : ds.sample_ids[static_cast<std::size_t>(i)]) << '\t'
            << fmt_num(ds.y[i]) << '\n';
    }
}

BipartiteMap load_gmt(const std::string& gmt_path, const std::string& snpmap_path,
                      const std::vector<std::string>& snp_ids, const GmtOptions& opts) {
    const auto genes = load_snp_map(snpmap_path, snp_ids);
    BipartiteMap bm;
    bm.p = static_cast<int>(snp_ids.size());
    std::ifstream in = open_in(gmt_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto f = split_tabs(line);
        if (f.size() < 2) throw Error(ErrorCode::ParseError, "GMT line needs name and description", gmt_path);
        std::set<std::string> gene_set;
        for (std::size_t c = 2; c < f.size(); ++c) {
            if (!f[c].empty()) gene_set.insert(f[c]);
        }
        if (opts.max_genes > 0 && static_cast<int>(gene_set.size()) >= opts.max_genes) continue;
        std::set<int> snps;
        for (const auto& g : gene_set) {
            const auto it = genes.find(g);
            if (it != genes.end()) snps.insert(it->second.begin(), it->second.end());
        }
        if (snps.empty()) continue;
        bm.pathway_ids.push_back(f[0]);
        bm.members.emplace_back(snps.begin(), snps.end());
    }
    if (bm.m() == 0) throw Error(ErrorCode::NoAllowedPairs, "no gene set maps onto the SNP panel", gmt_path);
    return bm;
}

WeightMatrix load_pair_list(const std::string& path, const std::vector<std::string>& snp_ids,
                            const std::optional<std::string>& snpmap_path) {
    std::ifstream in = open_in(path);
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto f = split_tabs(line);
        if (f.size() < 2) throw Error(ErrorCode::ParseError, "expected two ids at line " + std::to_string(line_no), path);
        rows.emplace_back(f[0], f[1]);
    }
    if (!snpmap_path) return from_pairs(rows, snp_ids);
    const auto genes = load_snp_map(*snpmap_path, snp_ids);
    std::vector<WeightedPair> pairs;
    for (const auto& [ga, gb] : rows) {
        const auto a = genes.find(ga);
        const auto b = genes.find(gb);
        if (a == genes.end() || b == genes.end()) continue;
        for (int j : a->second) {
            for (int k : b->second) {
                if (j != k) pairs.push_back({j, k, 1.0});
            }
        }
    }
    return WeightMatrix(std::vector<double>(snp_ids.size(), 1.0), std::move(pairs));
}

WeightMatrix load_weight_triplets(const std::string& path, const std::vector<std::string>& snp_ids) {
    const auto idx = index_of(snp_ids);
    std::ifstream in = open_in(path);
    std::vector<double> diag(snp_ids.size(), 1.0);
    std::vector<WeightedPair> pairs;
    bool in_diag = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        if (line.rfind("[diag]", 0) == 0) {
            in_diag = true;
            continue;
        }
        const auto f = split_tabs(line);
        if (line_no == 1 && !f.empty() && f[0] == "j_id") continue;
        if (in_diag) {
            if (f.size() != 2) throw Error(ErrorCode::ParseError, "diag rows need snp_id and weight", path);
            const double v = f[1] == "inf" ? std::numeric_limits<double>::infinity() : parse_value(f[1], path, line_no);
            diag[static_cast<std::size_t>(lookup(idx, f[0], path))] = v;
        } else {
            if (f.size() != 3) throw Error(ErrorCode::ParseError, "pair rows need j_id, k_id, weight", path);
            pairs.push_back({lookup(idx, f[0], path), lookup(idx, f[1], path), parse_value(f[2], path, line_no)});
        }
    }
    return WeightMatrix(std::move(diag), std::move(pairs));
}

void write_weight_triplets(const std::string& path, const WeightMatrix& w, const std::vector<std::string>& snp_ids) {
    std::ofstream out = open_out(path);
    out << "j_id\tk_id\tweight\n";
    for (const auto& pr : w.pairs()) {
        out << snp_ids[static_cast<std::size_t>(pr.j)] << '\t' << snp_ids[static_cast<std::size_t>(pr.k)] << '\t'
            << fmt_num(pr.weight) << '\n';
    }
    out << "[diag]\n";
    for (int j = 0; j < w.size(); ++j) {
        out << snp_ids[static_cast<std::size_t>(j)] << '\t' << (w.main_allowed(j) ? fmt_num(w.diag(j)) : "inf") << '\n';
    }
}

void write_solution(const std::string& path, const Solution& sol, const std::vector<std::string>& snp_ids,
                    const SolutionMeta& meta) {
    std::ofstream out = open_out(path);
    out << "# lambda1=" << fmt_num(meta.lambda1) << " lambda2=" << fmt_num(meta.lambda2) << " cycles=" << sol.cycles_used
        << " converged=" << (sol.converged ? 1 : 0) << " objective=" << fmt_num(sol.objective) << '\n';
    out << "term\tcoefficient\n";
    for (const auto& [t, b] : sol.coeffs) out << t.label(snp_ids) << '\t' << fmt_num(b) << '\n';
}

void write_fit_report(const std::string& path, const FitReport& rep, const std::vector<std::string>& snp_ids) {
    std::ofstream out = open_out(path);
    out << "term\tbeta\tse\tt\trank\n";
    for (const auto& t : rank_terms(rep)) {
        const auto i = static_cast<std::size_t>(std::find(rep.terms.begin(), rep.terms.end(), t) - rep.terms.begin());
        out << t.label(snp_ids) << '\t' << fmt_num(rep.beta[i]) << '\t' << fmt_num(rep.se[i]) << '\t' << fmt_num(rep.t[i])
            << '\t' << rep.rank[i] << '\n';
    }
}

FitReport read_fit_report(const std::string& path, const std::vector<std::string>& snp_ids) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("term\tbeta\tse\tt\trank", 0) != 0) {
        throw Error(ErrorCode::ParseError, "not a fit report", path);
    }
    FitReport rep;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto f = split_tabs(line);
        if (f.size() != 5) throw Error(ErrorCode::ParseError, "fit report rows need 5 fields", path);
        rep.terms.push_back(parse_term(f[0], snp_ids));
        rep.beta.push_back(parse_value(f[1], path, line_no));
        rep.se.push_back(parse_value(f[2], path, line_no));
        rep.t.push_back(f[3] == "inf" || f[3] == "-inf" ? std::stod(f[3]) : parse_value(f[3], path, line_no));
        rep.rank.push_back(static_cast<int>(parse_value(f[4], path, line_no)));
    }
    return rep;
}

void write_meta_result(const std::string& path, const MetaResult& res, const std::vector<std::string>& snp_ids) {
    std::ofstream out = open_out(path);
    out << "term\tz\tbeta\tse\tn_splits_selected\n";
    for (const auto& [t, mt] : res.terms) {
        out << t.label(snp_ids) << '\t' << fmt_num(mt.z) << '\t' << (mt.beta ? fmt_num(*mt.beta) : "NA") << '\t'
            << (mt.se ? fmt_num(*mt.se) : "NA") << '\t' << mt.n_splits_selected << '\n';
    }
}

void write_eval_curves(const std::string& fdr_path, const std::string& power_path, const EvalCurves& ev) {
    {
        std::ofstream out = open_out(fdr_path);
        out << "threshold\tone_minus_fdr\tdiscovery_rate\n";
        for (std::size_t i = 0; i < ev.one_minus_fdr.size(); ++i) {
            out << i + 1 << '\t' << fmt_num(ev.one_minus_fdr[i]) << '\t' << fmt_num(ev.discovery_rate[i]) << '\n';
        }
    }
    std::ofstream out = open_out(power_path);
    out << "category\trate\tcount\n";
    out << "with_interaction\t" << fmt_num(ev.power_with) << '\t' << ev.count_with << '\n';
    out << "without_interaction\t" << fmt_num(ev.power_without) << '\t' << ev.count_without << '\n';
    out << "non_active\t" << fmt_num(ev.power_non_active) << '\t' << ev.count_non_active << '\n';
}

std::vector<CohortEntry> load_cohort_list(const std::string& path) {
    std::ifstream in = open_in(path);
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        const fs::path q(p);
        return (q.is_absolute() ? q : base / q).string();
    };
    std::vector<CohortEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line) || line[0] == '#') continue;
        const auto f = split_tabs(line);
        if (f.size() < 3 || f.size() > 4) {
            throw Error(ErrorCode::ParseError, "cohort rows need label, genotype and phenotype paths", path);
        }
        CohortEntry e{f[0], resolve(f[1]), resolve(f[2]), std::nullopt};
        if (f.size() == 4 && !f[3].empty()) e.covar = resolve(f[3]);
        out.push_back(std::move(e));
    }
    if (out.empty()) throw Error(ErrorCode::EmptyData, "cohort list is empty", path);
    return out;
}

Truth load_truth(const std::string& path, const std::vector<std::string>& snp_ids) {
    const auto idx = index_of(snp_ids);
    Truth t;
    t.p = static_cast<int>(snp_ids.size());
    std::ifstream in = open_in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (blank(line) || line[0] == '#') continue;
        const auto f = split_tabs(line);
        if (f[0] == "main" && f.size() == 2) {
            t.active.insert(lookup(idx, f[1], path));
        } else if (f[0] == "pair" && f.size() == 3) {
            const int j = lookup(idx, f[1], path);
            const int k = lookup(idx, f[2], path);
            t.pairs.insert({std::min(j, k), std::max(j, k)});
            t.interacting.insert(j);
            t.interacting.insert(k);
        } else {
            throw Error(ErrorCode::ParseError, "truth rows are 'main id' or 'pair id id'", path);
        }
    }
    // Interacting SNPs only count as a category when they also carry a main effect.
    std::set<int> inter;
    for (int j : t.interacting) {
        if (t.active.count(j)) inter.insert(j);
    }
    t.interacting = std::move(inter);
    return t;
}

void write_truth(const std::string& path, const Truth& truth, const std::vector<std::string>& snp_ids) {
    std::ofstream out = open_out(path);
    for (int j : truth.active) out << "main\t" << snp_ids[static_cast<std::size_t>(j)] << '\n';
    for (const auto& [j, k] : truth.pairs) {
        out << "pair\t" << snp_ids[static_cast<std::size_t>(j)] << '\t' << snp_ids[static_cast<std::size_t>(k)] << '\n';
    }
}

}  // namespace netlasso
