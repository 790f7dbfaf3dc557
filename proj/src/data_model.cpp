#include "netlasso/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace netlasso {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyData: return "EmptyData";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::MissingValue: return "MissingValue";
        case ErrorCode::RankDeficientCovariates: return "RankDeficientCovariates";
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::SampleMismatch: return "SampleMismatch";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::ExcludedPair: return "ExcludedPair";
        case ErrorCode::NoAllowedPairs: return "NoAllowedPairs";
        case ErrorCode::TargetUnreachable: return "TargetUnreachable";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::TooManyTerms: return "TooManyTerms";
        case ErrorCode::NonPositiveSE: return "NonPositiveSE";
        case ErrorCode::InvalidPower: return "InvalidPower";
        case ErrorCode::ModelTooLarge: return "ModelTooLarge";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

void validate(const Dataset& ds) {
    if (ds.y.size() < 2 || ds.x.cols() < 1) {
        throw Error(ErrorCode::EmptyData, "dataset needs n >= 2 samples and p >= 1 SNPs");
    }
    if (ds.x.rows() != ds.y.size()) {
        throw Error(ErrorCode::InvalidArgument, "genotype rows do not match trait length", "x");
    }
    if (static_cast<Eigen::Index>(ds.snp_ids.size()) != ds.x.cols()) {
        throw Error(ErrorCode::InvalidArgument, "snp_ids length does not match genotype columns",
                    "snp_ids");
    }
    if (!ds.sample_ids.empty() && static_cast<Eigen::Index>(ds.sample_ids.size()) != ds.y.size()) {
        throw Error(ErrorCode::InvalidArgument, "sample_ids length does not match n", "sample_ids");
    }
    if (!ds.y.allFinite()) throw Error(ErrorCode::MissingValue, "trait has missing values", "y");
    if (!ds.x.allFinite()) throw Error(ErrorCode::MissingValue, "genotypes have missing values", "x");
    if (ds.covariates) {
        if (ds.covariates->rows() != ds.y.size()) {
            throw Error(ErrorCode::InvalidArgument, "covariate rows do not match n", "covariates");
        }
        if (!ds.covariates->allFinite()) {
            throw Error(ErrorCode::MissingValue, "covariates have missing values", "covariates");
        }
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ds.snp_ids) {
        if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, "duplicate SNP id " + id, id);
    }
}

Dataset subset_rows(const Dataset& ds, std::span<const int> rows) {
    Dataset out;
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.y.resize(m);
    out.x.resize(m, ds.x.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
        const int r = rows[static_cast<std::size_t>(i)];
        if (r < 0 || r >= ds.n()) throw Error(ErrorCode::IndexOutOfRange, "row index out of range");
        out.y(i) = ds.y(r);
        out.x.row(i) = ds.x.row(r);
    }
    if (ds.covariates) {
        Matrix c(m, ds.covariates->cols());
        for (Eigen::Index i = 0; i < m; ++i) c.row(i) = ds.covariates->row(rows[static_cast<std::size_t>(i)]);
        out.covariates = std::move(c);
    }
    if (!ds.sample_ids.empty()) {
        out.sample_ids.reserve(rows.size());
        for (int r : rows) out.sample_ids.push_back(ds.sample_ids[static_cast<std::size_t>(r)]);
    }
    out.snp_ids = ds.snp_ids;
    return out;
}

StandardizedDesign standardize(const Dataset& ds) {
    if (ds.y.size() < 2 || ds.x.cols() < 1 || ds.x.rows() != ds.y.size()) {
        throw Error(ErrorCode::EmptyData, "cannot standardize an empty or ragged dataset");
    }
    StandardizedDesign sd;
    sd.snp_ids = ds.snp_ids;

    sd.y_mean = ds.y.mean();
    sd.y = ds.y.array() - sd.y_mean;
    sd.y_norm = sd.y.norm();
    if (!(sd.y_norm > 0.0)) throw Error(ErrorCode::ConstantColumn, "trait is constant", "y");
    sd.y /= sd.y_norm;

    const Eigen::Index p = ds.x.cols();
    sd.x.resize(ds.x.rows(), p);
    sd.column_means.resize(p);
    sd.column_norms.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mean = ds.x.col(j).mean();
        sd.x.col(j) = ds.x.col(j).array() - mean;
        const double norm = sd.x.col(j).norm();
        if (!(norm > 0.0)) {
            const std::string id = j < static_cast<Eigen::Index>(ds.snp_ids.size())
                                       ? ds.snp_ids[static_cast<std::size_t>(j)]
                                       : std::to_string(j);
            throw Error(ErrorCode::ConstantColumn, "constant genotype column " + id, id);
        }
        sd.x.col(j) /= norm;
        sd.column_means(j) = mean;
        sd.column_norms(j) = norm;
    }
    return sd;
}

Vector interaction_column(const StandardizedDesign& sd, int j, int k) {
    if (j == k || j < 0 || k < 0 || j >= sd.p() || k >= sd.p()) {
        throw Error(ErrorCode::IndexOutOfRange, "invalid interaction indices");
    }
    if (j > k) std::swap(j, k);
    return sd.x.col(j).cwiseProduct(sd.x.col(k));
}

Dataset residualize(const Dataset& ds) {
    if (!ds.covariates) throw Error(ErrorCode::InvalidArgument, "no covariates to adjust for", "covariates");
    const Matrix& cov = *ds.covariates;
    Matrix design(ds.n(), cov.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(cov.cols()) = cov;

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) {
        throw Error(ErrorCode::RankDeficientCovariates,
                    "covariates plus intercept are not full column rank", "covariates");
    }
    Dataset out = ds;
    out.y = ds.y - design * qr.solve(ds.y);
    out.covariates.reset();
    return out;
}

TermId TermId::Main(int j) {
    if (j < 0) throw Error(ErrorCode::IndexOutOfRange, "negative SNP index");
    return TermId(j, -1);
}

TermId TermId::Inter(int j, int k) {
    if (j < 0 || k < 0 || j == k) throw Error(ErrorCode::IndexOutOfRange, "invalid interaction indices");
    return j < k ? TermId(j, k) : TermId(k, j);
}

std::string TermId::label(std::span<const std::string> snp_ids) const {
    auto name = [&](int idx) {
        return idx < static_cast<int>(snp_ids.size()) ? snp_ids[static_cast<std::size_t>(idx)]
                                                      : std::to_string(idx);
    };
    return is_main() ? name(first_) : name(first_) + ":" + name(second_);
}

TermId parse_term(std::string_view label, std::span<const std::string> snp_ids) {
    auto lookup = [&](std::string_view id) {
        auto it = std::find(snp_ids.begin(), snp_ids.end(), id);
        if (it == snp_ids.end()) throw Error(ErrorCode::UnknownId, "unknown SNP id " + std::string(id), std::string(id));
        return static_cast<int>(it - snp_ids.begin());
    };
    const auto colon = label.find(':');
    if (colon == std::string_view::npos) return TermId::Main(lookup(label));
    return TermId::Inter(lookup(label.substr(0, colon)), lookup(label.substr(colon + 1)));
}

double CoefficientState::get(const TermId& t) const {
    auto it = values_.find(t);
    return it == values_.end() ? 0.0 : it->second;
}

void CoefficientState::set(const TermId& t, double v) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "non-finite coefficient");
    if (v == 0.0) {
        values_.erase(t);
    } else {
        values_[t] = v;
    }
}

int CoefficientState::main_count() const {
    return static_cast<int>(std::count_if(values_.begin(), values_.end(),
                                          [](const auto& kv) { return kv.first.is_main(); }));
}

int CoefficientState::interaction_count() const {
    return static_cast<int>(values_.size()) - main_count();
}

std::vector<TermId> CoefficientState::terms() const {
    std::vector<TermId> out;
    out.reserve(values_.size());
    for (const auto& [t, v] : values_) out.push_back(t);
    return out;
}

}  // namespace netlasso
