#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netlasso/error.hpp"

namespace netlasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raw trait/genotype data. Genotypes are dosages in [0, 2].
struct Dataset {
    Vector y;
    Matrix x;
    std::vector<std::string> snp_ids;
    std::vector<std::string> sample_ids;  // may be empty for synthetic data
    std::optional<Matrix> covariates;

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x.cols()); }
};

// Throws on: n < 2, p < 1, shape mismatch, non-finite entries, duplicate ids.
void validate(const Dataset& ds);

Dataset subset_rows(const Dataset& ds, std::span<const int> rows);

// Centered, unit-norm design. Back-transformation data kept alongside.
struct StandardizedDesign {
    Vector y;
    Matrix x;
    Vector column_means;
    Vector column_norms;
    double y_mean = 0.0;
    double y_norm = 1.0;
    std::vector<std::string> snp_ids;

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x.cols()); }
};

StandardizedDesign standardize(const Dataset& ds);

// Elementwise product of standardized columns j and k. Deliberately not
// re-centered or re-scaled: ||X_jk|| != 1 in general.
Vector interaction_column(const StandardizedDesign& sd, int j, int k);

// Replaces y by its residual on [1, covariates] and drops the covariates.
Dataset residualize(const Dataset& ds);

/// Identifies a main effect `Main(j)` or an interaction `Inter(j, k)`.
/// Interactions are stored with j < k, so Inter(j, k) == Inter(k, j).
/// Ordering: all main effects (by j) before all interactions (lexicographic).
class TermId {
public:
    static TermId Main(int j);
    static TermId Inter(int j, int k);

    bool is_main() const { return second_ < 0; }
    bool is_interaction() const { return second_ >= 0; }
    int first() const { return first_; }
    int second() const { return second_; }
    bool involves(int snp) const { return first_ == snp || second_ == snp; }

    // "snp" or "snpA:snpB"
    std::string label(std::span<const std::string> snp_ids) const;

    friend bool operator==(const TermId&, const TermId&) = default;
    friend std::strong_ordering operator<=>(const TermId& a, const TermId& b) {
        if (auto c = a.is_interaction() <=> b.is_interaction(); c != 0) return c;
        if (auto c = a.first_ <=> b.first_; c != 0) return c;
        return a.second_ <=> b.second_;
    }

private:
    TermId(int first, int second) : first_(first), second_(second) {}
    int first_;
    int second_;  // -1 for main effects
};

// Parses a label produced by TermId::label against the given id list.
TermId parse_term(std::string_view label, std::span<const std::string> snp_ids);

// Sparse coefficient map; absent <=> exactly zero.
class CoefficientState {
public:
    using Map = std::map<TermId, double>;

    double get(const TermId& t) const;
    // Stores v, or erases the entry when v == 0. Non-finite values throw.
    void set(const TermId& t, double v);
    bool empty() const { return values_.empty(); }
    std::size_t size() const { return values_.size(); }
    Map::const_iterator begin() const { return values_.begin(); }
    Map::const_iterator end() const { return values_.end(); }

    int main_count() const;
    int interaction_count() const;
    std::vector<TermId> terms() const;

private:
    Map values_;
};

}  // namespace netlasso
