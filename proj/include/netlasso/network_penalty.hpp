#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "netlasso/data_model.hpp"

namespace netlasso {

// SNP <-> pathway incidence (p x m, binary).
struct BipartiteMap {
    int p = 0;
    std::vector<std::string> pathway_ids;
    // edges[l] = sorted SNP indices belonging to pathway l
    std::vector<std::vector<int>> members;

    int m() const { return static_cast<int>(pathway_ids.size()); }
    Eigen::SparseMatrix<int> incidence() const;
};

using Adjacency = Eigen::SparseMatrix<int>;

struct WeightedPair {
    int j;
    int k;
    double weight;
};

// Penalty weights. Off-diagonal entries absent from the map are infinite, i.e.
// the interaction is excluded. An infinite diagonal entry excludes the main
// effect of that SNP.
class WeightMatrix {
public:
    struct Neighbor {
        int snp;
        int pair_index;
    };

    WeightMatrix() = default;
    // Canonicalizes (j < k), merges duplicates (last weight wins) and sorts.
    WeightMatrix(std::vector<double> diag, std::vector<WeightedPair> pairs);

    int size() const { return static_cast<int>(diag_.size()); }
    double diag(int j) const { return diag_[static_cast<std::size_t>(j)]; }
    bool main_allowed(int j) const { return std::isfinite(diag(j)); }

    std::span<const WeightedPair> pairs() const { return pairs_; }
    int pair_count() const { return static_cast<int>(pairs_.size()); }
    const WeightedPair& pair(int idx) const { return pairs_[static_cast<std::size_t>(idx)]; }
    // Index into pairs() or -1 when excluded.
    int pair_index(int j, int k) const;
    double weight(int j, int k) const;  // +inf when excluded
    std::span<const Neighbor> neighbors(int j) const { return neighbors_[static_cast<std::size_t>(j)]; }

private:
    std::vector<double> diag_;
    std::vector<WeightedPair> pairs_;
    std::vector<std::vector<Neighbor>> neighbors_;
};

enum class DiagMode { Ones, Reciprocal };

// A = M M^T
Adjacency build_adjacency(const BipartiteMap& bm);

WeightMatrix build_weights(const Adjacency& a, DiagMode diag_mode = DiagMode::Ones,
                           bool binary_mode = false);

// Each listed pair allowed with weight 1, everything else excluded, diag = 1.
WeightMatrix from_pairs(std::span<const std::pair<std::string, std::string>> pairs,
                        std::span<const std::string> snp_ids);

std::span<const WeightedPair> allowed_pairs(const WeightMatrix& w);

}  // namespace netlasso
