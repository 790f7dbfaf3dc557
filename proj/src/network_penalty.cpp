#include "netlasso/network_penalty.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace netlasso {

Eigen::SparseMatrix<int> BipartiteMap::incidence() const {
    std::vector<Eigen::Triplet<int>> trip;
    for (int l = 0; l < m(); ++l) {
        for (int snp : members[static_cast<std::size_t>(l)]) trip.emplace_back(snp, l, 1);
    }
    Eigen::SparseMatrix<int> inc(p, m());
    // duplicate (SNP, pathway) edges collapse to a single 1
    inc.setFromTriplets(trip.begin(), trip.end(), [](int, int) { return 1; });
    return inc;
}

WeightMatrix::WeightMatrix(std::vector<double> diag, std::vector<WeightedPair> pairs)
    : diag_(std::move(diag)) {
    const int p = size();
    for (double d : diag_) {
        if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "diagonal weights must be positive");
    }
    std::map<std::pair<int, int>, double> canon;
    for (const auto& wp : pairs) {
        if (wp.j == wp.k || wp.j < 0 || wp.k < 0 || wp.j >= p || wp.k >= p) {
            throw Error(ErrorCode::IndexOutOfRange, "weight pair index out of range");
        }
        if (!(wp.weight > 0.0) || !std::isfinite(wp.weight)) {
            throw Error(ErrorCode::InvalidArgument, "stored pair weights must be finite and positive");
        }
        canon[{std::min(wp.j, wp.k), std::max(wp.j, wp.k)}] = wp.weight;
    }
    pairs_.reserve(canon.size());
    neighbors_.assign(static_cast<std::size_t>(p), {});
    for (const auto& [jk, w] : canon) {
        const int idx = static_cast<int>(pairs_.size());
        pairs_.push_back({jk.first, jk.second, w});
        neighbors_[static_cast<std::size_t>(jk.first)].push_back({jk.second, idx});
        neighbors_[static_cast<std::size_t>(jk.second)].push_back({jk.first, idx});
    }
    for (auto& nb : neighbors_) {
        std::sort(nb.begin(), nb.end(), [](const Neighbor& a, const Neighbor& b) { return a.snp < b.snp; });
    }
}

int WeightMatrix::pair_index(int j, int k) const {
    if (j < 0 || k < 0 || j >= size() || k >= size() || j == k) return -1;
    const auto nb = neighbors(j);
    auto it = std::lower_bound(nb.begin(), nb.end(), k,
                               [](const Neighbor& n, int v) { return n.snp < v; });
    return (it != nb.end() && it->snp == k) ? it->pair_index : -1;
}

double WeightMatrix::weight(int j, int k) const {
    const int idx = pair_index(j, k);
    return idx < 0 ? std::numeric_limits<double>::infinity() : pair(idx).weight;
}

Adjacency build_adjacency(const BipartiteMap& bm) {
    if (bm.p < 1 || bm.m() < 1) throw Error(ErrorCode::EmptyData, "bipartite map needs p >= 1 and m >= 1");
    const Eigen::SparseMatrix<int> inc = bm.incidence();
    Adjacency a = (inc * Eigen::SparseMatrix<int>(inc.transpose())).pruned();
    a.makeCompressed();
    return a;
}

WeightMatrix build_weights(const Adjacency& a, DiagMode diag_mode, bool binary_mode) {
    const int p = static_cast<int>(a.rows());
    std::vector<double> diag(static_cast<std::size_t>(p), 1.0);
    std::vector<WeightedPair> pairs;
    for (int col = 0; col < a.outerSize(); ++col) {
        for (Adjacency::InnerIterator it(a, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            const int val = it.value();
            if (row == col) {
                if (diag_mode == DiagMode::Reciprocal) {
                    diag[static_cast<std::size_t>(row)] = 1.0 / static_cast<double>(val);
                }
            } else if (row < col && val > 0) {
                pairs.push_back({row, col, binary_mode ? 1.0 : 1.0 / static_cast<double>(val)});
            }
        }
    }
    if (diag_mode == DiagMode::Reciprocal) {
        // SNPs in no pathway: a_jj = 0 excludes the SNP
        for (int j = 0; j < p; ++j) {
            if (a.coeff(j, j) == 0) diag[static_cast<std::size_t>(j)] = std::numeric_limits<double>::infinity();
        }
    }
    return WeightMatrix(std::move(diag), std::move(pairs));
}

WeightMatrix from_pairs(std::span<const std::pair<std::string, std::string>> pairs,
                        std::span<const std::string> snp_ids) {
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < snp_ids.size(); ++i) index.emplace(snp_ids[i], static_cast<int>(i));
    auto lookup = [&](const std::string& id) {
        auto it = index.find(id);
        if (it == index.end()) throw Error(ErrorCode::UnknownId, "unknown SNP id " + id, id);
        return it->second;
    };
    std::vector<WeightedPair> out;
    for (const auto& [a, b] : pairs) {
        const int j = lookup(a);
        const int k = lookup(b);
        if (j != k) out.push_back({j, k, 1.0});
    }
    return WeightMatrix(std::vector<double>(snp_ids.size(), 1.0), std::move(out));
}

std::span<const WeightedPair> allowed_pairs(const WeightMatrix& w) { return w.pairs(); }

}  // namespace netlasso
