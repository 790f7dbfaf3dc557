#pragma once

#include <random>
#include <string>
#include <vector>

#include "netlasso/data_model.hpp"
#include "netlasso/network_penalty.hpp"

namespace testsupport {

using netlasso::Dataset;
using netlasso::Matrix;
using netlasso::Vector;

// Binomial(2, maf) genotypes with ids snp1..snpP and a Gaussian trait.
inline Dataset random_dataset(int n, int p, std::uint64_t seed, double maf = 0.5) {
    std::mt19937_64 rng(seed);
    std::binomial_distribution<int> g(2, maf);
    std::normal_distribution<double> e(0.0, 1.0);
    Dataset ds;
    ds.x.resize(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) ds.x(i, j) = g(rng);
    }
    // Guard against a constant column in tiny samples.
    for (int j = 0; j < p; ++j) {
        if (ds.x.col(j).maxCoeff() == ds.x.col(j).minCoeff()) ds.x(0, j) = ds.x(0, j) == 0.0 ? 1.0 : 0.0;
    }
    ds.y.resize(n);
    for (int i = 0; i < n; ++i) ds.y[i] = e(rng);
    for (int j = 0; j < p; ++j) ds.snp_ids.push_back("snp" + std::to_string(j + 1));
    return ds;
}

// Every pair among the first `m` SNPs, weight 1, plus `extra` random pairs.
inline netlasso::WeightMatrix clique_weights(int p, int m, int extra = 0, std::uint64_t seed = 7) {
    std::vector<netlasso::WeightedPair> pairs;
    for (int j = 0; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) pairs.push_back({j, k, 1.0});
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, p - 1);
    std::uniform_real_distribution<double> wt(0.5, 2.0);
    for (int i = 0; i < extra; ++i) {
        const int j = pick(rng);
        const int k = pick(rng);
        if (j != k) pairs.push_back({j, k, wt(rng)});
    }
    return netlasso::WeightMatrix(std::vector<double>(static_cast<std::size_t>(p), 1.0), pairs);
}

}  // namespace testsupport
