#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "netlasso/refit_inference.hpp"

namespace netlasso {

enum class TraitModelKind { M1, M2, M3 };
enum class WScenario { W1, W2, W3, W4, W5, W6 };

std::string_view to_string(TraitModelKind m);
std::string_view to_string(WScenario w);
TraitModelKind parse_model(std::string_view s);
WScenario parse_scenario(std::string_view s);

struct SimDesign {
    int n = 1000;
    int p = 1000;
    int n_active = 20;          // SNPs 1..n_active carry main effects
    double maf = 0.5;           // used when maf_list is empty and varying_maf is off
    std::vector<double> maf_list;
    bool varying_maf = false;   // 10%..50% block scheme
    TraitModelKind model = TraitModelKind::M2;
    double main_power = 0.80;
    double interaction_power = 0.80;
    bool marginal_free = false;
    WScenario w_scenario = WScenario::W2;
    int replicates = 1;
    std::uint64_t seed = 1;
    // Noise-pathway generator (W3, W4).
    int noise_total_pathways = 20;
    int noise_snps = 160;
    int noise_size_min = 14;
    int noise_size_max = 42;

    void validate() const;
};

// Flat key=value text; '#' starts a comment. Unknown keys are an error.
SimDesign parse_design(std::istream& in);
std::string format_design(const SimDesign& d);

// Per-SNP MAFs for the design (random for non-active SNPs in varying mode).
std::vector<double> resolve_mafs(const SimDesign& d, std::mt19937_64& rng);

// x_ij ~ Binomial(2, maf_j). Ids are "snp1".."snpP", samples "s1".."sN".
Dataset gen_genotypes(const SimDesign& d, const std::vector<double>& mafs, std::mt19937_64& rng);

/// Effect size giving `power` for a two-sided level-alpha test in the single
/// term regression: x for main effects, the centred product for interactions.
double effect_for_power(int n, double maf, double power, double alpha = 0.05, bool is_interaction = false,
                        std::optional<double> maf2 = std::nullopt);

struct InteractionEffect {
    int j;
    int k;
    double beta;
    double center_j = 0.0;  // subtracted from the dosage before multiplying
    double center_k = 0.0;
};

struct TraitModel {
    std::vector<double> main_beta;  // length p
    std::vector<InteractionEffect> interactions;
};

// True pairs (0-based, j < k) of a model.
std::vector<std::pair<int, int>> model_pairs(TraitModelKind m);

TraitModel build_trait_model(const SimDesign& d, const std::vector<double>& mafs);

// y = sum main + sum interaction + N(0, 1).
Vector simulate_trait(const Matrix& genotypes, const TraitModel& model, std::mt19937_64& rng);

// Scenario W matrix with an all-ones diagonal.
WeightMatrix scenario_weights(const SimDesign& d, std::mt19937_64& rng);

struct Truth {
    int p = 0;
    std::set<std::pair<int, int>> pairs;  // true interactions
    std::set<int> active;                 // SNPs with main effects
    std::set<int> interacting;            // active SNPs in some true pair

    static Truth from_design(const SimDesign& d);
    bool is_true(const TermId& t) const;
};

struct SimReplicate {
    Dataset data;
    WeightMatrix weights;
    Truth truth;
    TraitModel model;
};

// Replicate r of a design; fully determined by (design, r).
SimReplicate simulate_replicate(const SimDesign& d, int r);

// Selected terms with their refit statistics, as used by evaluate().
struct ReplicateOutcome {
    FitReport report;
    std::vector<TermId> selected;

    // Selected interactions ordered by descending |t|.
    std::vector<TermId> ranked_interactions() const;
};

// Tune on the whole replicate, refit the selection by OLS on the same data.
ReplicateOutcome analyze_replicate(const Dataset& ds, const WeightMatrix& w, const TuneSpec& spec);

/// Two-stage competitor: main-only lasso choosing s1 SNPs, then a plain lasso
/// over those mains and all their pairwise products choosing s2 terms.
ReplicateOutcome stagewise_baseline(const StandardizedDesign& sd, int s1, int s2, const SolverConfig& solver = {});

struct EvalCurves {
    std::vector<double> one_minus_fdr;   // index T-1
    std::vector<double> discovery_rate;  // true among top T, divided by T
    double power_with = 0.0;
    double power_without = 0.0;
    double power_non_active = 0.0;
    int count_with = 0;
    int count_without = 0;
    int count_non_active = 0;
    int replicates = 0;
};

EvalCurves evaluate(const std::vector<ReplicateOutcome>& outcomes, const Truth& truth, int max_threshold = 10);

}  // namespace netlasso
