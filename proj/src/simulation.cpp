#include "netlasso/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

#include "netlasso/stats.hpp"

namespace netlasso {

std::string_view to_string(TraitModelKind m) {
    switch (m) {
        case TraitModelKind::M1: return "M1";
        case TraitModelKind::M2: return "M2";
        case TraitModelKind::M3: return "M3";
    }
    return "?";
}

std::string_view to_string(WScenario w) {
    static constexpr std::string_view names[] = {"W1", "W2", "W3", "W4", "W5", "W6"};
    return names[static_cast<int>(w)];
}

TraitModelKind parse_model(std::string_view s) {
    if (s == "M1") return TraitModelKind::M1;
    if (s == "M2") return TraitModelKind::M2;
    if (s == "M3") return TraitModelKind::M3;
    throw Error(ErrorCode::ParseError, "unknown model '" + std::string(s) + "'", "model");
}

WScenario parse_scenario(std::string_view s) {
    for (int i = 0; i < 6; ++i) {
        if (to_string(static_cast<WScenario>(i)) == s) return static_cast<WScenario>(i);
    }
    throw Error(ErrorCode::ParseError, "unknown W scenario '" + std::string(s) + "'", "w_scenario");
}

void SimDesign::validate() const {
    if (n < 2 || p < 1) throw Error(ErrorCode::InvalidArgument, "design needs n >= 2 and p >= 1", "n");
    if (n_active < 0 || n_active > p) throw Error(ErrorCode::ModelTooLarge, "more active SNPs than columns", "n_active");
    if (!(maf > 0.0 && maf <= 0.5)) throw Error(ErrorCode::InvalidArgument, "maf must be in (0, 0.5]", "maf");
    if (!maf_list.empty() && static_cast<int>(maf_list.size()) != p) {
        throw Error(ErrorCode::InvalidArgument, "maf_list must have p entries", "maf_list");
    }
    for (double m : maf_list) {
        if (!(m > 0.0 && m <= 0.5)) throw Error(ErrorCode::InvalidArgument, "maf must be in (0, 0.5]", "maf_list");
    }
    for (double pw : {main_power, interaction_power}) {
        if (!(pw > 0.0 && pw < 1.0)) throw Error(ErrorCode::InvalidPower, "power must lie in (0, 1)", "power");
    }
    int needed = 0;
    for (const auto& [j, k] : model_pairs(model)) needed = std::max(needed, k + 1);
    if (needed > n_active) throw Error(ErrorCode::ModelTooLarge, "model needs more active SNPs", "model");
    if ((w_scenario == WScenario::W5 || w_scenario == WScenario::W6) && p < 40) {
        throw Error(ErrorCode::ModelTooLarge, "W5/W6 need at least 40 SNPs", "w_scenario");
    }
    if (w_scenario == WScenario::W2 && p < 20) throw Error(ErrorCode::ModelTooLarge, "W2 needs 20 SNPs", "w_scenario");
    if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1", "replicates");
    if (noise_size_min < 2 || noise_size_max < noise_size_min) {
        throw Error(ErrorCode::InvalidArgument, "invalid noise pathway size range", "noise_size_min");
    }
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw Error(ErrorCode::ParseError, "expected a boolean", key);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

SimDesign parse_design(std::istream& in) {
    SimDesign d;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "expected key=value: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "n") d.n = std::stoi(val);
            else if (key == "p") d.p = std::stoi(val);
            else if (key == "n_active") d.n_active = std::stoi(val);
            else if (key == "maf") d.maf = std::stod(val);
            else if (key == "maf_list") {
                d.maf_list.clear();
                std::stringstream ss(val);
                for (std::string tok; std::getline(ss, tok, ',');) d.maf_list.push_back(std::stod(tok));
            } else if (key == "varying_maf") d.varying_maf = parse_bool(val, key);
            else if (key == "model") d.model = parse_model(val);
            else if (key == "main_power") d.main_power = std::stod(val);
            else if (key == "interaction_power") d.interaction_power = std::stod(val);
            else if (key == "marginal_free") d.marginal_free = parse_bool(val, key);
            else if (key == "w_scenario") d.w_scenario = parse_scenario(val);
            else if (key == "replicates") d.replicates = std::stoi(val);
            else if (key == "seed") d.seed = std::stoull(val);
            else if (key == "noise_total_pathways") d.noise_total_pathways = std::stoi(val);
            else if (key == "noise_snps") d.noise_snps = std::stoi(val);
            else if (key == "noise_size_min") d.noise_size_min = std::stoi(val);
            else if (key == "noise_size_max") d.noise_size_max = std::stoi(val);
            else throw Error(ErrorCode::ParseError, "unknown design key", key);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, "bad value '" + val + "'", key);
        }
    }
    d.validate();
    return d;
}

std::string format_design(const SimDesign& d) {
    std::ostringstream os;
    os.precision(10);
    os << "n=" << d.n << "\np=" << d.p << "\nn_active=" << d.n_active << "\nmaf=" << d.maf << '\n';
    if (!d.maf_list.empty()) {
        os << "maf_list=";
        for (std::size_t i = 0; i < d.maf_list.size(); ++i) os << (i ? "," : "") << d.maf_list[i];
        os << '\n';
    }
    os << "varying_maf=" << (d.varying_maf ? 1 : 0) << "\nmodel=" << to_string(d.model)
       << "\nmain_power=" << d.main_power << "\ninteraction_power=" << d.interaction_power
       << "\nmarginal_free=" << (d.marginal_free ? 1 : 0) << "\nw_scenario=" << to_string(d.w_scenario)
       << "\nreplicates=" << d.replicates << "\nseed=" << d.seed << "\nnoise_total_pathways=" << d.noise_total_pathways
       << "\nnoise_snps=" << d.noise_snps << "\nnoise_size_min=" << d.noise_size_min
       << "\nnoise_size_max=" << d.noise_size_max << '\n';
    return os.str();
}

std::vector<double> resolve_mafs(const SimDesign& d, std::mt19937_64& rng) {
    if (!d.maf_list.empty()) return d.maf_list;
    std::vector<double> mafs(static_cast<std::size_t>(d.p), d.maf);
    if (d.varying_maf) {
        // Active SNP i (1-based) gets 10% * ((i - 1) mod 5 + 1); the rest draw uniformly from the same five levels.
        std::uniform_int_distribution<int> level(1, 5);
        for (int j = 0; j < d.p; ++j) {
            mafs[static_cast<std::size_t>(j)] = j < d.n_active ? 0.1 * (j % 5 + 1) : 0.1 * level(rng);
        }
    }
    return mafs;
}

Dataset gen_genotypes(const SimDesign& d, const std::vector<double>& mafs, std::mt19937_64& rng) {
    Dataset ds;
    ds.x.resize(d.n, d.p);
    for (int j = 0; j < d.p; ++j) {
        std::binomial_distribution<int> draw(2, mafs[static_cast<std::size_t>(j)]);
        for (int i = 0; i < d.n; ++i) ds.x(i, j) = draw(rng);
    }
    for (int j = 0; j < d.p; ++j) ds.snp_ids.push_back("snp" + std::to_string(j + 1));
    for (int i = 0; i < d.n; ++i) ds.sample_ids.push_back("s" + std::to_string(i + 1));
    ds.y = Vector::Zero(d.n);
    return ds;
}

double effect_for_power(int n, double maf, double power, double alpha, bool is_interaction,
                        std::optional<double> maf2) {
    if (!(power > 0.0 && power < 1.0)) throw Error(ErrorCode::InvalidPower, "power must lie in (0, 1)", "power");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)", "alpha");
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive", "n");
    auto var = [](double m) {
        if (!(m > 0.0 && m < 1.0)) throw Error(ErrorCode::InvalidArgument, "maf must be in (0, 1)", "maf");
        return 2.0 * m * (1.0 - m);
    };
    double v = var(maf);
    if (is_interaction) v *= var(maf2.value_or(maf));
    const double z = normal_quantile(1.0 - alpha / 2.0) + normal_quantile(power);
    return z / std::sqrt(static_cast<double>(n) * v);
}

std::vector<std::pair<int, int>> model_pairs(TraitModelKind m) {
    std::vector<std::pair<int, int>> out;
    if (m == TraitModelKind::M2) {
        for (int j = 0; j < 5; ++j) {
            for (int k = j + 1; k < 5; ++k) out.emplace_back(j, k);
        }
    } else if (m == TraitModelKind::M3) {
        for (int j = 0; j < 20; j += 2) out.emplace_back(j, j + 1);
    }
    return out;
}

TraitModel build_trait_model(const SimDesign& d, const std::vector<double>& mafs) {
    d.validate();
    TraitModel tm;
    tm.main_beta.assign(static_cast<std::size_t>(d.p), 0.0);
    for (int j = 0; j < d.n_active; ++j) {
        tm.main_beta[static_cast<std::size_t>(j)] =
            effect_for_power(d.n, mafs[static_cast<std::size_t>(j)], d.main_power);
    }
    const auto pairs = model_pairs(d.model);
    std::vector<int> degree(static_cast<std::size_t>(d.p), 0);
    for (const auto& [j, k] : pairs) {
        ++degree[static_cast<std::size_t>(j)];
        ++degree[static_cast<std::size_t>(k)];
    }
    for (const auto& [j, k] : pairs) {
        const double mj = mafs[static_cast<std::size_t>(j)];
        const double mk = mafs[static_cast<std::size_t>(k)];
        const double b = effect_for_power(d.n, mj, d.interaction_power, 0.05, true, mk);
        if (d.marginal_free) {
            // Reversed sign. beta (x_j - a)(x_k - c) adds beta (E x_k - c) to the
            // marginal slope of x_j, so the centres are placed where each SNP's
            // pairs jointly cancel its own main effect.
            const double bj = tm.main_beta[static_cast<std::size_t>(j)];
            const double bk = tm.main_beta[static_cast<std::size_t>(k)];
            const double c_k = 2.0 * mk - bj / (degree[static_cast<std::size_t>(j)] * b);
            const double c_j = 2.0 * mj - bk / (degree[static_cast<std::size_t>(k)] * b);
            tm.interactions.push_back({j, k, -b, c_j, c_k});
        } else {
            tm.interactions.push_back({j, k, b, 0.0, 0.0});
        }
    }
    return tm;
}

Vector simulate_trait(const Matrix& genotypes, const TraitModel& model, std::mt19937_64& rng) {
    const auto p = static_cast<std::size_t>(genotypes.cols());
    if (model.main_beta.size() > p) throw Error(ErrorCode::ModelTooLarge, "trait model needs more SNPs than given");
    Vector y = Vector::Zero(genotypes.rows());
    for (std::size_t j = 0; j < model.main_beta.size(); ++j) {
        if (model.main_beta[j] != 0.0) y.noalias() += model.main_beta[j] * genotypes.col(static_cast<Eigen::Index>(j));
    }
    for (const auto& e : model.interactions) {
        if (e.j >= genotypes.cols() || e.k >= genotypes.cols()) {
            throw Error(ErrorCode::ModelTooLarge, "interaction refers to a missing SNP");
        }
        y.array() += e.beta * (genotypes.col(e.j).array() - e.center_j) * (genotypes.col(e.k).array() - e.center_k);
    }
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise(rng);
    return y;
}

WeightMatrix scenario_weights(const SimDesign& d, std::mt19937_64& rng) {
    d.validate();
    BipartiteMap bm;
    bm.p = d.p;
    auto add = [&](std::vector<int> members) {
        bm.pathway_ids.push_back("pw" + std::to_string(bm.members.size() + 1));
        std::sort(members.begin(), members.end());
        bm.members.push_back(std::move(members));
    };
    auto range = [](int lo, int hi) {
        std::vector<int> v(static_cast<std::size_t>(hi - lo));
        std::iota(v.begin(), v.end(), lo);
        return v;
    };
    auto model_pathways = [&] {
        if (d.model == TraitModelKind::M2) add(range(0, 5));
        if (d.model == TraitModelKind::M3) {
            for (const auto& [j, k] : model_pairs(d.model)) add({j, k});
        }
    };
    switch (d.w_scenario) {
        case WScenario::W1:
        case WScenario::W3: model_pathways(); break;
        case WScenario::W2:
        case WScenario::W4: add(range(0, 20)); break;
        case WScenario::W5: add(range(0, 40)); break;
        case WScenario::W6:
            for (int start : {0, 10}) {
                std::vector<int> members;
                for (int j = start; j < start + 10; ++j) members.push_back(j);
                for (int j = start + 20; j < start + 30; ++j) members.push_back(j);
                add(members);
            }
            break;
    }
    if (d.w_scenario == WScenario::W3 || d.w_scenario == WScenario::W4) {
        // Noise pathways over non-active SNPs, padding up to the pathway total.
        std::vector<int> candidates = range(d.n_active, d.p);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        candidates.resize(std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(std::max(d.noise_snps, 0))));
        std::uniform_int_distribution<int> size_dist(d.noise_size_min, d.noise_size_max);
        while (bm.m() < d.noise_total_pathways && candidates.size() >= 2) {
            const auto size = std::min<std::size_t>(static_cast<std::size_t>(size_dist(rng)), candidates.size());
            std::vector<int> pool = candidates;
            std::shuffle(pool.begin(), pool.end(), rng);
            pool.resize(size);
            add(pool);
        }
    }
    if (bm.m() == 0) return WeightMatrix(std::vector<double>(static_cast<std::size_t>(d.p), 1.0), {});
    return build_weights(build_adjacency(bm), DiagMode::Ones, true);
}

Truth Truth::from_design(const SimDesign& d) {
    Truth t;
    t.p = d.p;
    for (int j = 0; j < d.n_active; ++j) t.active.insert(j);
    for (const auto& pr : model_pairs(d.model)) {
        t.pairs.insert(pr);
        t.interacting.insert(pr.first);
        t.interacting.insert(pr.second);
    }
    return t;
}

bool Truth::is_true(const TermId& t) const {
    if (t.is_main()) return active.count(t.first()) > 0;
    return pairs.count({t.first(), t.second()}) > 0;
}

SimReplicate simulate_replicate(const SimDesign& d, int r) {
    d.validate();
    std::mt19937_64 rng(mix_seed(d.seed, static_cast<std::uint64_t>(r)));
    SimReplicate rep;
    const std::vector<double> mafs = resolve_mafs(d, rng);
    rep.data = gen_genotypes(d, mafs, rng);
    rep.model = build_trait_model(d, mafs);
    rep.data.y = simulate_trait(rep.data.x, rep.model, rng);
    rep.weights = scenario_weights(d, rng);
    rep.truth = Truth::from_design(d);
    return rep;
}

std::vector<TermId> ReplicateOutcome::ranked_interactions() const {
    std::vector<TermId> out;
    for (const auto& t : rank_terms(report)) {
        if (t.is_interaction()) out.push_back(t);
    }
    return out;
}

ReplicateOutcome analyze_replicate(const Dataset& ds, const WeightMatrix& w, const TuneSpec& spec) {
    ReplicateOutcome out;
    out.selected = select_terms(ds, w, spec);
    out.report = refit_dataset(ds, out.selected);
    return out;
}

ReplicateOutcome stagewise_baseline(const StandardizedDesign& sd, int s1, int s2, const SolverConfig& solver) {
    if (s1 < 1 || s1 > sd.p()) throw Error(ErrorCode::InvalidArgument, "s1 must be in [1, p]", "s1");
    if (s2 < 1) throw Error(ErrorCode::InvalidArgument, "s2 must be >= 1", "s2");
    TuneSpec spec;
    spec.c = 0.0;
    spec.s_slack = 0;
    spec.accept_closest = true;
    spec.solver = solver;

    // Stage 1: main effects only.
    const WeightMatrix mains_only(std::vector<double>(static_cast<std::size_t>(sd.p()), 1.0), {});
    spec.s_target = s1;
    const TuneResult stage1 = lambda1_for_target(sd, mains_only, spec, 0.0);
    std::vector<int> kept;
    for (const auto& [t, b] : stage1.solution.coeffs) kept.push_back(t.first());

    // Stage 2: kept mains plus all their products as ordinary lasso columns.
    std::vector<TermId> columns;
    for (int j : kept) columns.push_back(TermId::Main(j));
    for (std::size_t a = 0; a < kept.size(); ++a) {
        for (std::size_t b = a + 1; b < kept.size(); ++b) columns.push_back(TermId::Inter(kept[a], kept[b]));
    }
    Dataset stage2;
    stage2.y = sd.y;
    stage2.x.resize(sd.n(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const TermId& t = columns[c];
        stage2.x.col(static_cast<Eigen::Index>(c)) =
            t.is_main() ? Vector(sd.x.col(t.first())) : interaction_column(sd, t.first(), t.second());
        stage2.snp_ids.push_back(t.label(sd.snp_ids));
    }
    ReplicateOutcome out;
    if (!columns.empty()) {
        const StandardizedDesign sd2 = standardize(stage2);
        const WeightMatrix flat(std::vector<double>(columns.size(), 1.0), {});
        spec.s_target = std::min<int>(s2, static_cast<int>(columns.size()));
        const TuneResult stage2_fit = lambda1_for_target(sd2, flat, spec, 0.0);
        for (const auto& [t, b] : stage2_fit.solution.coeffs) out.selected.push_back(columns[static_cast<std::size_t>(t.first())]);
        std::sort(out.selected.begin(), out.selected.end());
    }

    // Rank by OLS |t| on the original standardized design.
    Dataset refit;
    refit.y = sd.y;
    refit.x = sd.x;
    refit.snp_ids = sd.snp_ids;
    out.report = refit_dataset(refit, out.selected);
    return out;
}

EvalCurves evaluate(const std::vector<ReplicateOutcome>& outcomes, const Truth& truth, int max_threshold) {
    if (max_threshold < 1) throw Error(ErrorCode::InvalidArgument, "max_threshold must be >= 1");
    EvalCurves ev;
    ev.replicates = static_cast<int>(outcomes.size());
    ev.one_minus_fdr.assign(static_cast<std::size_t>(max_threshold), 0.0);
    ev.discovery_rate.assign(static_cast<std::size_t>(max_threshold), 0.0);
    std::vector<int> selected_count(static_cast<std::size_t>(truth.p), 0);
    for (const auto& o : outcomes) {
        const std::vector<TermId> ranked = o.ranked_interactions();
        for (int T = 1; T <= max_threshold; ++T) {
            const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(T), ranked.size());
            int hits = 0;
            for (std::size_t i = 0; i < top; ++i) hits += truth.is_true(ranked[i]) ? 1 : 0;
            ev.one_minus_fdr[static_cast<std::size_t>(T - 1)] += top == 0 ? 1.0 : static_cast<double>(hits) / top;
            ev.discovery_rate[static_cast<std::size_t>(T - 1)] += static_cast<double>(hits) / T;
        }
        for (const auto& t : o.selected) {
            if (t.is_main() && t.first() < truth.p) ++selected_count[static_cast<std::size_t>(t.first())];
        }
    }
    if (!outcomes.empty()) {
        for (auto& v : ev.one_minus_fdr) v /= static_cast<double>(outcomes.size());
        for (auto& v : ev.discovery_rate) v /= static_cast<double>(outcomes.size());
    }
    double with = 0.0, without = 0.0, none = 0.0;
    for (int j = 0; j < truth.p; ++j) {
        const double rate = outcomes.empty() ? 0.0 : static_cast<double>(selected_count[static_cast<std::size_t>(j)]) / outcomes.size();
        if (truth.interacting.count(j)) {
            with += rate;
            ++ev.count_with;
        } else if (truth.active.count(j)) {
            without += rate;
            ++ev.count_without;
        } else {
            none += rate;
            ++ev.count_non_active;
        }
    }
    ev.power_with = ev.count_with ? with / ev.count_with : 0.0;
    ev.power_without = ev.count_without ? without / ev.count_without : 0.0;
    ev.power_non_active = ev.count_non_active ? none / ev.count_non_active : 0.0;
    return ev;
}

}  // namespace netlasso
