#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptopofl/common.hpp"
#include "ptopofl/engine.hpp"
#include "ptopofl/io.hpp"
#include "ptopofl/privacy.hpp"
#include "ptopofl/scenarios.hpp"

namespace ptopofl {

using json = nlohmann::json;

// Flat experiment configuration; every field has a default mirroring the
// standard hyperparameter table, and unknown JSON keys are rejected.
struct ExperimentConfig {
    ScenarioConfig scenario;
    std::string method = "ptopofl";
    int rounds = 15;
    int M = 2;
    double beta_blend = 0.3;
    double tau = 2.0;
    int n_sub = 80;
    int L = 20;
    double lambda_softmax = 1.0;
    std::string weighting_mode = "descriptor_exp"; // descriptor_exp | wasserstein_softmax
    TrainConfig train;
    std::uint64_t master_seed = 1;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string output_dir = "out";
    // extensions beyond the core table
    bool trust_enabled = true;
    bool exp_factor_enabled = true;
    bool augment = true;
    double theta_drift = 1.0;
    double drift_lr_multiplier = 1.0;
    std::string descriptor_refresh = "round0"; // round0 | every_round
    std::vector<double> attack_rates{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    double alpha_c = 0.1;

    EngineConfig engine(std::uint64_t seed) const {
        EngineConfig cfg;
        cfg.rounds = rounds;
        cfg.M = M;
        cfg.beta_blend = beta_blend;
        cfg.tau = tau;
        cfg.n_sub = n_sub;
        cfg.L = L;
        cfg.lambda_softmax = lambda_softmax;
        cfg.weighting_mode = weighting_mode == "wasserstein_softmax" ? WeightingMode::kWassersteinSoftmax
                                                                     : WeightingMode::kDescriptorExp;
        cfg.trust_enabled = trust_enabled;
        cfg.exp_factor_enabled = exp_factor_enabled;
        cfg.augment = augment;
        cfg.theta_drift = theta_drift;
        cfg.drift_lr_multiplier = drift_lr_multiplier;
        cfg.refresh_descriptors_every_round = descriptor_refresh == "every_round";
        cfg.train = train;
        cfg.master_seed = seed;
        return cfg;
    }

    void validate() const {
        scenario.validate();
        method_from_name(method);
        if (weighting_mode != "descriptor_exp" && weighting_mode != "wasserstein_softmax")
            throw config_error("weighting_mode must be descriptor_exp or wasserstein_softmax");
        if (descriptor_refresh != "round0" && descriptor_refresh != "every_round")
            throw config_error("descriptor_refresh must be round0 or every_round");
        if (seeds.empty()) throw config_error("seeds must not be empty");
        for (double r : attack_rates)
            if (r < 0.0 || r > 0.5) throw config_error("attack_rates must lie in [0, 0.5]");
        if (alpha_c < 0.0) throw config_error("alpha_c >= 0");
        engine(master_seed).validate(scenario.K);
    }
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                                const std::string& context) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const auto& key : allowed)
            if (item.key() == key) {
                ok = true;
                break;
            }
        if (!ok) throw config_error("unknown config key '" + item.key() + "' in " + context);
    }
}

template <typename T>
void load_field(const json& obj, const char* key, T& into) {
    if (!obj.contains(key)) return;
    try {
        into = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline ScenarioConfig scenario_from_json(const json& obj) {
    reject_unknown_keys(obj,
                        {"name", "K", "d", "d_informative", "size_range", "positive_rate_range",
                         "adversarial_ids", "flip_rate", "seed"},
                        "scenario");
    ScenarioConfig cfg;
    std::string name = cfg.name;
    load_field(obj, "name", name);
    cfg = name == "benchmark" ? ScenarioConfig::benchmark() : ScenarioConfig::healthcare();
    cfg.name = name;
    load_field(obj, "K", cfg.K);
    load_field(obj, "d", cfg.d);
    load_field(obj, "d_informative", cfg.d_informative);
    if (obj.contains("size_range")) {
        auto v = obj.at("size_range").get<std::vector<int>>();
        if (v.size() != 2) throw config_error("size_range must have 2 entries");
        cfg.size_range = {v[0], v[1]};
    }
    if (obj.contains("positive_rate_range")) {
        auto v = obj.at("positive_rate_range").get<std::vector<double>>();
        if (v.size() != 2) throw config_error("positive_rate_range must have 2 entries");
        cfg.positive_rate_range = {v[0], v[1]};
    }
    if (obj.contains("adversarial_ids")) {
        auto v = obj.at("adversarial_ids").get<std::vector<int>>();
        cfg.adversarial_ids = std::set<int>(v.begin(), v.end());
    }
    load_field(obj, "flip_rate", cfg.flip_rate);
    load_field(obj, "seed", cfg.seed);
    return cfg;
}

inline TrainConfig train_from_json(const json& obj) {
    reject_unknown_keys(obj,
                        {"learning_rate", "local_epochs", "batch_size", "l2_reg", "prox_mu",
                         "pfedme_lambda", "pfedme_inner_steps", "pfedme_outer_lr"},
                        "train");
    TrainConfig cfg;
    load_field(obj, "learning_rate", cfg.learning_rate);
    load_field(obj, "local_epochs", cfg.local_epochs);
    load_field(obj, "batch_size", cfg.batch_size);
    load_field(obj, "l2_reg", cfg.l2_reg);
    load_field(obj, "prox_mu", cfg.prox_mu);
    load_field(obj, "pfedme_lambda", cfg.pfedme_lambda);
    load_field(obj, "pfedme_inner_steps", cfg.pfedme_inner_steps);
    load_field(obj, "pfedme_outer_lr", cfg.pfedme_outer_lr);
    return cfg;
}

} // namespace detail

inline ExperimentConfig config_from_json(const json& obj) {
    detail::reject_unknown_keys(
        obj,
        {"scenario", "method", "rounds", "M", "beta_blend", "tau", "n_sub", "L", "lambda_softmax",
         "weighting_mode", "train", "master_seed", "seeds", "output_dir", "trust_enabled",
         "exp_factor_enabled", "augment", "theta_drift", "drift_lr_multiplier", "descriptor_refresh",
         "attack_rates", "alpha_c"},
        "config");
    ExperimentConfig cfg;
    if (obj.contains("scenario")) cfg.scenario = detail::scenario_from_json(obj.at("scenario"));
    detail::load_field(obj, "method", cfg.method);
    detail::load_field(obj, "rounds", cfg.rounds);
    detail::load_field(obj, "M", cfg.M);
    detail::load_field(obj, "beta_blend", cfg.beta_blend);
    detail::load_field(obj, "tau", cfg.tau);
    detail::load_field(obj, "n_sub", cfg.n_sub);
    detail::load_field(obj, "L", cfg.L);
    detail::load_field(obj, "lambda_softmax", cfg.lambda_softmax);
    detail::load_field(obj, "weighting_mode", cfg.weighting_mode);
    if (obj.contains("train")) cfg.train = detail::train_from_json(obj.at("train"));
    detail::load_field(obj, "master_seed", cfg.master_seed);
    detail::load_field(obj, "seeds", cfg.seeds);
    detail::load_field(obj, "output_dir", cfg.output_dir);
    detail::load_field(obj, "trust_enabled", cfg.trust_enabled);
    detail::load_field(obj, "exp_factor_enabled", cfg.exp_factor_enabled);
    detail::load_field(obj, "augment", cfg.augment);
    detail::load_field(obj, "theta_drift", cfg.theta_drift);
    detail::load_field(obj, "drift_lr_multiplier", cfg.drift_lr_multiplier);
    detail::load_field(obj, "descriptor_refresh", cfg.descriptor_refresh);
    detail::load_field(obj, "attack_rates", cfg.attack_rates);
    detail::load_field(obj, "alpha_c", cfg.alpha_c);
    cfg.validate();
    return cfg;
}

// JSON form of the descriptor wire payload: a flat array of 48 numbers.
inline json descriptor_to_json(const TopoDescriptor& d) {
    json arr = json::array();
    for (int i = 0; i < TopoDescriptor::kDim; ++i) arr.push_back(d[i]);
    return arr;
}

inline TopoDescriptor descriptor_from_json(const json& arr) {
    if (!arr.is_array() || arr.size() != TopoDescriptor::kDim)
        throw input_error("descriptor_from_json: expected an array of 48 numbers");
    TopoDescriptor d;
    for (int i = 0; i < TopoDescriptor::kDim; ++i) d[i] = arr.at(static_cast<std::size_t>(i)).get<double>();
    return d;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    json obj;
    try {
        obj = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw config_error("cannot parse config " + path.string() + ": " + e.what());
    }
    return config_from_json(obj);
}

inline const char* kRoundCsvHeader =
    "round,method,scenario,seed,auc_global,acc_global,per_client_auc,trust,clusters,drift";

inline std::string round_record_csv(const RoundRecord& rec) {
    std::string row;
    row += std::to_string(rec.round);
    row += ',';
    row += rec.method;
    row += ',';
    row += rec.scenario;
    row += ',';
    row += std::to_string(rec.seed);
    row += ',';
    row += format_optional(rec.auc_global);
    row += ',';
    row += format_double(rec.acc_global);
    row += ',';
    row += join(rec.per_client_auc, ';', format_optional);
    row += ',';
    row += join(rec.trust, ';', format_double);
    row += ',';
    row += join(rec.clusters, ';', [](int v) { return std::to_string(v); });
    row += ',';
    row += join(rec.drift, ';', format_double);
    return row;
}

// One (scenario seed, master seed) = the run seed; both are replaced by it so
// multi-seed protocols vary data and training noise together.
inline std::vector<RoundRecord> run_single(const ExperimentConfig& cfg, const std::string& method,
                                           std::uint64_t seed, double flip_rate_override = -1.0,
                                           int adversary_count_override = -1) {
    ScenarioConfig sc = cfg.scenario;
    sc.seed = seed;
    if (flip_rate_override >= 0.0) sc.flip_rate = flip_rate_override;
    if (adversary_count_override >= 0) {
        sc.adversarial_ids.clear();
        for (int a = 0; a < adversary_count_override; ++a) sc.adversarial_ids.insert(sc.K - 1 - a);
    }
    Simulation sim(generate_scenario(sc), method_from_name(method), cfg.engine(seed));
    return sim.run(cfg.rounds);
}

// Single-method experiment; writes a CSV when out_path is non-empty.
inline std::vector<RoundRecord> run_experiment(const ExperimentConfig& cfg,
                                               const std::filesystem::path& out_path = {}) {
    cfg.validate();
    std::vector<RoundRecord> records;
    std::string csv = std::string(kRoundCsvHeader) + "\n";
    try {
        for (std::uint64_t seed : cfg.seeds) {
            auto rows = run_single(cfg, cfg.method, seed);
            for (const auto& r : rows) csv += round_record_csv(r) + "\n";
            records.insert(records.end(), rows.begin(), rows.end());
        }
    } catch (const std::exception& e) {
        if (!out_path.empty())
            atomic_write(out_path.string() + ".partial", std::string("aborted: ") + e.what() + "\n");
        throw;
    }
    if (!out_path.empty()) atomic_write(out_path, csv);
    return records;
}

inline const std::vector<std::string>& all_methods() {
    static const std::vector<std::string> methods = {"ptopofl", "fedavg", "fedprox", "scaffold", "pfedme"};
    return methods;
}

// All five methods x all seeds on the configured scenario.
inline void run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_path) {
    cfg.validate();
    std::string csv = std::string(kRoundCsvHeader) + "\n";
    try {
        for (const auto& method : all_methods())
            for (std::uint64_t seed : cfg.seeds)
                for (const auto& r : run_single(cfg, method, seed)) csv += round_record_csv(r) + "\n";
    } catch (const std::exception& e) {
        atomic_write(out_path.string() + ".partial", std::string("aborted: ") + e.what() + "\n");
        throw;
    }
    atomic_write(out_path, csv);
}

// Label-flip sweep: one run per (attack rate, method, seed); the adversary
// count is round(rate * K), assigned to the highest client ids.
inline void run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_path) {
    cfg.validate();
    std::string csv = std::string("attack_rate,") + kRoundCsvHeader + "\n";
    try {
        for (double rate : cfg.attack_rates) {
            const int adversaries =
                static_cast<int>(std::lround(rate * static_cast<double>(cfg.scenario.K)));
            for (const auto& method : all_methods())
                for (std::uint64_t seed : cfg.seeds)
                    for (const auto& r : run_single(cfg, method, seed, cfg.scenario.flip_rate, adversaries))
                        csv += format_double(rate) + "," + round_record_csv(r) + "\n";
        }
    } catch (const std::exception& e) {
        atomic_write(out_path.string() + ".partial", std::string("aborted: ") + e.what() + "\n");
        throw;
    }
    atomic_write(out_path, csv);
}

// Component ablation under identical seeds. The no_clustering variant switches
// off the whole topology path (M=1, trust off, exp factor off), which is the
// configuration that collapses to FedAvg.
inline void run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& out_path) {
    cfg.validate();
    if (cfg.method != "ptopofl") throw config_error("ablation requires method=ptopofl");
    struct Variant {
        std::string name;
        int M;
        double beta;
        bool trust;
        bool exp_factor;
    };
    const std::vector<Variant> variants = {
        {"full", cfg.M, cfg.beta_blend, cfg.trust_enabled, cfg.exp_factor_enabled},
        {"no_clustering", 1, cfg.beta_blend, false, false},
        {"no_blending", cfg.M, 0.0, cfg.trust_enabled, cfg.exp_factor_enabled},
        {"no_trust", cfg.M, cfg.beta_blend, false, cfg.exp_factor_enabled},
    };
    std::string csv = std::string("variant,") + kRoundCsvHeader + "\n";
    try {
        for (const auto& v : variants) {
            ExperimentConfig vc = cfg;
            vc.M = v.M;
            vc.beta_blend = v.beta;
            vc.trust_enabled = v.trust;
            vc.exp_factor_enabled = v.exp_factor;
            for (std::uint64_t seed : cfg.seeds)
                for (const auto& r : run_single(vc, "ptopofl", seed)) csv += v.name + "," + round_record_csv(r) + "\n";
        }
    } catch (const std::exception& e) {
        atomic_write(out_path.string() + ".partial", std::string("aborted: ") + e.what() + "\n");
        throw;
    }
    atomic_write(out_path, csv);
}

// Signature stability study: descriptors recomputed every round so the drift
// and entropy trajectories are non-trivial.
inline void run_drift_study(const ExperimentConfig& cfg, const std::filesystem::path& out_path,
                            int rounds = 20) {
    cfg.validate();
    ExperimentConfig dc = cfg;
    dc.rounds = rounds;
    dc.descriptor_refresh = "every_round";
    std::string csv = "scenario,seed,round,client,h0_entropy,h1_entropy,drift\n";
    try {
        for (std::uint64_t seed : dc.seeds) {
            ScenarioConfig sc = dc.scenario;
            sc.seed = seed;
            Simulation sim(generate_scenario(sc), method_from_name(dc.method), dc.engine(seed));
            for (int r = 0; r < dc.rounds; ++r) {
                const RoundRecord rec = sim.run_round();
                for (int k = 0; k < sim.clients(); ++k) {
                    const auto& desc = sim.descriptors()[static_cast<std::size_t>(k)];
                    csv += dc.scenario.name + "," + std::to_string(seed) + "," + std::to_string(rec.round) +
                           "," + std::to_string(k) + "," +
                           format_double(desc[TopoDescriptor::kH0Entropy]) + "," +
                           format_double(desc[TopoDescriptor::kH1Entropy]) + "," +
                           format_double(rec.drift[static_cast<std::size_t>(k)]) + "\n";
                }
            }
        }
    } catch (const std::exception& e) {
        atomic_write(out_path.string() + ".partial", std::string("aborted: ") + e.what() + "\n");
        throw;
    }
    atomic_write(out_path, csv);
}

struct PrivacySummary {
    double mean_rho_grad = 0.0;
    double mean_rho_topo = 0.0;
    double mean_ratio = 0.0;
};

// Per-client reconstruction-risk table for the configured scenario. p is the
// parameter count of the base d-feature logistic model; the topology-derived
// augmentation columns are a local preprocessing step and are not part of the
// gradient-transmission comparison.
inline PrivacySummary run_privacy_report(const ExperimentConfig& cfg,
                                         const std::filesystem::path& out_path) {
    cfg.validate();
    ScenarioConfig sc = cfg.scenario;
    sc.seed = cfg.seeds.front();
    const auto scenario = generate_scenario(sc);
    std::string csv = "client_id,n,d,p,rho_grad,rho_topo,mi_grad,mi_topo,risk_ratio\n";
    PrivacySummary summary;
    const int p = sc.d + 1;
    for (int k = 0; k < sc.K; ++k) {
        PrivacyProfile profile;
        profile.n = scenario.clients[static_cast<std::size_t>(k)].train.n +
                    scenario.clients[static_cast<std::size_t>(k)].test.n;
        profile.d = sc.d;
        profile.p = p;
        profile.alpha_c = cfg.alpha_c;
        const double rg = rho_gradient(profile);
        const double rt = rho_topo(profile);
        const double ratio = rt > 0.0 ? rg / rt : 0.0;
        summary.mean_rho_grad += rg / static_cast<double>(sc.K);
        summary.mean_rho_topo += rt / static_cast<double>(sc.K);
        summary.mean_ratio += ratio / static_cast<double>(sc.K);
        csv += std::to_string(k) + "," + std::to_string(profile.n) + "," + std::to_string(profile.d) +
               "," + std::to_string(p) + "," + format_double(rg) + "," + format_double(rt) + "," +
               format_double(mi_proxy(p, cfg.alpha_c)) + "," +
               format_double(mi_proxy(profile.m, cfg.alpha_c)) + "," + format_double(ratio) + "\n";
    }
    csv += "summary,,,," + format_double(summary.mean_rho_grad) + "," +
           format_double(summary.mean_rho_topo) + ",,," + format_double(summary.mean_ratio) + "\n";
    atomic_write(out_path, csv);
    return summary;
}

// Per-client dataset export: d feature columns plus the label, train rows
// followed by test rows.
inline void export_datasets(const GeneratedScenario& scenario, const std::filesystem::path& dir) {
    for (std::size_t k = 0; k < scenario.clients.size(); ++k) {
        std::string csv;
        for (int j = 0; j < scenario.cfg.d; ++j) csv += "f" + std::to_string(j) + ",";
        csv += "label\n";
        auto dump = [&](const LabeledDataset& data) {
            for (int i = 0; i < data.n; ++i) {
                for (int j = 0; j < data.d; ++j) csv += format_double(data.x(i, j)) + ",";
                csv += std::to_string(data.labels[static_cast<std::size_t>(i)]) + "\n";
            }
        };
        dump(scenario.clients[k].train);
        dump(scenario.clients[k].test);
        atomic_write(dir / ("client_" + std::to_string(k) + ".csv"), csv);
    }
}

} // namespace ptopofl
