#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ptopofl/aggregation.hpp"
#include "ptopofl/clustering.hpp"
#include "ptopofl/common.hpp"
#include "ptopofl/descriptor.hpp"
#include "ptopofl/drift.hpp"
#include "ptopofl/linear_model.hpp"
#include "ptopofl/metrics.hpp"
#include "ptopofl/scenarios.hpp"
#include "ptopofl/trust.hpp"
#include "ptopofl/wasserstein.hpp"

namespace ptopofl {

enum class Method { kPtopofl, kFedavg, kFedprox, kScaffold, kPfedme };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::kPtopofl: return "ptopofl";
        case Method::kFedavg: return "fedavg";
        case Method::kFedprox: return "fedprox";
        case Method::kScaffold: return "scaffold";
        case Method::kPfedme: return "pfedme";
    }
    return "?";
}

inline Method method_from_name(const std::string& name) {
    if (name == "ptopofl") return Method::kPtopofl;
    if (name == "fedavg") return Method::kFedavg;
    if (name == "fedprox") return Method::kFedprox;
    if (name == "scaffold") return Method::kScaffold;
    if (name == "pfedme") return Method::kPfedme;
    throw config_error("unknown method: " + name);
}

struct EngineConfig {
    int rounds = 15;
    int M = 2;
    double beta_blend = 0.3;
    double tau = 2.0;
    int n_sub = 80;
    int L = 20;
    double lambda_softmax = 1.0;
    WeightingMode weighting_mode = WeightingMode::kDescriptorExp;
    bool trust_enabled = true;
    bool exp_factor_enabled = true;
    bool augment = true;
    double theta_drift = 1.0;
    double drift_lr_multiplier = 1.0;
    bool refresh_descriptors_every_round = false;
    TrainConfig train;
    std::uint64_t master_seed = 1;

    void validate(int K) const {
        if (rounds < 1) throw config_error("EngineConfig: rounds >= 1");
        if (M < 1 || M > K) throw config_error("EngineConfig: need 1 <= M <= K");
        if (beta_blend < 0.0 || beta_blend > 1.0) throw config_error("EngineConfig: beta_blend in [0,1]");
        if (n_sub < 2 || n_sub > 200) throw config_error("EngineConfig: n_sub in [2,200]");
        if (L != TopoDescriptor::kCurveLen) throw config_error("EngineConfig: L must be 20");
        if (lambda_softmax < 0.0) throw config_error("EngineConfig: lambda_softmax >= 0");
        if (theta_drift < 0.0) throw config_error("EngineConfig: theta_drift >= 0");
        if (drift_lr_multiplier <= 0.0) throw config_error("EngineConfig: drift_lr_multiplier > 0");
        train.validate();
    }
};

struct RoundRecord {
    int round = 0; // 1-based
    std::string method;
    std::string scenario;
    std::uint64_t seed = 0;
    std::optional<double> auc_global;
    double acc_global = 0.0;
    std::vector<std::optional<double>> per_client_auc;
    std::vector<double> trust;
    std::vector<int> clusters;
    std::vector<double> drift;
    std::int64_t wallclock_ms = 0; // informational; not part of the CSV schema
};

namespace stream_tag {
inline constexpr std::uint64_t kSubsample = 101;
inline constexpr std::uint64_t kShuffle = 102;
} // namespace stream_tag

// One federated run over a generated scenario. Server-side aggregation is a
// deterministic reduction over clients in id order, so results do not depend
// on any scheduling of the (conceptually parallel) local updates.
class Simulation {
public:
    Simulation(GeneratedScenario scenario, Method method, EngineConfig cfg)
        : scenario_(std::move(scenario)), method_(method), cfg_(cfg) {
        const int K = static_cast<int>(scenario_.clients.size());
        cfg_.validate(K);
        model_dim_ = scenario_.cfg.d + (cfg_.augment ? 4 : 0);
        need_descriptors_ = method_ == Method::kPtopofl || cfg_.augment;

        start_models_.assign(static_cast<std::size_t>(K), ModelParams(model_dim_));
        global_model_ = ModelParams(model_dim_);
        descs_.assign(static_cast<std::size_t>(K), TopoDescriptor{});
        h0_diagrams_.assign(static_cast<std::size_t>(K), PersistenceDiagram{});
        history_ = SignatureHistory(K);
        assignment_.M = 1;
        assignment_.labels.assign(static_cast<std::size_t>(K), 0);
        trust_.assign(static_cast<std::size_t>(K), 1.0);
        drift_.assign(static_cast<std::size_t>(K), 0.0);
        if (method_ == Method::kScaffold)
            for (int k = 0; k < K; ++k) variates_.push_back(ControlVariate::zeros(model_dim_));
        if (method_ == Method::kPfedme)
            personalized_.assign(static_cast<std::size_t>(K), ModelParams(model_dim_));

        train_views_.reserve(static_cast<std::size_t>(K));
        test_views_.reserve(static_cast<std::size_t>(K));
        for (const auto& c : scenario_.clients) {
            train_views_.push_back(c.train);
            test_views_.push_back(c.test);
        }
    }

    int clients() const { return static_cast<int>(scenario_.clients.size()); }
    int rounds_done() const { return rounds_done_; }
    const ClusterAssignment& assignment() const { return assignment_; }
    const std::vector<ModelParams>& cluster_models() const { return cluster_models_; }
    const ModelParams& global_model() const { return global_model_; }
    const std::vector<TopoDescriptor>& descriptors() const { return descs_; }
    const SignatureHistory& history() const { return history_; }
    const AggregationPlan& plan() const { return plan_; }

    ModelParams serving_model(int k) const {
        if (method_ == Method::kPtopofl && !cluster_models_.empty())
            return cluster_models_[static_cast<std::size_t>(assignment_.labels[static_cast<std::size_t>(k)])];
        if (method_ == Method::kPfedme) return personalized_[static_cast<std::size_t>(k)];
        return global_model_;
    }

    RoundRecord run_round() {
        const auto t0 = std::chrono::steady_clock::now();
        const int r = rounds_done_;
        const int K = clients();

        if (need_descriptors_ && (r == 0 || cfg_.refresh_descriptors_every_round)) refresh_descriptors(r);
        if (need_descriptors_)
            for (int k = 0; k < K; ++k) history_.record(k, descs_[static_cast<std::size_t>(k)]);

        // local updates, in client order
        std::vector<ModelParams> locals(static_cast<std::size_t>(K), ModelParams(model_dim_));
        std::vector<ControlVariate> new_variates = variates_;
        for (int k = 0; k < K; ++k) {
            TrainConfig tc = cfg_.train;
            if (drift_flagged_.count(k) > 0) tc.learning_rate *= cfg_.drift_lr_multiplier;
            Rng rng = substream(cfg_.master_seed,
                                {stream_tag::kShuffle, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)});
            const ModelParams& start = start_models_[static_cast<std::size_t>(k)];
            const LabeledDataset& data = train_views_[static_cast<std::size_t>(k)];
            switch (method_) {
                case Method::kPtopofl:
                case Method::kFedavg: {
                    locals[static_cast<std::size_t>(k)] =
                        local_update(start, data, tc, LocalMode::kPlain, nullptr, rng).params;
                    break;
                }
                case Method::kFedprox: {
                    locals[static_cast<std::size_t>(k)] =
                        local_update(start, data, tc, LocalMode::kProx, nullptr, rng, &start).params;
                    break;
                }
                case Method::kScaffold: {
                    auto res = local_update(start, data, tc, LocalMode::kScaffold,
                                            &variates_[static_cast<std::size_t>(k)], rng);
                    locals[static_cast<std::size_t>(k)] = res.params;
                    new_variates[static_cast<std::size_t>(k)] = *res.variates;
                    break;
                }
                case Method::kPfedme: {
                    auto res = local_update(start, data, tc, LocalMode::kPfedme, nullptr, rng);
                    locals[static_cast<std::size_t>(k)] = res.params;
                    personalized_[static_cast<std::size_t>(k)] = *res.personalized;
                    break;
                }
            }
        }

        // server-side aggregation
        if (method_ == Method::kPtopofl)
            aggregate_ptopofl(locals, r);
        else
            aggregate_baseline(locals, new_variates);

        // drift tracking on recorded signatures (normalized scale, where the
        // threshold default of 1.0 lives)
        drift_flagged_.clear();
        if (need_descriptors_) {
            bool any = false;
            for (int k = 0; k < K; ++k) {
                drift_[static_cast<std::size_t>(k)] = normalized_drift(history_, k);
                if (drift_[static_cast<std::size_t>(k)] > cfg_.theta_drift) {
                    drift_flagged_.insert(k);
                    any = true;
                }
            }
            if (any && method_ == Method::kPtopofl) recluster_pending_ = true;
        }

        RoundRecord record = evaluate(r);
        record.wallclock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
        ++rounds_done_;
        return record;
    }

    std::vector<RoundRecord> run(int rounds) {
        std::vector<RoundRecord> records;
        records.reserve(static_cast<std::size_t>(rounds));
        for (int r = 0; r < rounds; ++r) records.push_back(run_round());
        return records;
    }

private:
    // The descriptor summarizes the client's full local dataset (it never
    // sees labels), and every client subsamples the same number of points so
    // that count-based descriptor entries stay comparable across clients.
    int effective_n_sub() const {
        int n_min = cfg_.n_sub;
        for (const auto& c : scenario_.clients) n_min = std::min(n_min, c.train.n + c.test.n);
        return std::max(n_min, 2);
    }

    void refresh_descriptors(int round) {
        const int K = clients();
        const int n_sub = effective_n_sub();
        for (int k = 0; k < K; ++k) {
            const auto& client = scenario_.clients[static_cast<std::size_t>(k)];
            PointCloud cloud(client.train.n + client.test.n, client.train.d);
            std::copy(client.train.features.begin(), client.train.features.end(), cloud.xs.begin());
            std::copy(client.test.features.begin(), client.test.features.end(),
                      cloud.xs.begin() + client.train.features.size());
            Rng rng = substream(cfg_.master_seed, {stream_tag::kSubsample, static_cast<std::uint64_t>(k),
                                                   static_cast<std::uint64_t>(round)});
            auto res = descriptor_with_diagrams(cloud, n_sub, cfg_.L, rng);
            descs_[static_cast<std::size_t>(k)] = res.descriptor;
            h0_diagrams_[static_cast<std::size_t>(k)] = res.h0;

            if (cfg_.augment) {
                AugmentStats stats;
                stats.h0_entropy = res.descriptor[TopoDescriptor::kH0Entropy];
                stats.h1_entropy = res.descriptor[TopoDescriptor::kH1Entropy];
                // mid-scale Betti count as a fraction of the subsample size,
                // keeping the augmented column on a trainable scale
                stats.betti_median = res.descriptor[TopoDescriptor::kCurve0 + TopoDescriptor::kCurveLen / 2] /
                                     static_cast<double>(n_sub);
                train_views_[static_cast<std::size_t>(k)] =
                    augment_features(scenario_.clients[static_cast<std::size_t>(k)].train, stats);
                test_views_[static_cast<std::size_t>(k)] =
                    augment_features(scenario_.clients[static_cast<std::size_t>(k)].test, stats);
            }
        }
    }

    void aggregate_ptopofl(const std::vector<ModelParams>& locals, int round) {
        const int K = clients();
        if (round == 0 || recluster_pending_) {
            assignment_ = cluster_clients(descs_, cfg_.M);
            recluster_pending_ = false;
        }
        if (cfg_.trust_enabled) {
            trust_ = trust_scores(descs_, cfg_.tau).trust;
        } else {
            trust_.assign(static_cast<std::size_t>(K), 1.0);
        }

        std::vector<int> sizes;
        sizes.reserve(static_cast<std::size_t>(K));
        for (const auto& c : scenario_.clients) sizes.push_back(c.train.n);

        plan_.assignment = assignment_;
        plan_.beta_blend = cfg_.beta_blend;
        plan_.mode = cfg_.weighting_mode;
        if (cfg_.weighting_mode == WeightingMode::kDescriptorExp) {
            plan_.weights = intra_cluster_weights(descs_, sizes, trust_, assignment_, cfg_.exp_factor_enabled);
        } else {
            // global softmax weights, renormalized inside each cluster
            auto weights = softmax_mode_weights();
            const auto groups = assignment_.members();
            for (const auto& group : groups) {
                double total = 0.0;
                for (int k : group) total += weights[static_cast<std::size_t>(k)];
                for (int k : group) weights[static_cast<std::size_t>(k)] /= total;
            }
            plan_.weights = std::move(weights);
        }

        const auto members = assignment_.members();
        std::vector<ModelParams> cluster_models;
        std::vector<int> cluster_sizes;
        for (const auto& group : members) {
            std::vector<ModelParams> models;
            std::vector<double> w;
            for (int k : group) {
                models.push_back(locals[static_cast<std::size_t>(k)]);
                w.push_back(plan_.weights[static_cast<std::size_t>(k)]);
            }
            cluster_models.push_back(aggregate_cluster(models, w));
            cluster_sizes.push_back(static_cast<int>(group.size()));
        }
        cluster_models_ = blend_clusters(cluster_models, cluster_sizes, plan_.beta_blend);
        for (int k = 0; k < K; ++k)
            start_models_[static_cast<std::size_t>(k)] =
                cluster_models_[static_cast<std::size_t>(assignment_.labels[static_cast<std::size_t>(k)])];
    }

    // Alternate weighting: softmax over 2-Wasserstein H0 distances to the
    // medoid diagram (the client closest to the descriptor barycenter).
    std::vector<double> softmax_mode_weights() const {
        const int K = clients();
        std::vector<double> uniform(static_cast<std::size_t>(K), 1.0 / static_cast<double>(K));
        const TopoDescriptor center = descriptor_barycenter(descs_, uniform);
        int medoid = 0;
        double best = descriptor_distance(descs_[0], center);
        for (int k = 1; k < K; ++k) {
            const double d = descriptor_distance(descs_[static_cast<std::size_t>(k)], center);
            if (d < best) {
                best = d;
                medoid = k;
            }
        }
        std::vector<double> dists(static_cast<std::size_t>(K), 0.0);
        for (int k = 0; k < K; ++k)
            dists[static_cast<std::size_t>(k)] = wasserstein_distance(
                h0_diagrams_[static_cast<std::size_t>(k)], h0_diagrams_[static_cast<std::size_t>(medoid)], 0, 2.0);
        return wasserstein_softmax_weights(dists, cfg_.lambda_softmax);
    }

    void aggregate_baseline(const std::vector<ModelParams>& locals,
                            const std::vector<ControlVariate>& new_variates) {
        const int K = clients();
        std::vector<double> weights(static_cast<std::size_t>(K), 0.0);
        if (method_ == Method::kFedavg || method_ == Method::kFedprox) {
            double total = 0.0;
            for (int k = 0; k < K; ++k) {
                weights[static_cast<std::size_t>(k)] =
                    static_cast<double>(scenario_.clients[static_cast<std::size_t>(k)].train.n);
                total += weights[static_cast<std::size_t>(k)];
            }
            for (auto& w : weights) w /= total;
        } else {
            for (auto& w : weights) w = 1.0 / static_cast<double>(K);
        }
        global_model_ = aggregate_cluster(locals, weights);

        if (method_ == Method::kScaffold) {
            // c_global accumulates the mean of the client control-variate moves
            std::vector<double> delta(static_cast<std::size_t>(model_dim_) + 1, 0.0);
            for (int k = 0; k < K; ++k)
                for (std::size_t j = 0; j < delta.size(); ++j)
                    delta[j] += (new_variates[static_cast<std::size_t>(k)].c_local[j] -
                                 variates_[static_cast<std::size_t>(k)].c_local[j]) /
                                static_cast<double>(K);
            variates_ = new_variates;
            for (auto& cv : variates_)
                for (std::size_t j = 0; j < delta.size(); ++j) cv.c_global[j] += delta[j];
        }
        for (int k = 0; k < K; ++k) start_models_[static_cast<std::size_t>(k)] = global_model_;
    }

    RoundRecord evaluate(int round) const {
        const int K = clients();
        RoundRecord rec;
        rec.round = round + 1;
        rec.method = method_name(method_);
        rec.scenario = scenario_.cfg.name;
        rec.seed = cfg_.master_seed;
        rec.trust = trust_;
        rec.clusters = assignment_.labels;
        rec.drift = drift_;

        std::vector<double> pooled_scores;
        std::vector<int> pooled_labels;
        for (int k = 0; k < K; ++k) {
            const ModelParams model = serving_model(k);
            const LabeledDataset& test = test_views_[static_cast<std::size_t>(k)];
            const auto scores = predict_proba(model, test);
            rec.per_client_auc.push_back(auc_roc(scores, test.labels));
            pooled_scores.insert(pooled_scores.end(), scores.begin(), scores.end());
            pooled_labels.insert(pooled_labels.end(), test.labels.begin(), test.labels.end());
        }
        rec.auc_global = auc_roc(pooled_scores, pooled_labels);
        rec.acc_global = accuracy(pooled_scores, pooled_labels);
        return rec;
    }

    GeneratedScenario scenario_;
    Method method_;
    EngineConfig cfg_;
    int model_dim_ = 0;
    bool need_descriptors_ = false;
    int rounds_done_ = 0;
    bool recluster_pending_ = false;

    std::vector<LabeledDataset> train_views_; // augmented when cfg_.augment
    std::vector<LabeledDataset> test_views_;
    std::vector<TopoDescriptor> descs_;
    std::vector<PersistenceDiagram> h0_diagrams_;
    SignatureHistory history_{0};
    ClusterAssignment assignment_;
    AggregationPlan plan_;
    std::vector<double> trust_;
    std::vector<double> drift_;
    std::set<int> drift_flagged_;
    std::vector<ModelParams> start_models_;
    std::vector<ModelParams> cluster_models_;
    ModelParams global_model_;
    std::vector<ControlVariate> variates_;
    std::vector<ModelParams> personalized_;
};

} // namespace ptopofl
