// Acceptance suite: each criterion prints one [PASS]/[FAIL] line; the binary
// exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ptopofl/experiment.hpp"
#include "ptopofl/privacy.hpp"
#include "ptopofl/wasserstein.hpp"
#include "oracles.hpp"

using namespace ptopofl;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    if (!ok) ++failures;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1
void fedavg_reduction_equality() {
    const auto t0 = std::chrono::steady_clock::now();
    auto sc = ScenarioConfig::healthcare();
    sc.seed = 23;
    const auto scenario = generate_scenario(sc);

    ExperimentConfig base;
    EngineConfig reduced = base.engine(23);
    reduced.M = 1;
    reduced.trust_enabled = false;
    reduced.exp_factor_enabled = false;
    EngineConfig plain = base.engine(23);

    Simulation ptopo(scenario, Method::kPtopofl, reduced);
    Simulation fedavg(scenario, Method::kFedavg, plain);
    double worst = 0.0;
    for (int r = 0; r < 15; ++r) {
        ptopo.run_round();
        fedavg.run_round();
        const auto a = ptopo.cluster_models()[0].to_flat();
        const auto b = fedavg.global_model().to_flat();
        for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
    }
    const double secs = elapsed_s(t0);
    report(1, "FedAvg-reduction parameter equality over 15 rounds", worst <= 1e-10 && secs < 10.0,
           "max.diff=" + format_double(worst) + ", " + format_double(secs) + "s");
}

// ---------------------------------------------------------------- criterion 2
void privacy_numbers() {
    PrivacyProfile implied{100, 20, 21, 48, 0.1};
    const double rho_t = rho_topo(implied);
    const double mi48 = mi_proxy(48, 0.1);
    const double mi210 = mi_proxy(210, 0.1);

    ExperimentConfig cfg;
    const auto dir = std::filesystem::temp_directory_path() / "ptopofl_acceptance_privacy";
    std::filesystem::remove_all(dir);
    const auto summary = run_privacy_report(cfg, dir / "privacy.csv");
    std::filesystem::remove_all(dir);

    const bool ok = std::abs(rho_t - 0.0024) < 1e-3 && std::abs(mi48 - 2.536) < 1e-3 &&
                    std::abs(mi210 - 4.459) < 1e-3 && summary.mean_ratio >= 4.0 && summary.mean_ratio <= 5.0;
    report(2, "privacy formulas reproduce the reference values", ok,
           "rho_topo=" + format_double(rho_t) + ", mi=" + format_double(mi48) + "/" + format_double(mi210) +
               ", scenario-A risk ratio=" + format_double(summary.mean_ratio));
}

// ---------------------------------------------------------------- criterion 3
void softmax_suppression_bound() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string note;
    const std::vector<double> eps_grid = {0.1, 0.2, 0.3, 0.4, 0.5};
    const std::vector<double> lambda_delta_grid = {2.0, 2.5, 3.0, 4.0, 5.0};
    for (double eps : eps_grid)
        for (double ld : lambda_delta_grid) {
            const int K = 20;
            const int advs = static_cast<int>(std::lround(eps * K));
            std::vector<double> dists(static_cast<std::size_t>(K), 0.0);
            for (int k = K - advs; k < K; ++k) dists[static_cast<std::size_t>(k)] = ld;
            const auto w = wasserstein_softmax_weights(dists, 1.0);
            double mass = 0.0;
            for (int k = K - advs; k < K; ++k) mass += w[static_cast<std::size_t>(k)];
            const double bound = eps * std::exp(-ld) / ((1.0 - eps) + eps * std::exp(-ld));
            if (mass > bound + 1e-12) {
                ok = false;
                note = "bound violated at eps=" + format_double(eps) + " ld=" + format_double(ld);
            }
            if (ld >= std::log((1.0 - eps) / eps) && mass > eps * eps + 1e-12) {
                ok = false;
                note = "eps^2 regime violated at eps=" + format_double(eps) + " ld=" + format_double(ld);
            }
        }
    const double secs = elapsed_s(t0);
    report(3, "adversarial softmax mass obeys the suppression bound on a 5x5 grid", ok && secs < 1.0,
           note.empty() ? format_double(secs) + "s" : note);
}

// ---------------------------------------------------------------- criterion 4
void variance_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(31);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(10));
        const int d = 1 + static_cast<int>(rng.below(8));
        std::vector<std::vector<double>> grads;
        std::vector<double> alpha;
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
            std::vector<double> g(static_cast<std::size_t>(d));
            for (auto& v : g) v = 4.0 * rng.normal();
            grads.push_back(std::move(g));
            alpha.push_back(rng.uniform() + 1e-3);
            total += alpha.back();
        }
        for (auto& a : alpha) a /= total;
        const auto [lhs, rhs] = variance_identity_check(grads, alpha);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    const double secs = elapsed_s(t0);
    report(4, "weighted variance identity on 1000 random instances", worst < 1e-9 && secs < 1.0,
           "max |lhs-rhs|=" + format_double(worst) + ", " + format_double(secs) + "s");
}

// ---------------------------------------------------------------- criterion 5
void clustering_stability() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(37);
    const double eta = 0.05;
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const int M = 2 + static_cast<int>(rng.below(2));
        std::vector<TopoDescriptor> descs;
        for (int c = 0; c < M; ++c) {
            TopoDescriptor center{};
            center[c] = 4.0; // inter-cluster gap 4*sqrt(2) >> 2*eta + gamma
            for (int k = 0; k < 3; ++k) {
                TopoDescriptor d = center;
                for (int i = 0; i < TopoDescriptor::kDim; ++i) d[i] += 0.02 * rng.normal() / 7.0;
                descs.push_back(d);
            }
        }
        const auto before = cluster_clients(descs, M);
        auto moved = descs;
        for (auto& d : moved) {
            TopoDescriptor dir{};
            double norm = 0.0;
            for (int i = 0; i < TopoDescriptor::kDim; ++i) {
                dir[i] = rng.normal();
                norm += dir[i] * dir[i];
            }
            const double r = eta * rng.uniform();
            for (int i = 0; i < TopoDescriptor::kDim; ++i) d[i] += dir[i] / std::sqrt(norm) * r;
        }
        ok = cluster_clients(moved, M).labels == before.labels;
    }
    const double secs = elapsed_s(t0);
    report(5, "clustering invariant under eta-perturbations at gap >= 2*eta+gamma", ok && secs < 5.0,
           format_double(secs) + "s");
}

// ---------------------------------------------------------------- criterion 6
void persistence_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(41);
    bool ok = true;
    std::string note;

    // H0 vs MST on 200 random clouds
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(49));
        const auto dist = pairwise_distances(oracles::random_cloud(rng, n, 2 + static_cast<int>(rng.below(4))));
        auto deaths = h0_persistence(dist).finite_deaths(0);
        std::sort(deaths.begin(), deaths.end());
        const auto mst = oracles::prim_mst_weights(dist);
        if (deaths.size() != mst.size()) {
            ok = false;
            note = "H0 cardinality mismatch";
            break;
        }
        for (std::size_t i = 0; i < mst.size(); ++i)
            if (std::abs(deaths[i] - mst[i]) > 1e-12) {
                ok = false;
                note = "H0 death != MST weight";
            }
    }

    // H1 vs exhaustive reduction on all n <= 6 clouds plus 50 n=8 circles
    auto h1_matches = [&](const DistanceMatrix& dist) {
        double max_d = 0.0;
        for (int i = 0; i < dist.n; ++i)
            for (int j = 0; j < dist.n; ++j) max_d = std::max(max_d, dist.at(i, j));
        const auto mine = h1_persistence(dist, max_d);
        const auto oracle = oracles::full_boundary_reduction(dist).h1;
        if (mine.pairs.size() != oracle.pairs.size()) return false;
        for (std::size_t i = 0; i < mine.pairs.size(); ++i)
            if (std::abs(mine.pairs[i].birth - oracle.pairs[i].birth) > 1e-12 ||
                std::abs(mine.pairs[i].death - oracle.pairs[i].death) > 1e-12)
                return false;
        return true;
    };
    for (int n = 3; n <= 6 && ok; ++n)
        for (int trial = 0; trial < 40 && ok; ++trial) {
            if (!h1_matches(pairwise_distances(oracles::random_cloud(rng, n, 2 + static_cast<int>(rng.below(3)))))) {
                ok = false;
                note = "H1 mismatch on n=" + std::to_string(n);
            }
        }
    for (int trial = 0; trial < 50 && ok; ++trial)
        if (!h1_matches(pairwise_distances(oracles::circle_cloud(rng, 8, 0.05)))) {
            ok = false;
            note = "H1 mismatch on circle sample";
        }

    // stability: metric perturbation bounds H0 diagram movement
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const int n = 10 + static_cast<int>(rng.below(15));
        const auto cloud = oracles::random_cloud(rng, n, 3);
        auto jittered = cloud;
        const double r = 0.02 + 0.08 * rng.uniform();
        for (auto& v : jittered.xs) v += rng.uniform(-r, r);
        const auto d1 = pairwise_distances(cloud);
        const auto d2 = pairwise_distances(jittered);
        double eta = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) eta = std::max(eta, std::abs(d1.at(i, j) - d2.at(i, j)));
        const double moved = oracles::bottleneck_distance(h0_persistence(d1), h0_persistence(d2), 0);
        if (moved > eta + 1e-9) {
            ok = false;
            note = "stability violated: moved " + format_double(moved) + " > eta " + format_double(eta);
        }
    }

    const double secs = elapsed_s(t0);
    report(6, "persistence vs MST/exhaustive oracles plus stability", ok && secs < 60.0,
           note.empty() ? format_double(secs) + "s" : note);
}

// ---------------------------------------------------------------- criterion 7
void desk_scale_headline() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    const std::vector<double> rates = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};

    std::vector<double> ptopo_mean(rates.size(), 0.0);
    std::vector<double> fedavg_mean(rates.size(), 0.0);
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
        const int advs = static_cast<int>(std::lround(rates[ri] * 8.0));
        for (std::uint64_t seed : seeds) {
            const auto pt = run_single(cfg, "ptopofl", seed, 0.4, advs);
            const auto fa = run_single(cfg, "fedavg", seed, 0.4, advs);
            ptopo_mean[ri] += *pt.back().auc_global / static_cast<double>(seeds.size());
            fedavg_mean[ri] += *fa.back().auc_global / static_cast<double>(seeds.size());
        }
    }

    // two adversaries at flip 0.4 is the rate-0.25 column; reuse rate 0.3
    // (round(0.3*8) = 2) for the two-adversary comparison
    std::size_t two_adv = 3;
    const bool comparison_ok = ptopo_mean[two_adv] >= fedavg_mean[two_adv];
    const bool at_30_ok = ptopo_mean[3] >= fedavg_mean[3];
    const double rho = oracles::spearman(std::vector<double>(rates.begin(), rates.end()), ptopo_mean);
    const bool monotone_ok = rho <= 0.0;
    const double secs = elapsed_s(t0);

    std::string detail = "ptopofl@2adv=" + format_double(ptopo_mean[two_adv]) +
                         " fedavg@2adv=" + format_double(fedavg_mean[two_adv]) + ", spearman=" + format_double(rho) +
                         ", " + format_double(secs) + "s";
    report(7, "pTopoFL >= FedAvg under attack and degrades monotonically",
           comparison_ok && at_30_ok && monotone_ok && secs < 300.0, detail);
}

// ---------------------------------------------------------------- criterion 8
void metric_oracles() {
    Rng rng(43);
    bool ok = true;
    std::string note;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        std::vector<double> scores;
        std::vector<int> labels;
        bool pos = false, neg = false;
        for (int i = 0; i < 50; ++i) {
            scores.push_back(std::round(rng.uniform() * 25.0) / 25.0);
            labels.push_back(rng.below(2) == 0 ? 0 : 1);
            pos |= labels.back() == 1;
            neg |= labels.back() == 0;
        }
        if (!pos || !neg) continue;
        const auto fast = auc_roc(scores, labels);
        if (std::abs(*fast - oracles::brute_force_auc(scores, labels)) > 1e-12) {
            ok = false;
            note = "auc mismatch";
        }
    }
    for (int trial = 0; trial < 20 && ok; ++trial) {
        const int d = 2 + static_cast<int>(rng.below(8));
        LabeledDataset data(15 + static_cast<int>(rng.below(30)), d);
        for (auto& v : data.features) v = rng.normal();
        for (auto& y : data.labels) y = static_cast<int>(rng.below(2));
        ModelParams params(d), anchor(d);
        for (auto& w : params.weights) w = 0.5 * rng.normal();
        params.bias = 0.3 * rng.normal();
        for (auto& w : anchor.weights) w = 0.5 * rng.normal();
        TrainConfig tc;
        tc.prox_mu = trial % 2 == 0 ? 0.1 : 0.0;
        const ModelParams* global = tc.prox_mu > 0.0 ? &anchor : nullptr;
        const auto [loss, grad] = loss_and_gradient(params, data, tc, global);
        (void)loss;
        const auto numeric = oracles::finite_difference_gradient(
            [&](const ModelParams& p) { return loss_and_gradient(p, data, tc, global).first; }, params);
        double scale = 1.0, worst = 0.0;
        for (std::size_t j = 0; j < numeric.size(); ++j) {
            scale = std::max(scale, std::abs(numeric[j]));
            worst = std::max(worst, std::abs(grad[j] - numeric[j]));
        }
        if (worst / scale >= 1e-5) {
            ok = false;
            note = "gradient rel err " + format_double(worst / scale);
        }
    }
    report(8, "AUC pairwise oracle and finite-difference gradients", ok, note.empty() ? "ok" : note);
}

// ---------------------------------------------------------------- criterion 9
void csv_determinism() {
    ExperimentConfig cfg;
    cfg.rounds = 2;
    cfg.seeds = {1};
    cfg.n_sub = 40;
    cfg.train.local_epochs = 1;
    cfg.attack_rates = {0.0, 0.5};
    const auto dir = std::filesystem::temp_directory_path() / "ptopofl_acceptance_det";
    std::filesystem::remove_all(dir);

    bool ok = true;
    std::string note;
    auto check_pair = [&](const std::string& name, const std::function<void(const std::filesystem::path&)>& fn) {
        const auto p1 = dir / (name + "_1.csv");
        const auto p2 = dir / (name + "_2.csv");
        fn(p1);
        fn(p2);
        if (read_file(p1) != read_file(p2)) {
            ok = false;
            note = name + " differs between runs";
        }
    };
    check_pair("compare", [&](const std::filesystem::path& p) { run_compare(cfg, p); });
    check_pair("sweep", [&](const std::filesystem::path& p) { run_sweep(cfg, p); });
    check_pair("ablation", [&](const std::filesystem::path& p) { run_ablation(cfg, p); });
    check_pair("drift", [&](const std::filesystem::path& p) { run_drift_study(cfg, p, 3); });
    check_pair("privacy", [&](const std::filesystem::path& p) { run_privacy_report(cfg, p); });
    std::filesystem::remove_all(dir);
    report(9, "every subcommand's CSV is byte-identical across reruns", ok, note.empty() ? "ok" : note);
}

} // namespace

int main() {
    fedavg_reduction_equality();
    privacy_numbers();
    softmax_suppression_bound();
    variance_identity();
    clustering_stability();
    persistence_correctness();
    desk_scale_headline();
    metric_oracles();
    csv_determinism();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 9 acceptance criteria passed\n");
    return 0;
}
