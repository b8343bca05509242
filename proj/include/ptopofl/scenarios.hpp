#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/linear_model.hpp"
#include "ptopofl/rng.hpp"

namespace ptopofl {

// Stream tags for the per-(seed, client) substreams.
namespace stream_tag {
inline constexpr std::uint64_t kTemplate = 1;
inline constexpr std::uint64_t kSize = 2;
inline constexpr std::uint64_t kMeans = 3;
inline constexpr std::uint64_t kFeatures = 4;
inline constexpr std::uint64_t kLabels = 5;
inline constexpr std::uint64_t kSplit = 6;
inline constexpr std::uint64_t kFlip = 7;
inline constexpr std::uint64_t kRate = 8;
} // namespace stream_tag

struct ScenarioConfig {
    std::string name = "healthcare"; // healthcare | benchmark
    int K = 8;
    int d = 20;
    int d_informative = 10;
    std::pair<int, int> size_range{60, 250};
    std::pair<double, double> positive_rate_range{0.10, 0.45};
    std::set<int> adversarial_ids{6, 7};
    double flip_rate = 0.4;
    std::uint64_t seed = 1;

    static ScenarioConfig healthcare() { return ScenarioConfig{}; }

    static ScenarioConfig benchmark() {
        ScenarioConfig cfg;
        cfg.name = "benchmark";
        cfg.K = 10;
        cfg.d = 20;
        cfg.d_informative = 12;
        cfg.positive_rate_range = {0.1, 0.9};
        cfg.adversarial_ids = {};
        cfg.flip_rate = 0.0;
        return cfg;
    }

    void validate() const {
        if (name != "healthcare" && name != "benchmark")
            throw config_error("ScenarioConfig: name must be healthcare or benchmark");
        if (K < 2) throw config_error("ScenarioConfig: K >= 2");
        if (d < 1 || d_informative < 1 || d_informative > d)
            throw config_error("ScenarioConfig: need 1 <= d_informative <= d");
        if (size_range.first < 8 || size_range.second < size_range.first)
            throw config_error("ScenarioConfig: bad size_range");
        if (positive_rate_range.first <= 0.0 || positive_rate_range.second >= 1.0 ||
            positive_rate_range.second < positive_rate_range.first)
            throw config_error("ScenarioConfig: positive_rate_range must lie inside (0,1)");
        if (flip_rate < 0.0 || flip_rate > 1.0) throw config_error("ScenarioConfig: flip_rate in [0,1]");
        for (int a : adversarial_ids)
            if (a < 0 || a >= K) throw config_error("ScenarioConfig: adversarial id out of range");
    }
};

struct ClientData {
    LabeledDataset train;
    LabeledDataset test;
    int template_id = 0;
    bool adversarial = false;
};

struct GeneratedScenario {
    ScenarioConfig cfg;
    std::vector<ClientData> clients;
};

// Row indices to poison: a flip_rate fraction rounded to nearest, drawn
// without replacement.
inline std::vector<int> select_flip_rows(int n, double flip_rate, Rng& rng) {
    const int count = static_cast<int>(std::lround(flip_rate * static_cast<double>(n)));
    auto rows = rng.sample_without_replacement(n, std::clamp(count, 0, n));
    std::sort(rows.begin(), rows.end());
    return rows;
}

inline LabeledDataset apply_label_flip(const LabeledDataset& data, double flip_rate, Rng& rng) {
    if (flip_rate < 0.0 || flip_rate > 1.0) throw input_error("apply_label_flip: flip_rate in [0,1]");
    LabeledDataset out = data;
    for (int r : select_flip_rows(data.n, flip_rate, rng))
        out.labels[static_cast<std::size_t>(r)] = 1 - out.labels[static_cast<std::size_t>(r)];
    return out;
}

namespace detail {

// Gaussian mixture layout per template: the two templates differ in component
// count and radius, which is what the topological descriptor actually sees.
struct TemplateSpec {
    std::vector<std::vector<double>> component_means; // G x d_informative
    std::vector<double> teacher_direction;            // d_informative
};

inline TemplateSpec make_template(const ScenarioConfig& cfg, int template_id) {
    Rng rng = substream(cfg.seed, {stream_tag::kTemplate, static_cast<std::uint64_t>(template_id)});
    // Template 0 is a compact two-lump cloud; template 1 stretches its
    // components across nested radii, so the two produce distinct
    // connectivity profiles (sharp vs. gradual Betti-curve decay).
    const int components = template_id == 0 ? 2 : 6;
    TemplateSpec spec;
    for (int c = 0; c < components; ++c) {
        const double radius = template_id == 0 ? 2.0 : 3.0 + 3.0 * static_cast<double>(c);
        std::vector<double> dir(static_cast<std::size_t>(cfg.d_informative), 0.0);
        double norm = 0.0;
        for (auto& v : dir) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(std::max(norm, 1e-12));
        for (auto& v : dir) v = v / norm * radius;
        spec.component_means.push_back(std::move(dir));
    }
    spec.teacher_direction.assign(static_cast<std::size_t>(cfg.d_informative), 0.0);
    double norm = 0.0;
    for (auto& v : spec.teacher_direction) {
        v = rng.normal();
        norm += v * v;
    }
    norm = std::sqrt(std::max(norm, 1e-12));
    for (auto& v : spec.teacher_direction) v /= norm;
    return spec;
}

// Intercept such that the realized positive rate lands within +/-2% of the
// target; the label draws u_i are fixed first so the rate is a monotone step
// function of the intercept and bisection terminates.
inline double fit_intercept(const std::vector<double>& logits, const std::vector<double>& u,
                            double target) {
    const double n = static_cast<double>(logits.size());
    auto rate = [&](double b) {
        int pos = 0;
        for (std::size_t i = 0; i < logits.size(); ++i)
            if (u[i] < sigmoid(logits[i] + b)) ++pos;
        return static_cast<double>(pos) / n;
    };
    double lo = -30.0, hi = 30.0;
    for (int iter = 0; iter < 50; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double r = rate(mid);
        if (std::abs(r - target) <= 0.02) return mid;
        if (r < target)
            lo = mid;
        else
            hi = mid;
    }
    throw generation_error("generate_scenario: could not match positive rate target");
}

} // namespace detail

// Number of informative dims shifted on poisoned rows, and the shift size in
// units of the component standard deviation. The shift has to clear the
// natural inter-template descriptor spread, otherwise the poisoned cloud is
// indistinguishable from an honest one.
inline constexpr int kAdversaryShiftDims = 5;
inline constexpr double kAdversaryShift = 8.0;

// Deterministic synthetic scenario: per-client Gaussian-mixture features on a
// per-template layout, a template-level logistic teacher with the intercept
// bisected to the client's target positive rate, a 25% held-out split, and
// label-flip poisoning (with a feature shift on the poisoned rows in the
// healthcare scenario) for adversarial clients.
inline GeneratedScenario generate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    GeneratedScenario scenario;
    scenario.cfg = cfg;

    const detail::TemplateSpec templates[2] = {detail::make_template(cfg, 0), detail::make_template(cfg, 1)};
    const int first_template_count = (cfg.K + 1) / 2;

    for (int k = 0; k < cfg.K; ++k) {
        const int t = k < first_template_count ? 0 : 1;
        const auto& tmpl = templates[static_cast<std::size_t>(t)];
        const auto ku = static_cast<std::uint64_t>(k);

        Rng size_rng = substream(cfg.seed, {stream_tag::kSize, ku});
        const int n = static_cast<int>(size_rng.uniform_int(cfg.size_range.first, cfg.size_range.second));

        // client-specific jitter of the template component means
        Rng means_rng = substream(cfg.seed, {stream_tag::kMeans, ku});
        auto means = tmpl.component_means;
        for (auto& m : means)
            for (auto& v : m) v += 0.25 * means_rng.normal();

        Rng feat_rng = substream(cfg.seed, {stream_tag::kFeatures, ku});
        LabeledDataset full(n, cfg.d);
        for (int i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(feat_rng.below(means.size()));
            for (int j = 0; j < cfg.d_informative; ++j)
                full.x(i, j) = means[c][static_cast<std::size_t>(j)] + feat_rng.normal();
            for (int j = cfg.d_informative; j < cfg.d; ++j) full.x(i, j) = feat_rng.normal();
        }

        // teacher logits, rescaled to a fixed spread so label noise is
        // comparable across clients
        std::vector<double> logits(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double z = 0.0;
            for (int j = 0; j < cfg.d_informative; ++j)
                z += tmpl.teacher_direction[static_cast<std::size_t>(j)] * full.x(i, j);
            logits[static_cast<std::size_t>(i)] = z;
        }
        double mean_z = 0.0;
        for (double z : logits) mean_z += z;
        mean_z /= static_cast<double>(n);
        double var_z = 0.0;
        for (double z : logits) var_z += (z - mean_z) * (z - mean_z);
        const double std_z = std::sqrt(var_z / static_cast<double>(n));
        if (std_z > 1e-9)
            for (auto& z : logits) z = (z - mean_z) * (2.2 / std_z);

        Rng label_rng = substream(cfg.seed, {stream_tag::kLabels, ku});
        std::vector<double> u(static_cast<std::size_t>(n), 0.0);
        for (auto& v : u) v = label_rng.uniform();
        Rng rate_rng = substream(cfg.seed, {stream_tag::kRate, ku});
        const double target =
            rate_rng.uniform(cfg.positive_rate_range.first, cfg.positive_rate_range.second);
        const double intercept = detail::fit_intercept(logits, u, target);
        for (int i = 0; i < n; ++i)
            full.labels[static_cast<std::size_t>(i)] =
                u[static_cast<std::size_t>(i)] < sigmoid(logits[static_cast<std::size_t>(i)] + intercept) ? 1 : 0;

        // 25% held-out split, stratified when both classes are present
        Rng split_rng = substream(cfg.seed, {stream_tag::kSplit, ku});
        std::vector<int> pos, neg;
        for (int i = 0; i < n; ++i)
            (full.labels[static_cast<std::size_t>(i)] == 1 ? pos : neg).push_back(i);
        std::vector<int> test_rows;
        auto pick = [&](std::vector<int>& rows) {
            split_rng.shuffle(rows);
            const int take = static_cast<int>(std::lround(0.25 * static_cast<double>(rows.size())));
            for (int i = 0; i < take; ++i) test_rows.push_back(rows[static_cast<std::size_t>(i)]);
        };
        if (!pos.empty() && !neg.empty()) {
            pick(pos);
            pick(neg);
        } else {
            std::vector<int> all(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
            pick(all);
        }
        std::sort(test_rows.begin(), test_rows.end());
        std::vector<bool> is_test(static_cast<std::size_t>(n), false);
        for (int r : test_rows) is_test[static_cast<std::size_t>(r)] = true;

        ClientData client;
        client.template_id = t;
        client.adversarial = cfg.adversarial_ids.count(k) > 0 && cfg.flip_rate > 0.0;
        const int n_test = static_cast<int>(test_rows.size());
        client.train = LabeledDataset(n - n_test, cfg.d);
        client.test = LabeledDataset(n_test, cfg.d);
        int ti = 0, si = 0;
        for (int i = 0; i < n; ++i) {
            LabeledDataset& dst = is_test[static_cast<std::size_t>(i)] ? client.test : client.train;
            int& row = is_test[static_cast<std::size_t>(i)] ? si : ti;
            for (int j = 0; j < cfg.d; ++j) dst.x(row, j) = full.x(i, j);
            dst.labels[static_cast<std::size_t>(row)] = full.labels[static_cast<std::size_t>(i)];
            ++row;
        }

        // poisoning touches the training split only; the healthcare attack
        // also displaces the poisoned rows in feature space (a pure label
        // flip is invisible to a label-free descriptor)
        if (client.adversarial) {
            Rng flip_rng = substream(cfg.seed, {stream_tag::kFlip, ku});
            const auto rows = select_flip_rows(client.train.n, cfg.flip_rate, flip_rng);
            for (int r : rows) {
                client.train.labels[static_cast<std::size_t>(r)] =
                    1 - client.train.labels[static_cast<std::size_t>(r)];
                if (cfg.name == "healthcare") {
                    const int dims = std::min(kAdversaryShiftDims, cfg.d_informative);
                    for (int j = 0; j < dims; ++j) client.train.x(r, j) += kAdversaryShift;
                }
            }
        }

        scenario.clients.push_back(std::move(client));
    }
    return scenario;
}

} // namespace ptopofl
