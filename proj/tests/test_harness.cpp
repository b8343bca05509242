#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "ptopofl/experiment.hpp"
#include "ptopofl/privacy.hpp"

using namespace ptopofl;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.rounds = 2;
    cfg.seeds = {1};
    cfg.train.local_epochs = 1;
    cfg.n_sub = 40;
    return cfg;
}

} // namespace

TEST_CASE("config parsing: defaults, overrides, unknown keys") {
    const auto cfg = config_from_json(json::parse("{}"));
    CHECK(cfg.rounds == 15);
    CHECK(cfg.M == 2);
    CHECK(cfg.n_sub == 80);
    CHECK(cfg.L == 20);
    CHECK(cfg.tau == 2.0);
    CHECK(cfg.beta_blend == 0.3);
    CHECK(cfg.scenario.K == 8);

    const auto parsed = config_from_json(json::parse(R"({
        "scenario": {"name": "benchmark", "flip_rate": 0.2, "adversarial_ids": [1, 2]},
        "method": "fedprox",
        "rounds": 7,
        "train": {"learning_rate": 0.01, "batch_size": 16},
        "seeds": [3, 4]
    })"));
    CHECK(parsed.scenario.K == 10);
    CHECK(parsed.scenario.d_informative == 12);
    CHECK(parsed.scenario.flip_rate == 0.2);
    CHECK(parsed.method == "fedprox");
    CHECK(parsed.rounds == 7);
    CHECK(parsed.train.learning_rate == 0.01);
    CHECK(parsed.train.local_epochs == 5);
    CHECK(parsed.seeds == std::vector<std::uint64_t>{3, 4});

    CHECK_THROWS_AS(config_from_json(json::parse(R"({"roundz": 3})")), config_error);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"scenario": {"bogus": 1}})")), config_error);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"train": {"lr": 0.1}})")), config_error);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"method": "sgd"})")), config_error);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"rounds": 0})")), config_error);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"M": 40})")), config_error);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"rounds": "many"})")), config_error);
}

TEST_CASE("run_experiment emits one row per round per seed") {
    auto cfg = small_config();
    cfg.method = "fedavg";
    cfg.seeds = {1, 2};
    const auto dir = temp_dir("ptopofl_harness_rows");
    const auto records = run_experiment(cfg, dir / "exp.csv");
    CHECK(records.size() == 4);
    const auto text = read_file(dir / "exp.csv");
    CHECK(static_cast<int>(std::count(text.begin(), text.end(), '\n')) == 5);
    CHECK(text.rfind(kRoundCsvHeader, 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("CSV outputs are byte-identical across repeated runs") {
    const auto cfg = small_config();
    const auto dir = temp_dir("ptopofl_harness_det");

    run_compare(cfg, dir / "a.csv");
    run_compare(cfg, dir / "b.csv");
    CHECK(read_file(dir / "a.csv") == read_file(dir / "b.csv"));

    ExperimentConfig sweep_cfg = cfg;
    sweep_cfg.attack_rates = {0.0, 0.5};
    run_sweep(sweep_cfg, dir / "s1.csv");
    run_sweep(sweep_cfg, dir / "s2.csv");
    CHECK(read_file(dir / "s1.csv") == read_file(dir / "s2.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("ablation variants and row structure") {
    auto cfg = small_config();
    const auto dir = temp_dir("ptopofl_harness_abl");
    run_ablation(cfg, dir / "ablation.csv");
    const auto text = read_file(dir / "ablation.csv");
    // 4 variants x seeds x rounds + header
    CHECK(static_cast<int>(std::count(text.begin(), text.end(), '\n')) == 4 * 2 + 1);
    CHECK(text.find("full,") != std::string::npos);
    CHECK(text.find("no_clustering,") != std::string::npos);
    CHECK(text.find("no_blending,") != std::string::npos);
    CHECK(text.find("no_trust,") != std::string::npos);

    // full vs no_blending is a controlled variation: same clustering and
    // trust columns, only the blending differs
    auto rows_of = [&](const std::string& variant) {
        std::vector<std::vector<std::string>> rows;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.rfind(variant + ",", 0) != 0) continue;
            std::vector<std::string> cells;
            std::istringstream cs(line);
            std::string cell;
            while (std::getline(cs, cell, ',')) cells.push_back(cell);
            rows.push_back(std::move(cells));
        }
        return rows;
    };
    const auto full = rows_of("full");
    const auto no_blend = rows_of("no_blending");
    REQUIRE(full.size() == no_blend.size());
    for (std::size_t r = 0; r < full.size(); ++r) {
        CHECK(full[r][8] == no_blend[r][8]);  // trust
        CHECK(full[r][9] == no_blend[r][9]);  // clusters
    }

    ExperimentConfig bad = cfg;
    bad.method = "fedavg";
    CHECK_THROWS_AS(run_ablation(bad, dir / "x.csv"), config_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("ablation no_clustering AUC equals fedavg AUC per round") {
    ExperimentConfig cfg;
    cfg.rounds = 4;
    cfg.seeds = {3};
    cfg.M = 1;
    cfg.trust_enabled = false;
    cfg.exp_factor_enabled = false;
    const auto reduced = run_single(cfg, "ptopofl", 3);
    const auto fedavg = run_single(cfg, "fedavg", 3);
    REQUIRE(reduced.size() == fedavg.size());
    for (std::size_t r = 0; r < reduced.size(); ++r) {
        REQUIRE(reduced[r].auc_global.has_value());
        REQUIRE(fedavg[r].auc_global.has_value());
        CHECK(*reduced[r].auc_global == doctest::Approx(*fedavg[r].auc_global).epsilon(1e-12));
    }
}

TEST_CASE("drift study CSV schema and bounded drift") {
    auto cfg = small_config();
    const auto dir = temp_dir("ptopofl_harness_drift");
    run_drift_study(cfg, dir / "drift.csv", 5);
    const auto text = read_file(dir / "drift.csv");
    CHECK(text.rfind("scenario,seed,round,client,h0_entropy,h1_entropy,drift", 0) == 0);
    // header + rounds x clients rows
    CHECK(static_cast<int>(std::count(text.begin(), text.end(), '\n')) == 1 + 5 * 8);

    // stationary clients: normalized drift stays small, nobody is re-flagged
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    double max_drift = 0.0;
    while (std::getline(lines, line)) {
        const auto pos = line.rfind(',');
        max_drift = std::max(max_drift, std::stod(line.substr(pos + 1)));
    }
    CHECK(max_drift >= 0.0);
    CHECK(max_drift < 1.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep CSV re-read: rates and parsable AUC column") {
    auto cfg = small_config();
    cfg.attack_rates = {0.0, 0.25, 0.5};
    const auto dir = temp_dir("ptopofl_harness_sweep");
    run_sweep(cfg, dir / "sweep.csv");
    const auto text = read_file(dir / "sweep.csv");
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    CHECK(line == std::string("attack_rate,") + kRoundCsvHeader);
    std::map<std::string, int> rate_rows;
    while (std::getline(lines, line)) {
        const auto first = line.substr(0, line.find(','));
        ++rate_rows[first];
        // auc_global column parses as a double in [0,1]
        std::vector<std::string> cells;
        std::istringstream cell_stream(line);
        std::string cell;
        while (std::getline(cell_stream, cell, ',')) cells.push_back(cell);
        const double auc = std::stod(cells[5]);
        CHECK(auc >= 0.0);
        CHECK(auc <= 1.0);
    }
    // one block per rate: methods x seeds x rounds
    for (const auto& [rate, rows] : rate_rows) CHECK(rows == 5 * 1 * 2);
    CHECK(rate_rows.size() == 3);
    std::filesystem::remove_all(dir);
}

TEST_CASE("benchmark compare row arithmetic") {
    ExperimentConfig cfg;
    cfg.scenario = ScenarioConfig::benchmark();
    cfg.rounds = 2;
    cfg.seeds = {1, 2};
    cfg.n_sub = 40;
    cfg.train.local_epochs = 1;
    const auto dir = temp_dir("ptopofl_harness_bm");
    run_compare(cfg, dir / "compare.csv");
    const auto text = read_file(dir / "compare.csv");
    // 5 methods x 2 seeds x 2 rounds + header
    CHECK(static_cast<int>(std::count(text.begin(), text.end(), '\n')) == 5 * 2 * 2 + 1);
    CHECK(text.find(",benchmark,") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("descriptor JSON array round trip") {
    TopoDescriptor d;
    for (int i = 0; i < TopoDescriptor::kDim; ++i) d[i] = 0.5 * i;
    const auto arr = descriptor_to_json(d);
    CHECK(arr.is_array());
    CHECK(arr.size() == 48);
    const auto back = descriptor_from_json(arr);
    for (int i = 0; i < TopoDescriptor::kDim; ++i) CHECK(back[i] == d[i]);
    CHECK_THROWS_AS(descriptor_from_json(json::array({1, 2, 3})), input_error);
}

TEST_CASE("privacy report values") {
    PrivacyProfile profile{100, 20, 21, 48, 0.1};
    CHECK(rho_gradient(profile) == doctest::Approx(0.0105).epsilon(1e-12));
    CHECK(rho_topo(profile) == doctest::Approx(0.0024).epsilon(1e-12));
    PrivacyProfile clamped{2, 2, 100, 48, 0.1};
    CHECK(rho_gradient(clamped) == 1.0);
    PrivacyProfile zero_alpha{100, 20, 21, 48, 0.0};
    CHECK(rho_topo(zero_alpha) == 0.0);
    PrivacyProfile doubled{100, 20, 21, 96, 0.1};
    CHECK(rho_topo(doubled) == doctest::Approx(2.0 * rho_topo(profile)).epsilon(1e-12));

    CHECK(mi_proxy(48, 0.1) == doctest::Approx(std::log2(5.8)).epsilon(1e-12));
    CHECK(mi_proxy(210, 0.1) == doctest::Approx(std::log2(22.0)).epsilon(1e-12));
    CHECK(mi_proxy(0, 0.1) == 0.0);

    auto cfg = small_config();
    const auto dir = temp_dir("ptopofl_harness_priv");
    const auto summary = run_privacy_report(cfg, dir / "privacy.csv");
    CHECK(summary.mean_ratio == doctest::Approx(21.0 / 4.8).epsilon(1e-9));
    const auto text = read_file(dir / "privacy.csv");
    CHECK(text.rfind("client_id,n,d,p,rho_grad,rho_topo,mi_grad,mi_topo,risk_ratio", 0) == 0);
    CHECK(static_cast<int>(std::count(text.begin(), text.end(), '\n')) == 1 + 8 + 1);
    std::filesystem::remove_all(dir);
}

#ifdef PTOPOFL_CLI_BIN
TEST_CASE("CLI subcommands: exit codes and byte-identical reruns") {
    const auto dir = temp_dir("ptopofl_cli_det");
    const std::string bin = PTOPOFL_CLI_BIN;
    const std::string cfg_path = (dir / "cfg.json").string();
    atomic_write(cfg_path, R"({"rounds": 2, "seeds": [1], "n_sub": 40,
                              "train": {"local_epochs": 1},
                              "attack_rates": [0.0, 0.5]})");

    auto run = [&](const std::string& args) {
        const std::string cmd = bin + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) / 256;
    };

    for (const std::string sub : {"compare", "sweep", "ablation", "drift", "privacy"}) {
        const auto out1 = dir / (sub + "1");
        const auto out2 = dir / (sub + "2");
        CHECK(run(sub + " --config " + cfg_path + " --out " + out1.string()) == 0);
        CHECK(run(sub + " --config " + cfg_path + " --out " + out2.string()) == 0);
        CHECK(read_file(out1 / (sub + ".csv")) == read_file(out2 / (sub + ".csv")));
    }

    // config errors exit 2; --seed narrows the run to one seed
    atomic_write((dir / "bad.json").string(), R"({"bogus_key": 1})");
    CHECK(run("compare --config " + (dir / "bad.json").string()) == 2);
    CHECK(run("privacy --config " + cfg_path + " --seed 7 --out " + (dir / "x").string()) == 0);
    CHECK(std::filesystem::exists(dir / "x" / "privacy.csv"));
    std::filesystem::remove_all(dir);
}
#endif
