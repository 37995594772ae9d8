#include <doctest.h>

#include <cstdio>
#include <sstream>
#include <fstream>

#include "schedlab/experiments.hpp"
#include "schedlab/scenario_io.hpp"

using namespace schedlab;

namespace {

BatchConfig tiny_batch(int seeds, bool oracle) {
    BatchConfig cfg;
    cfg.scenario = preset_config("tiny");
    cfg.num_seeds = seeds;
    cfg.seed0 = 1;
    cfg.oracle = oracle;
    cfg.threads = 2;
    return cfg;
}

VdasParams default_vdas() {
    VdasParams p;
    p.mu = 0.5;
    p.gamma = 1.2;
    return p;
}

}  // namespace

TEST_CASE("an oracle batch yields one certified record per seed with fractions <= 1") {
    const BatchResult r = run_batch(tiny_batch(10, true), {vdas_spec(default_vdas())});
    REQUIRE(r.records.size() == 10);
    for (const RunRecord& rec : r.records) {
        CHECK_FALSE(rec.failed);
        REQUIRE(rec.certified);
        CHECK(rec.fraction[0] <= 1.0);
        CHECK(rec.fraction[0] >= 0.0);
        CHECK(rec.optimal.has_value());
    }
    CHECK(r.summary.failures == 0);
    CHECK(r.summary.fraction[0].count == 10);
}

TEST_CASE("identical configs produce byte-identical CSV, regardless of threads") {
    const std::vector<PolicySpec> specs = {vdas_spec(default_vdas())};
    BatchConfig a = tiny_batch(8, true);
    a.threads = 1;
    BatchConfig b = tiny_batch(8, true);
    b.threads = 4;
    const std::string csv_a = records_to_csv(run_batch(a, specs).records, {"vdas"});
    const std::string csv_b = records_to_csv(run_batch(b, specs).records, {"vdas"});
    CHECK(csv_a == csv_b);
}

TEST_CASE("per-seed failures are isolated and reported") {
    struct Bomb : Policy {
        std::vector<Directive> on_arrival(const SimView&, std::span<const int>, Time) override {
            throw std::runtime_error("injected failure");
        }
        std::vector<Directive> on_completion(const SimView&, std::span<const int>,
                                             Time) override {
            return {};
        }
    };
    PolicySpec flaky{"flaky", [](const Scenario& s) -> std::unique_ptr<Policy> {
                         if (s.jobs[0].value > 0 && s.num_jobs() > 0 &&
                             s.jobs[0].id == 0 && s.num_servers() == 2 &&
                             (s.jobs[0].proc_time % 2 == 0))
                             return std::make_unique<Bomb>();
                         VdasParams p;
                         return std::make_unique<VdasPolicy>(p);
                     }};
    const BatchResult r = run_batch(tiny_batch(12, false), {flaky});
    int failed = 0, fine = 0;
    for (const RunRecord& rec : r.records) {
        if (rec.failed) {
            CHECK(rec.error.find("injected failure") != std::string::npos);
            ++failed;
        } else {
            ++fine;
        }
    }
    CHECK(failed > 0);
    CHECK(fine > 0);
    CHECK(r.summary.failures == failed);
}

TEST_CASE("records CSV round-trips into equivalent RunRecords") {
    const std::vector<PolicySpec> specs = {vdas_spec(default_vdas(), "a"),
                                           vdas_spec(VdasParams{}, "b")};
    const BatchResult r = run_batch(tiny_batch(6, true), specs);
    const std::string csv = records_to_csv(r.records, {"a", "b"});
    std::vector<std::string> names;
    const auto parsed = records_from_csv(csv, &names);
    CHECK(names == std::vector<std::string>{"a", "b"});
    REQUIRE(parsed.size() == r.records.size());
    for (std::size_t k = 0; k < parsed.size(); ++k) {
        CHECK(parsed[k].seed == r.records[k].seed);
        CHECK(parsed[k].value == r.records[k].value);  // bitwise via %.17g
        CHECK(parsed[k].certified == r.records[k].certified);
        CHECK(parsed[k].fraction == r.records[k].fraction);
        CHECK(parsed[k].optimal == r.records[k].optimal);
    }

    // summary statistics recompute from rows
    const BatchSummary s2 = summarize(parsed, names);
    for (std::size_t p = 0; p < names.size(); ++p) {
        CHECK(s2.value[p].mean == doctest::Approx(r.summary.value[p].mean).epsilon(1e-9));
        CHECK(s2.fraction[p].mean == doctest::Approx(r.summary.fraction[p].mean).epsilon(1e-9));
        CHECK(s2.value[p].stddev == doctest::Approx(r.summary.value[p].stddev).epsilon(1e-9));
    }
}

TEST_CASE("the fraction chart is a self-contained svg") {
    const BatchResult r = run_batch(tiny_batch(6, true), {vdas_spec(default_vdas())});
    const std::string svg = fraction_chart_svg(r.records, {"vdas"});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("grid search: singleton grids, deduplication, argmax semantics") {
    BatchConfig cfg = tiny_batch(5, false);
    SUBCASE("singleton grid returns that cell") {
        const GridResult g = grid_search_vdas(cfg, {1.0}, {1.5});
        REQUIRE(g.table.size() == 1);
        CHECK(g.best_mu == 1.0);
        CHECK(g.best_gamma == 1.5);
        CHECK(g.best_mean == g.table[0].mean_value);
    }
    SUBCASE("duplicates are evaluated once and the best cell dominates") {
        const GridResult g = grid_search_vdas(cfg, {0.0, 1.0, 0.0}, {1.0, 1.0, 2.0});
        CHECK(g.table.size() == 4);  // 2 x 2 after dedup
        for (const GridCell& c : g.table) CHECK(g.best_mean >= c.mean_value);
    }
}

TEST_CASE("study profiles encode the efficiency tiers and specialist groups") {
    RandomConfig base = preset_config("scale");
    base.num_servers = 30;
    const auto tiers = efficiency_tier_profiles(base);
    REQUIRE(tiers.size() == 4);
    CHECK(tiers[0].config.num_servers == 30);  // eta 0.60
    CHECK(tiers[1].config.num_servers == 24);  // eta 0.75
    CHECK(tiers[2].config.num_servers == 22);  // eta 0.82
    CHECK(tiers[3].config.num_servers == 20);  // eta 0.90
    for (const auto& p : tiers) {
        REQUIRE(p.config.eta_override.has_value());
        CHECK(p.config.fixed_pref == 1.0);
        for (const auto& row : *p.config.eta_override)
            for (double e : row) CHECK(e == (*p.config.eta_override)[0][0]);
    }

    const auto specs = specialization_profiles(base);
    REQUIRE(specs.size() == 4);
    CHECK(specs[0].name == "avg-0.70");
    CHECK(specs[1].name == "spec-0.90-0.63");
    // specialist rows hold exactly one high-efficiency type
    const auto& spec_eta = *specs[1].config.eta_override;
    for (std::size_t i = 0; i < spec_eta.size(); ++i) {
        int high = 0;
        for (double e : spec_eta[i]) high += e == 0.90;
        CHECK(high == 1);
        CHECK(spec_eta[i][i % static_cast<std::size_t>(base.num_types)] == 0.90);
    }
}

TEST_CASE("a small specialization study runs both policies per profile") {
    RandomConfig base = preset_config("tiny");
    base.num_jobs = 8;
    base.num_servers = 3;
    BatchConfig cfg;
    cfg.scenario = base;
    cfg.num_seeds = 4;
    cfg.seed0 = 3;
    cfg.threads = 2;
    const auto profiles = specialization_profiles(base);
    const StudyResult study =
        specialization_study(cfg, profiles, {vdas_spec(default_vdas())});
    REQUIRE(study.rows.size() == 4);
    const std::string csv = study_to_csv(study);
    CHECK(csv.find("avg-0.70") != std::string::npos);
    CHECK(csv.find("spec-0.90-0.63") != std::string::npos);
}

TEST_CASE("train_pipeline wires generation, solving, extraction and training") {
    PipelineConfig cfg;
    cfg.scenario = preset_config("tiny");
    cfg.num_scenarios = 30;
    cfg.seed0 = 500;
    cfg.train.epochs = 8;
    cfg.train.seed = 5;
    cfg.h1_cap = 32;
    cfg.threads = 2;
    cfg.model_path = "/tmp/schedlab-test-pipeline.cmpnet";
    cfg.samples_path = "/tmp/schedlab-test-pipeline-samples.txt";

    const PipelineReport report = train_pipeline(cfg);
    CHECK(report.certified == 30);
    CHECK(report.samples > 0);
    CHECK(report.train.val_accuracy > 0.5);

    // model file is loadable and guarded by the feature registry
    std::map<std::string, std::string> prov;
    const ComparatorNet net =
        load_net(cfg.model_path, FeatureRegistry::layout_hash(cfg.scenario.num_types), &prov);
    CHECK(net.x_dim() == FeatureRegistry::dim(cfg.scenario.num_types));
    CHECK(prov.at("sample-count") == std::to_string(report.samples));

    // rerun with identical seeds: identical sample file bytes
    std::ifstream f1(cfg.samples_path, std::ios::binary);
    std::ostringstream s1;
    s1 << f1.rdbuf();
    PipelineConfig cfg2 = cfg;
    cfg2.model_path = "/tmp/schedlab-test-pipeline2.cmpnet";
    cfg2.samples_path = "/tmp/schedlab-test-pipeline-samples2.txt";
    cfg2.threads = 4;
    train_pipeline(cfg2);
    std::ifstream f2(cfg2.samples_path, std::ios::binary);
    std::ostringstream s2;
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());

    for (const char* p : {"/tmp/schedlab-test-pipeline.cmpnet",
                          "/tmp/schedlab-test-pipeline.cmpnet.losscurve.csv",
                          "/tmp/schedlab-test-pipeline-samples.txt",
                          "/tmp/schedlab-test-pipeline2.cmpnet",
                          "/tmp/schedlab-test-pipeline2.cmpnet.losscurve.csv",
                          "/tmp/schedlab-test-pipeline-samples2.txt"})
        std::remove(p);
}

TEST_CASE("unknown presets and empty policy lists are rejected") {
    CHECK_THROWS_AS(preset_config("nope"), ConfigError);
    CHECK_THROWS_AS(run_batch(tiny_batch(1, false), {}), ConfigError);
}
