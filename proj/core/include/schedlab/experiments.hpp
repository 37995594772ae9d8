#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "schedlab/cmpnet.hpp"
#include "schedlab/model.hpp"
#include "schedlab/offline.hpp"
#include "schedlab/ranking.hpp"
#include "schedlab/sim.hpp"
#include "schedlab/vdas.hpp"

namespace schedlab {

// Named scenario families: "paper" (40 jobs / 4 servers), "tiny" (exhaustive
// oracle scale), "desk" (exact-solver scale), "scale" (large online-only).
RandomConfig preset_config(const std::string& name);

// Stable hash of every generator-relevant field, recorded as provenance.
std::uint64_t config_hash(const RandomConfig& cfg);

struct PolicySpec {
    std::string name;
    std::function<std::unique_ptr<Policy>(const Scenario&)> make;
};

PolicySpec vdas_spec(const VdasParams& params, std::string name = "vdas");
PolicySpec ranking_spec(std::shared_ptr<const ComparatorNet> net, std::string name = "ranking");

struct BatchConfig {
    RandomConfig scenario;
    int num_seeds = 10;
    std::uint64_t seed0 = 1;
    bool oracle = false;  // solve each scenario exactly and report fractions
    SolveBudget budget;
    int threads = 0;  // 0 = hardware concurrency
};

struct RunRecord {
    std::uint64_t seed = 0;  // scenario seed: seed0 + k
    std::vector<double> value;              // per policy
    std::vector<std::int64_t> events;       // per policy, deterministic work count
    std::optional<double> optimal;
    bool certified = false;
    std::uint64_t solver_nodes = 0;
    std::vector<double> fraction;  // per policy; filled only for certified optima
    bool failed = false;
    std::string error;
};

struct Aggregate {
    double mean = 0.0, median = 0.0, stddev = 0.0;
    int count = 0;
};

struct BatchSummary {
    std::vector<std::string> policy_names;
    std::vector<Aggregate> value;     // per policy
    std::vector<Aggregate> fraction;  // per policy, certified records only
    int failures = 0;
};

struct BatchResult {
    std::vector<RunRecord> records;
    BatchSummary summary;
};

// One record per seed, workers dispatched over a pool, output ordered by
// seed. Per-seed failures are isolated into the record; IntegrityError is a
// bug signal (an online policy beating a certified optimum) and aborts the
// batch. Byte-identical CSV across reruns of the same config.
BatchResult run_batch(const BatchConfig& cfg, const std::vector<PolicySpec>& policies);

BatchSummary summarize(const std::vector<RunRecord>& records,
                       const std::vector<std::string>& names);

std::string records_to_csv(const std::vector<RunRecord>& records,
                           const std::vector<std::string>& names);
std::vector<RunRecord> records_from_csv(const std::string& csv,
                                        std::vector<std::string>* names = nullptr);

// Self-contained SVG: per-policy fraction-of-optimal, seeds sorted by the
// first policy's fraction.
std::string fraction_chart_svg(const std::vector<RunRecord>& records,
                               const std::vector<std::string>& names);

struct GridCell {
    double mu = 0.0, gamma = 1.0;
    double mean_value = 0.0;
};

struct GridResult {
    double best_mu = 0.0, best_gamma = 1.0;
    double best_mean = 0.0;
    std::vector<GridCell> table;
};

// Mean total value of VDaS per (mu, gamma) cell over the same seed set;
// duplicate grid entries are evaluated once.
GridResult grid_search_vdas(const BatchConfig& cfg, std::vector<double> mu_grid,
                            std::vector<double> gamma_grid);
std::string grid_to_csv(const GridResult& grid);

struct StudyProfile {
    std::string name;
    RandomConfig config;
};

// Uniform-efficiency tiers with server counts scaled for equal aggregate
// throughput; preferences pinned to a fixed value.
std::vector<StudyProfile> efficiency_tier_profiles(const RandomConfig& base);
// Average-efficiency group vs single-type specialists with matched mean
// efficiency (0.70 vs {0.63,0.63,0.90}; 0.80 vs {0.76,0.76,0.90}).
std::vector<StudyProfile> specialization_profiles(const RandomConfig& base);

struct StudyRow {
    std::string profile;
    BatchSummary summary;
};

struct StudyResult {
    std::vector<StudyRow> rows;
};

StudyResult specialization_study(const BatchConfig& base, const std::vector<StudyProfile>& profiles,
                                 const std::vector<PolicySpec>& policies);
std::string study_to_csv(const StudyResult& study);

struct PipelineConfig {
    RandomConfig scenario;  // must be within exact-solve scale
    int num_scenarios = 300;
    std::uint64_t seed0 = 1000;
    SolveBudget budget;
    // Extraction-sample training wants a hotter schedule than the optimizer's
    // baseline defaults; early stopping trims the tail.
    TrainConfig train{.learning_rate = 1e-2, .epochs = 60};
    int h1_cap = 128;
    int hidden_layers = 4;
    std::string model_path = "model.cmpnet";
    bool raw_model = false;
    std::string samples_path;  // optional: persist the extracted sample file
    int threads = 0;
};

struct PipelineReport {
    int scenarios = 0;
    int certified = 0;
    std::size_t samples = 0;
    TrainReport train;
};

// Solve `count` seeded scenarios exactly and extract pairwise samples from
// the certified ones (uncertified solves contribute nothing). Deterministic
// for fixed inputs regardless of thread count.
std::vector<TrainingSample> solve_and_extract(const RandomConfig& scenario, int count,
                                              std::uint64_t seed0, const SolveBudget& budget,
                                              int threads, int* certified = nullptr);

// generate -> solve_exact -> extract_samples -> train -> persist, with the
// failing stage named on error. The model file carries the scenario config
// hash and sample count; the loss curve lands in <model>.losscurve.csv.
PipelineReport train_pipeline(const PipelineConfig& cfg);

}  // namespace schedlab
