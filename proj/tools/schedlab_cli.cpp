// Command-line surface for scenario generation, policy runs, grid search,
// exact solves, sample extraction, comparator training, and the
// specialization studies. Subcommand outputs are deterministic for a fixed
// configuration; wall-clock timings go to stderr only.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "schedlab/experiments.hpp"
#include "schedlab/scenario_io.hpp"

using namespace schedlab;

namespace {

namespace fs = std::filesystem;

std::string default_outdir() {
    const char* env = std::getenv("SCHEDLAB_OUTDIR");
    return env ? env : ".";
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path.string());
    out << content;
}

struct ScenarioFlags {
    std::string preset = "desk";
    int jobs = -1, servers = -1, types = -1;
    long long tmax = -1, arrival_hi = -1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "scenario family: paper|tiny|desk|scale");
        cmd->add_option("--jobs", jobs, "override job count");
        cmd->add_option("--servers", servers, "override server count");
        cmd->add_option("--types", types, "override type count");
        cmd->add_option("--tmax", tmax, "override horizon end");
        cmd->add_option("--arrival-hi", arrival_hi, "override latest arrival");
    }

    RandomConfig build() const {
        RandomConfig cfg = preset_config(preset);
        if (jobs > 0) cfg.num_jobs = jobs;
        if (servers > 0) cfg.num_servers = servers;
        if (types > 0) cfg.num_types = types;
        if (tmax >= 0) cfg.t_max = tmax;
        if (arrival_hi >= 0) cfg.arrival_hi = arrival_hi;
        return cfg;
    }
};

void print_summary(const BatchSummary& s) {
    std::cout << "policy           mean_value   median    stddev   mean_frac  runs\n";
    for (std::size_t p = 0; p < s.policy_names.size(); ++p) {
        std::printf("%-16s %10.2f %8.2f %9.2f", s.policy_names[p].c_str(), s.value[p].mean,
                    s.value[p].median, s.value[p].stddev);
        if (s.fraction[p].count > 0)
            std::printf("   %8.4f  %4d\n", s.fraction[p].mean, s.fraction[p].count);
        else
            std::printf("          -  %4d\n", s.value[p].count);
    }
    if (s.failures > 0) std::cout << "failed seeds: " << s.failures << "\n";
}

int cmd_gen(const ScenarioFlags& flags, std::uint64_t seed, int count, const std::string& outdir) {
    for (int k = 0; k < count; ++k) {
        RandomConfig cfg = flags.build();
        cfg.seed = seed + static_cast<std::uint64_t>(k);
        const Scenario s = generate_scenario(cfg);
        const fs::path path =
            fs::path(outdir) / ("scenario-" + std::to_string(cfg.seed) + ".txt");
        write_file(path, scenario_to_text(s));
        std::cout << path.string() << "\n";
    }
    return 0;
}

int cmd_solve(const std::string& scenario_path, const std::string& trace_path,
              std::uint64_t budget_nodes, double budget_seconds) {
    const Scenario s = load_scenario(scenario_path);
    const OfflineProblem problem = OfflineProblem::from(s);
    SolveBudget budget;
    if (budget_nodes > 0) budget.max_nodes = budget_nodes;
    if (budget_seconds > 0) budget.max_seconds = budget_seconds;
    const OfflineSolution sol = solve_exact(problem, budget);
    validate_solution(problem, sol);
    std::cout << "objective " << format_real(sol.objective) << "\n";
    std::cout << "certified " << (sol.certified ? 1 : 0) << "\n";
    std::cout << "nodes " << sol.nodes << "\n";
    if (!trace_path.empty()) {
        const ScheduleTrace trace = extract_decision_trace(problem, sol);
        save_trace(trace, trace_path);
        std::cout << "trace " << trace_path << " (off-event decisions: "
                  << trace.off_event_decisions << ")\n";
    }
    return sol.certified ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"schedlab: online deadline scheduling laboratory"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate scenario files");
    ScenarioFlags gen_flags;
    gen_flags.attach(gen);
    std::uint64_t gen_seed = 1;
    int gen_count = 1;
    std::string gen_out = default_outdir();
    gen->add_option("--seed", gen_seed, "first scenario seed");
    gen->add_option("--count", gen_count, "number of scenarios");
    gen->add_option("--out", gen_out, "output directory");

    // solve
    auto* solve = app.add_subcommand("solve", "exact offline solve of one scenario");
    std::string solve_scenario, solve_trace;
    std::uint64_t solve_nodes = 0;
    double solve_seconds = 0.0;
    solve->add_option("--scenario", solve_scenario, "scenario file")->required();
    solve->add_option("--trace", solve_trace, "write the decision trace here");
    solve->add_option("--budget-nodes", solve_nodes, "node limit");
    solve->add_option("--budget-seconds", solve_seconds, "time limit");

    // run
    auto* run_cmd = app.add_subcommand("run", "batch policy runs over seeds");
    ScenarioFlags run_flags;
    run_flags.attach(run_cmd);
    int run_seeds = 20, run_threads = 0;
    std::uint64_t run_seed0 = 1;
    bool run_oracle = false;
    std::string run_policy = "vdas", run_model, run_out = default_outdir();
    double run_mu = 0.0, run_gamma = 1.0, run_slack_min = 0.0;
    run_cmd->add_option("--seeds", run_seeds, "number of seeds");
    run_cmd->add_option("--seed0", run_seed0, "first seed");
    run_cmd->add_option("--policy", run_policy, "vdas|ranking|both");
    run_cmd->add_option("--model", run_model, "comparator model file (ranking)");
    run_cmd->add_option("--mu", run_mu, "vdas admission headroom");
    run_cmd->add_option("--gamma", run_gamma, "vdas preemption threshold");
    run_cmd->add_option("--slack-min", run_slack_min, "vdas slack admission filter");
    run_cmd->add_flag("--oracle", run_oracle, "compare against certified optima");
    run_cmd->add_option("--threads", run_threads, "worker threads (0 = all)");
    run_cmd->add_option("--out", run_out, "output directory");

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "vdas hyperparameter grid search");
    ScenarioFlags grid_flags;
    grid_flags.attach(grid_cmd);
    int grid_seeds = 20, grid_threads = 0;
    std::uint64_t grid_seed0 = 1;
    std::vector<double> grid_mu{0.0, 0.5, 1.0, 1.5, 2.0};
    std::vector<double> grid_gamma{1.0, 1.2, 1.5, 2.0, 3.0};
    std::string grid_out = default_outdir();
    grid_cmd->add_option("--seeds", grid_seeds, "seeds per cell");
    grid_cmd->add_option("--seed0", grid_seed0, "first seed");
    grid_cmd->add_option("--mu", grid_mu, "mu grid")->delimiter(',');
    grid_cmd->add_option("--gamma", grid_gamma, "gamma grid")->delimiter(',');
    grid_cmd->add_option("--threads", grid_threads, "worker threads");
    grid_cmd->add_option("--out", grid_out, "output directory");

    // extract
    auto* extract_cmd = app.add_subcommand("extract", "training samples from optimal traces");
    ScenarioFlags extract_flags;
    extract_flags.attach(extract_cmd);
    std::string extract_scenario, extract_trace, extract_out = "samples.txt";
    int extract_count = 0, extract_threads = 0;
    std::uint64_t extract_seed0 = 1000;
    extract_cmd->add_option("--scenario", extract_scenario, "scenario file (single mode)");
    extract_cmd->add_option("--trace", extract_trace, "decision trace file (single mode)");
    extract_cmd->add_option("--count", extract_count, "batch mode: scenarios to solve");
    extract_cmd->add_option("--seed0", extract_seed0, "batch mode: first seed");
    extract_cmd->add_option("--threads", extract_threads, "worker threads");
    extract_cmd->add_option("--out", extract_out, "samples file")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train the pairwise comparator");
    ScenarioFlags train_flags;
    train_flags.attach(train_cmd);
    std::string train_samples, train_out = "model.cmpnet";
    int train_scenarios = 0, train_threads = 0;
    std::uint64_t train_seed0 = 1000;
    TrainConfig tcfg;
    int train_h1_cap = 128, train_hidden = 4;
    bool train_raw = false;
    train_cmd->add_option("--samples", train_samples, "pre-extracted samples file");
    train_cmd->add_option("--scenarios", train_scenarios, "pipeline mode: scenarios to solve");
    train_cmd->add_option("--seed0", train_seed0, "pipeline mode: first scenario seed");
    train_cmd->add_option("--epochs", tcfg.epochs, "training epochs");
    train_cmd->add_option("--lr", tcfg.learning_rate, "learning rate");
    train_cmd->add_option("--batch", tcfg.batch_size, "batch size");
    train_cmd->add_option("--val-split", tcfg.val_split, "validation fraction");
    train_cmd->add_option("--patience", tcfg.patience, "early-stop patience");
    train_cmd->add_option("--train-seed", tcfg.seed, "shuffle/init seed");
    train_cmd->add_option("--h1-cap", train_h1_cap, "first hidden width cap (0 = formula)");
    train_cmd->add_option("--hidden-layers", train_hidden, "3 or 4 hidden layers");
    train_cmd->add_flag("--raw", train_raw, "store parameters as raw little-endian doubles");
    train_cmd->add_option("--threads", train_threads, "worker threads");
    train_cmd->add_option("--out", train_out, "model file")->required();

    // study
    auto* study_cmd = app.add_subcommand("study", "server specialization studies");
    ScenarioFlags study_flags;
    study_flags.preset = "scale";
    study_flags.attach(study_cmd);
    std::string study_kind = "tiers", study_model, study_out = default_outdir();
    int study_seeds = 10, study_threads = 0;
    std::uint64_t study_seed0 = 1;
    double study_mu = 0.0, study_gamma = 1.0;
    study_cmd->add_option("--profiles", study_kind, "tiers|specialists");
    study_cmd->add_option("--model", study_model, "comparator model for the ranking policy");
    study_cmd->add_option("--seeds", study_seeds, "seeds per profile");
    study_cmd->add_option("--seed0", study_seed0, "first seed");
    study_cmd->add_option("--mu", study_mu, "vdas mu");
    study_cmd->add_option("--gamma", study_gamma, "vdas gamma");
    study_cmd->add_option("--threads", study_threads, "worker threads");
    study_cmd->add_option("--out", study_out, "output directory");

    // report
    auto* report_cmd = app.add_subcommand("report", "summarize a run CSV");
    std::string report_csv, report_out = default_outdir();
    report_cmd->add_option("--csv", report_csv, "records csv from `run`")->required();
    report_cmd->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_flags, gen_seed, gen_count, gen_out);

        if (solve->parsed())
            return cmd_solve(solve_scenario, solve_trace, solve_nodes, solve_seconds);

        if (run_cmd->parsed()) {
            BatchConfig cfg;
            cfg.scenario = run_flags.build();
            cfg.num_seeds = run_seeds;
            cfg.seed0 = run_seed0;
            cfg.oracle = run_oracle;
            cfg.threads = run_threads;
            std::vector<PolicySpec> policies;
            std::shared_ptr<const ComparatorNet> net;
            if (run_policy == "vdas" || run_policy == "both") {
                VdasParams p;
                p.mu = run_mu;
                p.gamma = run_gamma;
                if (run_slack_min > 0) p.slack_min = run_slack_min;
                policies.push_back(vdas_spec(p));
            }
            if (run_policy == "ranking" || run_policy == "both") {
                if (run_model.empty()) throw ConfigError("--policy ranking needs --model");
                net = std::make_shared<ComparatorNet>(load_net(
                    run_model, FeatureRegistry::layout_hash(cfg.scenario.num_types)));
                policies.push_back(ranking_spec(net));
            }
            if (policies.empty()) throw ConfigError("unknown --policy '" + run_policy + "'");
            const BatchResult result = run_batch(cfg, policies);
            std::vector<std::string> names;
            for (const auto& p : policies) names.push_back(p.name);
            write_file(fs::path(run_out) / "records.csv",
                       records_to_csv(result.records, names));
            if (run_oracle)
                write_file(fs::path(run_out) / "fractions.svg",
                           fraction_chart_svg(result.records, names));
            print_summary(result.summary);
            return result.summary.failures == 0 ? 0 : 1;
        }

        if (grid_cmd->parsed()) {
            BatchConfig cfg;
            cfg.scenario = grid_flags.build();
            cfg.num_seeds = grid_seeds;
            cfg.seed0 = grid_seed0;
            cfg.threads = grid_threads;
            const GridResult grid = grid_search_vdas(cfg, grid_mu, grid_gamma);
            write_file(fs::path(grid_out) / "grid.csv", grid_to_csv(grid));
            std::cout << "best mu " << grid.best_mu << " gamma " << grid.best_gamma
                      << " mean_value " << format_real(grid.best_mean) << "\n";
            return 0;
        }

        if (extract_cmd->parsed()) {
            if (!extract_scenario.empty()) {
                const Scenario s = load_scenario(extract_scenario);
                const ScheduleTrace trace = load_trace(extract_trace);
                const auto samples = extract_samples(trace, s, 0);
                save_samples(samples, s.num_types, extract_out);
                std::cout << samples.size() << " samples -> " << extract_out << "\n";
                return 0;
            }
            if (extract_count <= 0)
                throw ConfigError("extract: need --scenario/--trace or --count");
            const RandomConfig scen_cfg = extract_flags.build();
            int certified = 0;
            const auto samples = solve_and_extract(scen_cfg, extract_count, extract_seed0,
                                                   SolveBudget{}, extract_threads, &certified);
            save_samples(samples, scen_cfg.num_types, extract_out);
            std::cout << "certified " << certified << "/" << extract_count << ", "
                      << samples.size() << " samples -> " << extract_out << "\n";
            return 0;
        }

        if (train_cmd->parsed()) {
            if (!train_samples.empty()) {
                RandomConfig scen = train_flags.build();
                const auto samples = load_samples(train_samples, scen.num_types);
                NetConfig ncfg;
                ncfg.x_dim = FeatureRegistry::dim(scen.num_types);
                ncfg.hidden_layers = train_hidden;
                ncfg.h1_cap = train_h1_cap;
                ComparatorNet net(ncfg, tcfg.seed, tcfg.init_scale);
                const TrainReport report = train(net, to_net_samples(samples), tcfg);
                save_net(net, train_out, FeatureRegistry::layout_hash(scen.num_types), train_raw,
                         {{"sample-count", std::to_string(samples.size())}});
                std::cout << "val_accuracy " << format_real(report.val_accuracy) << "\n";
                return 0;
            }
            if (train_scenarios <= 0)
                throw ConfigError("train: need --samples or --scenarios");
            PipelineConfig pcfg;
            pcfg.scenario = train_flags.build();
            pcfg.num_scenarios = train_scenarios;
            pcfg.seed0 = train_seed0;
            pcfg.train = tcfg;
            pcfg.h1_cap = train_h1_cap;
            pcfg.hidden_layers = train_hidden;
            pcfg.model_path = train_out;
            pcfg.raw_model = train_raw;
            pcfg.threads = train_threads;
            const PipelineReport report = train_pipeline(pcfg);
            std::cout << "certified " << report.certified << "/" << report.scenarios
                      << " samples " << report.samples << " val_accuracy "
                      << format_real(report.train.val_accuracy) << "\n";
            return 0;
        }

        if (study_cmd->parsed()) {
            BatchConfig cfg;
            cfg.scenario = study_flags.build();
            cfg.num_seeds = study_seeds;
            cfg.seed0 = study_seed0;
            cfg.threads = study_threads;
            std::vector<PolicySpec> policies;
            VdasParams p;
            p.mu = study_mu;
            p.gamma = study_gamma;
            policies.push_back(vdas_spec(p));
            std::shared_ptr<const ComparatorNet> net;
            if (!study_model.empty()) {
                net = std::make_shared<ComparatorNet>(load_net(
                    study_model, FeatureRegistry::layout_hash(cfg.scenario.num_types)));
                policies.push_back(ranking_spec(net));
            }
            const auto profiles = study_kind == "specialists"
                                      ? specialization_profiles(cfg.scenario)
                                      : efficiency_tier_profiles(cfg.scenario);
            const StudyResult study = specialization_study(cfg, profiles, policies);
            write_file(fs::path(study_out) / ("study-" + study_kind + ".csv"),
                       study_to_csv(study));
            for (const StudyRow& row : study.rows) {
                std::cout << "== " << row.profile << "\n";
                print_summary(row.summary);
            }
            return 0;
        }

        if (report_cmd->parsed()) {
            std::ifstream in(report_csv, std::ios::binary);
            if (!in) throw IoError("cannot open: " + report_csv);
            std::ostringstream buf;
            buf << in.rdbuf();
            std::vector<std::string> names;
            const auto records = records_from_csv(buf.str(), &names);
            print_summary(summarize(records, names));
            write_file(fs::path(report_out) / "fractions.svg",
                       fraction_chart_svg(records, names));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
