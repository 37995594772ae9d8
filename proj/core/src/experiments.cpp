#include "schedlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "schedlab/scenario_io.hpp"

namespace schedlab {

RandomConfig preset_config(const std::string& name) {
    RandomConfig cfg;  // defaults are the "paper" family
    if (name == "paper") {
        return cfg;
    }
    if (name == "tiny") {
        cfg.num_jobs = 6;
        cfg.num_servers = 2;
        cfg.proc_time = {2, 5};
        cfg.slack = {1.5, 3.0};
        cfg.t_max = 20;
        cfg.arrival_hi = 5;
        return cfg;
    }
    if (name == "desk") {
        cfg.num_jobs = 12;
        cfg.num_servers = 3;
        cfg.proc_time = {3, 10};
        cfg.t_max = 60;
        cfg.arrival_hi = 20;
        return cfg;
    }
    if (name == "scale") {
        cfg.num_jobs = 300;
        cfg.num_servers = 30;
        cfg.t_max = 400;
        return cfg;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

std::uint64_t config_hash(const RandomConfig& cfg) {
    std::ostringstream s;
    s << cfg.seed << "|" << cfg.num_jobs << "|" << cfg.num_servers << "|" << cfg.num_types << "|"
      << cfg.proc_time.lo << "," << cfg.proc_time.hi << "|" << format_real(cfg.slack.lo) << ","
      << format_real(cfg.slack.hi) << "|" << format_real(cfg.value.lo) << ","
      << format_real(cfg.value.hi) << "|" << format_real(cfg.pref.lo) << ","
      << format_real(cfg.pref.hi) << "|" << format_real(cfg.eta.lo) << ","
      << format_real(cfg.eta.hi) << "|" << cfg.t_min << "," << cfg.t_max;
    if (cfg.arrival_hi) s << "|ahi=" << *cfg.arrival_hi;
    if (cfg.fixed_pref) s << "|psi=" << format_real(*cfg.fixed_pref);
    if (cfg.eta_override) {
        s << "|eta=";
        for (const auto& row : *cfg.eta_override)
            for (double e : row) s << format_real(e) << ",";
    }
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s.str()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

PolicySpec vdas_spec(const VdasParams& params, std::string name) {
    return {std::move(name),
            [params](const Scenario&) { return std::make_unique<VdasPolicy>(params); }};
}

PolicySpec ranking_spec(std::shared_ptr<const ComparatorNet> net, std::string name) {
    return {std::move(name), [net](const Scenario& s) {
                return std::make_unique<RankingPolicy>(s, net.get());
            }};
}

namespace {

RunRecord run_one_seed(const BatchConfig& cfg, const std::vector<PolicySpec>& policies,
                       std::uint64_t seed) {
    RunRecord rec;
    rec.seed = seed;
    RandomConfig scen_cfg = cfg.scenario;
    scen_cfg.seed = seed;
    const Scenario scenario = generate_scenario(scen_cfg);

    for (const PolicySpec& spec : policies) {
        auto policy = spec.make(scenario);
        const SimResult result = run(scenario, *policy);
        rec.value.push_back(result.total_value);
        rec.events.push_back(result.events_processed);
    }

    if (cfg.oracle) {
        const OfflineProblem problem = OfflineProblem::from(scenario);
        const OfflineSolution sol = solve_exact(problem, cfg.budget);
        validate_solution(problem, sol);
        rec.optimal = sol.objective;
        rec.certified = sol.certified;
        rec.solver_nodes = sol.nodes;
        if (sol.certified) {
            for (double v : rec.value) {
                if (v > sol.objective)
                    throw IntegrityError(
                        "online policy exceeded a certified optimum (seed " +
                        std::to_string(seed) + "): " + format_real(v) + " > " +
                        format_real(sol.objective));
                rec.fraction.push_back(sol.objective == 0.0 ? 1.0 : v / sol.objective);
            }
        }
    }
    return rec;
}

Aggregate aggregate_of(std::vector<double> xs) {
    Aggregate a;
    a.count = static_cast<int>(xs.size());
    if (xs.empty()) return a;
    std::sort(xs.begin(), xs.end());
    double sum = 0.0;
    for (double x : xs) sum += x;
    a.mean = sum / static_cast<double>(xs.size());
    a.median = xs.size() % 2 ? xs[xs.size() / 2]
                             : 0.5 * (xs[xs.size() / 2 - 1] + xs[xs.size() / 2]);
    double sq = 0.0;
    for (double x : xs) sq += (x - a.mean) * (x - a.mean);
    a.stddev = xs.size() > 1 ? std::sqrt(sq / static_cast<double>(xs.size() - 1)) : 0.0;
    return a;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int k = 0; k < n; ++k) body(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mu;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1)) {
                try {
                    body(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

BatchSummary summarize(const std::vector<RunRecord>& records,
                       const std::vector<std::string>& names) {
    BatchSummary summary;
    summary.policy_names = names;
    for (std::size_t p = 0; p < names.size(); ++p) {
        std::vector<double> values, fractions;
        for (const RunRecord& r : records) {
            if (r.failed) continue;
            values.push_back(r.value[p]);
            if (r.certified) fractions.push_back(r.fraction[p]);
        }
        summary.value.push_back(aggregate_of(std::move(values)));
        summary.fraction.push_back(aggregate_of(std::move(fractions)));
    }
    for (const RunRecord& r : records) summary.failures += r.failed ? 1 : 0;
    return summary;
}

BatchResult run_batch(const BatchConfig& cfg, const std::vector<PolicySpec>& policies) {
    if (policies.empty()) throw ConfigError("run_batch: no policies");
    BatchResult result;
    result.records.resize(static_cast<std::size_t>(cfg.num_seeds));

    parallel_for(cfg.num_seeds, cfg.threads, [&](int k) {
        const std::uint64_t seed = cfg.seed0 + static_cast<std::uint64_t>(k);
        auto& rec = result.records[static_cast<std::size_t>(k)];
        try {
            rec = run_one_seed(cfg, policies, seed);
        } catch (const IntegrityError&) {
            throw;  // a bug signal, not a per-seed condition
        } catch (const std::exception& e) {
            rec = RunRecord{};
            rec.seed = seed;
            rec.value.assign(policies.size(), 0.0);
            rec.events.assign(policies.size(), 0);
            rec.failed = true;
            rec.error = e.what();
        }
    });

    std::vector<std::string> names;
    for (const auto& p : policies) names.push_back(p.name);
    result.summary = summarize(result.records, names);
    return result;
}

std::string records_to_csv(const std::vector<RunRecord>& records,
                           const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "seed";
    for (const auto& n : names) out << ",value_" << n << ",events_" << n;
    out << ",optimal,certified,solver_nodes";
    for (const auto& n : names) out << ",frac_" << n;
    out << ",failed,error\n";
    for (const RunRecord& r : records) {
        out << r.seed;
        for (std::size_t p = 0; p < names.size(); ++p)
            out << "," << format_real(r.value[p]) << "," << r.events[p];
        out << "," << (r.optimal ? format_real(*r.optimal) : "") << ","
            << (r.certified ? 1 : 0) << "," << r.solver_nodes;
        for (std::size_t p = 0; p < names.size(); ++p)
            out << "," << (r.certified ? format_real(r.fraction[p]) : "");
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << "," << (r.failed ? 1 : 0) << "," << err << "\n";
    }
    return out.str();
}

std::vector<RunRecord> records_from_csv(const std::string& csv, std::vector<std::string>* names) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw IoError("records: empty csv");
    std::vector<std::string> cols;
    {
        std::istringstream hs(line);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    std::vector<std::string> policy_names;
    for (const std::string& c : cols)
        if (c.rfind("value_", 0) == 0) policy_names.push_back(c.substr(6));
    if (names) *names = policy_names;
    const std::size_t P = policy_names.size();

    std::vector<RunRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) f.push_back(c);
        f.resize(cols.size());  // trailing empty error field
        RunRecord r;
        std::size_t k = 0;
        r.seed = std::stoull(f[k++]);
        for (std::size_t p = 0; p < P; ++p) {
            r.value.push_back(std::stod(f[k++]));
            r.events.push_back(std::stoll(f[k++]));
        }
        if (!f[k].empty()) r.optimal = std::stod(f[k]);
        ++k;
        r.certified = f[k++] == "1";
        r.solver_nodes = std::stoull(f[k++]);
        for (std::size_t p = 0; p < P; ++p) {
            if (r.certified) r.fraction.push_back(std::stod(f[k]));
            ++k;
        }
        r.failed = f[k++] == "1";
        r.error = f[k];
        records.push_back(std::move(r));
    }
    return records;
}

std::string fraction_chart_svg(const std::vector<RunRecord>& records,
                               const std::vector<std::string>& names) {
    std::vector<const RunRecord*> rows;
    for (const RunRecord& r : records)
        if (r.certified && !r.failed) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(),
              [](const RunRecord* a, const RunRecord* b) { return a->fraction[0] < b->fraction[0]; });

    const int W = 720, H = 420, ml = 50, mb = 40, mt = 20, mr = 20;
    const double px = static_cast<double>(W - ml - mr);
    const double py = static_cast<double>(H - mt - mb);
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    for (int g = 0; g <= 10; ++g) {
        const double yy = mt + py * (1.0 - g / 10.0);
        out << "<line x1='" << ml << "' y1='" << yy << "' x2='" << W - mr << "' y2='" << yy
            << "' stroke='#dddddd'/>\n";
        out << "<text x='" << ml - 6 << "' y='" << yy + 4
            << "' font-size='11' text-anchor='end'>" << g / 10.0 << "</text>\n";
    }
    for (std::size_t p = 0; p < names.size() && !rows.empty(); ++p) {
        out << "<polyline fill='none' stroke='" << palette[p % 4] << "' stroke-width='1.5' points='";
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const double xx =
                ml + px * (rows.size() == 1 ? 0.5
                                            : static_cast<double>(k) /
                                                  static_cast<double>(rows.size() - 1));
            const double yy = mt + py * (1.0 - std::min(1.0, rows[k]->fraction[p]));
            out << xx << "," << yy << " ";
        }
        out << "'/>\n";
        out << "<text x='" << ml + 8 << "' y='" << mt + 16 + 16 * static_cast<int>(p)
            << "' font-size='12' fill='" << palette[p % 4] << "'>" << names[p] << "</text>\n";
    }
    out << "<text x='" << ml + px / 2 << "' y='" << H - 8
        << "' font-size='12' text-anchor='middle'>runs, sorted by " << (names.empty() ? "" : names[0])
        << " fraction of optimal</text>\n";
    out << "</svg>\n";
    return out.str();
}

GridResult grid_search_vdas(const BatchConfig& cfg, std::vector<double> mu_grid,
                            std::vector<double> gamma_grid) {
    if (mu_grid.empty() || gamma_grid.empty()) throw ConfigError("grid: empty grid");
    auto dedup = [](std::vector<double>& g) {
        std::vector<double> seen;
        std::erase_if(g, [&](double v) {
            if (std::find(seen.begin(), seen.end(), v) != seen.end()) return true;
            seen.push_back(v);
            return false;
        });
    };
    dedup(mu_grid);
    dedup(gamma_grid);

    GridResult grid;
    bool first = true;
    for (double mu : mu_grid) {
        for (double gamma : gamma_grid) {
            VdasParams params;
            params.mu = mu;
            params.gamma = gamma;
            BatchConfig cell_cfg = cfg;
            cell_cfg.oracle = false;
            const BatchResult r = run_batch(cell_cfg, {vdas_spec(params)});
            const double mean = r.summary.value[0].mean;
            grid.table.push_back({mu, gamma, mean});
            if (first || mean > grid.best_mean) {
                first = false;
                grid.best_mean = mean;
                grid.best_mu = mu;
                grid.best_gamma = gamma;
            }
        }
    }
    return grid;
}

std::string grid_to_csv(const GridResult& grid) {
    std::ostringstream out;
    out << "mu,gamma,mean_value\n";
    for (const GridCell& c : grid.table)
        out << format_real(c.mu) << "," << format_real(c.gamma) << ","
            << format_real(c.mean_value) << "\n";
    return out.str();
}

std::vector<StudyProfile> efficiency_tier_profiles(const RandomConfig& base) {
    std::vector<StudyProfile> out;
    const double tiers[] = {0.60, 0.75, 0.82, 0.90};
    for (double eta : tiers) {
        RandomConfig cfg = base;
        // Fewer servers in the more efficient groups: matched throughput.
        cfg.num_servers = std::max(
            1, static_cast<int>(std::floor(base.num_servers * 0.60 / eta + 0.5)));
        cfg.fixed_pref = 1.0;
        cfg.eta_override = std::vector<std::vector<double>>(
            static_cast<std::size_t>(cfg.num_servers),
            std::vector<double>(static_cast<std::size_t>(cfg.num_types), eta));
        char name[32];
        std::snprintf(name, sizeof(name), "tier-%.2f", eta);
        out.push_back({name, std::move(cfg)});
    }
    return out;
}

std::vector<StudyProfile> specialization_profiles(const RandomConfig& base) {
    std::vector<StudyProfile> out;
    struct Pair {
        double avg, spec_high, spec_low;
    };
    const Pair pairs[] = {{0.70, 0.90, 0.63}, {0.80, 0.90, 0.76}};
    for (const Pair& p : pairs) {
        {
            RandomConfig cfg = base;
            cfg.fixed_pref = 1.0;
            cfg.eta_override = std::vector<std::vector<double>>(
                static_cast<std::size_t>(cfg.num_servers),
                std::vector<double>(static_cast<std::size_t>(cfg.num_types), p.avg));
            char name[32];
            std::snprintf(name, sizeof(name), "avg-%.2f", p.avg);
            out.push_back({name, std::move(cfg)});
        }
        {
            RandomConfig cfg = base;
            cfg.fixed_pref = 1.0;
            std::vector<std::vector<double>> eta(
                static_cast<std::size_t>(cfg.num_servers),
                std::vector<double>(static_cast<std::size_t>(cfg.num_types), p.spec_low));
            // Every server specializes in one type, spread round-robin.
            for (int i = 0; i < cfg.num_servers; ++i)
                eta[static_cast<std::size_t>(i)][static_cast<std::size_t>(i % cfg.num_types)] =
                    p.spec_high;
            cfg.eta_override = std::move(eta);
            char name[48];
            std::snprintf(name, sizeof(name), "spec-%.2f-%.2f", p.spec_high, p.spec_low);
            out.push_back({name, std::move(cfg)});
        }
    }
    return out;
}

StudyResult specialization_study(const BatchConfig& base,
                                 const std::vector<StudyProfile>& profiles,
                                 const std::vector<PolicySpec>& policies) {
    StudyResult study;
    for (const StudyProfile& profile : profiles) {
        BatchConfig cfg = base;
        cfg.scenario = profile.config;
        const BatchResult r = run_batch(cfg, policies);
        study.rows.push_back({profile.name, r.summary});
    }
    return study;
}

std::string study_to_csv(const StudyResult& study) {
    std::ostringstream out;
    out << "profile,policy,mean_value,median_value,stddev_value,runs\n";
    for (const StudyRow& row : study.rows)
        for (std::size_t p = 0; p < row.summary.policy_names.size(); ++p)
            out << row.profile << "," << row.summary.policy_names[p] << ","
                << format_real(row.summary.value[p].mean) << ","
                << format_real(row.summary.value[p].median) << ","
                << format_real(row.summary.value[p].stddev) << "," << row.summary.value[p].count
                << "\n";
    return out.str();
}

std::vector<TrainingSample> solve_and_extract(const RandomConfig& scenario, int count,
                                              std::uint64_t seed0, const SolveBudget& budget,
                                              int threads, int* certified) {
    std::vector<std::vector<TrainingSample>> per_scenario(static_cast<std::size_t>(count));
    std::vector<char> ok(static_cast<std::size_t>(count), 0);
    parallel_for(count, threads, [&](int k) {
        RandomConfig scen_cfg = scenario;
        scen_cfg.seed = seed0 + static_cast<std::uint64_t>(k);
        const Scenario scen = generate_scenario(scen_cfg);
        const OfflineProblem problem = OfflineProblem::from(scen);
        const OfflineSolution sol = solve_exact(problem, budget);
        if (!sol.certified) return;  // never train on unproven supervision
        const ScheduleTrace trace = extract_decision_trace(problem, sol);
        per_scenario[static_cast<std::size_t>(k)] = extract_samples(trace, scen, scen_cfg.seed);
        ok[static_cast<std::size_t>(k)] = 1;
    });
    std::vector<TrainingSample> samples;
    int n_certified = 0;
    for (int k = 0; k < count; ++k) {
        n_certified += ok[static_cast<std::size_t>(k)];
        auto& part = per_scenario[static_cast<std::size_t>(k)];
        samples.insert(samples.end(), part.begin(), part.end());
    }
    if (certified) *certified = n_certified;
    return samples;
}

PipelineReport train_pipeline(const PipelineConfig& cfg) {
    PipelineReport report;
    report.scenarios = cfg.num_scenarios;

    std::vector<TrainingSample> samples;
    try {
        samples = solve_and_extract(cfg.scenario, cfg.num_scenarios, cfg.seed0, cfg.budget,
                                    cfg.threads, &report.certified);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("pipeline stage solve/extract: ") + e.what());
    }
    report.samples = samples.size();
    if (samples.empty()) throw std::runtime_error("pipeline stage extract: no training samples");

    if (!cfg.samples_path.empty()) {
        try {
            save_samples(samples, cfg.scenario.num_types, cfg.samples_path);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("pipeline stage save-samples: ") + e.what());
        }
    }

    NetConfig net_cfg;
    net_cfg.x_dim = FeatureRegistry::dim(cfg.scenario.num_types);
    net_cfg.hidden_layers = cfg.hidden_layers;
    net_cfg.h1_cap = cfg.h1_cap;
    ComparatorNet net(net_cfg, cfg.train.seed, cfg.train.init_scale);
    try {
        report.train = train(net, to_net_samples(samples), cfg.train);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("pipeline stage train: ") + e.what());
    }

    try {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(config_hash(cfg.scenario)));
        std::map<std::string, std::string> prov{{"scenario-config", buf},
                                                {"sample-count", std::to_string(samples.size())},
                                                {"certified-scenarios",
                                                 std::to_string(report.certified)}};
        save_net(net, cfg.model_path, FeatureRegistry::layout_hash(cfg.scenario.num_types),
                 cfg.raw_model, prov);
        std::ofstream curve(cfg.model_path + ".losscurve.csv", std::ios::binary);
        curve << "epoch,train_loss,val_loss\n";
        curve << "0,," << format_real(report.train.val_loss.empty() ? 0.0
                                                                    : report.train.val_loss[0])
              << "\n";
        for (std::size_t e = 0; e < report.train.train_loss.size(); ++e)
            curve << e + 1 << "," << format_real(report.train.train_loss[e]) << ","
                  << format_real(report.train.val_loss[e + 1]) << "\n";
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("pipeline stage persist: ") + e.what());
    }
    return report;
}

}  // namespace schedlab
