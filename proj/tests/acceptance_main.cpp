// Acceptance suite: one pass/fail line per criterion, non-zero exit when any
// criterion fails. Budgets and tolerances are pinned here, in code.

#include <chrono>
#include <cstdio>
#include <cmath>

#include "schedlab/random.hpp"

#include "oracle_bruteforce.hpp"
#include "schedlab/experiments.hpp"
#include "schedlab/scenario_io.hpp"

using namespace schedlab;

namespace {

int failures = 0;

void report(int criterion, const char* label, bool pass, const std::string& detail = "") {
    std::printf("%s  criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion, label,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RandomConfig tiny_cfg() { return preset_config("tiny"); }
RandomConfig desk_cfg() { return preset_config("desk"); }

// 1. solve_exact == exhaustive enumeration on 500 toy scenarios, exactly.
void criterion_1_and_7_part(bool& c7_ok) {
    const auto t0 = std::chrono::steady_clock::now();
    RandomConfig cfg = tiny_cfg();
    bool equal = true;
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        cfg.seed = seed;
        const Scenario s = generate_scenario(cfg);
        const OfflineProblem p = OfflineProblem::from(s);
        const OfflineSolution sol = solve_exact(p);
        if (!sol.certified) {
            equal = false;
            break;
        }
        try {
            validate_solution(p, sol);
        } catch (const std::exception&) {
            c7_ok = false;
        }
        const double oracle = testoracle::brute_force_optimal(s);
        if (sol.objective != oracle) {
            equal = false;
            std::fprintf(stderr, "  seed %llu: solver %.17g vs oracle %.17g\n",
                         static_cast<unsigned long long>(seed), sol.objective, oracle);
            break;
        }
        ++checked;
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d/500 scenarios, %.1fs", checked, elapsed_s(t0));
    report(1, "exact solver equals the enumeration oracle (0 tolerance)", equal && checked == 500,
           detail);
}

std::shared_ptr<const ComparatorNet> random_net() {
    NetConfig cfg;
    cfg.x_dim = FeatureRegistry::dim(3);
    cfg.h1_cap = 64;
    return std::make_shared<ComparatorNet>(cfg, 2024);
}

// 2. Certified optima dominate both online policies on 200 desk scenarios.
void criterion_2(bool& c7_ok) {
    const auto t0 = std::chrono::steady_clock::now();
    BatchConfig cfg;
    cfg.scenario = desk_cfg();
    cfg.num_seeds = 200;
    cfg.seed0 = 10'000;
    cfg.oracle = true;
    VdasParams params;
    params.mu = 0.5;
    params.gamma = 1.2;
    bool ok = true;
    int certified = 0;
    std::string detail;
    try {
        const BatchResult r =
            run_batch(cfg, {vdas_spec(params), ranking_spec(random_net())});
        for (const RunRecord& rec : r.records) {
            if (rec.failed || !rec.certified) {
                ok = false;
                continue;
            }
            ++certified;
            for (double f : rec.fraction)
                if (f > 1.0) ok = false;
        }
        // run_batch also re-validates every solution internally
    } catch (const IntegrityError& e) {
        ok = false;
        detail = e.what();
        c7_ok = false;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d/200 certified, %.1fs %s", certified, elapsed_s(t0),
                  detail.c_str());
    report(2, "VDaS and Ranking never exceed certified optima", ok && certified == 200, buf);
}

// 3. Reflexivity / swap equivalence / probability normalization.
void criterion_3() {
    SplitMix64 rng(31337);
    bool ok = true;
    for (int n = 0; n < 10 && ok; ++n) {
        NetConfig cfg;
        cfg.x_dim = 5 + static_cast<int>(rng.uniform_int(0, 15));
        cfg.h1_cap = 32;
        cfg.hidden_layers = n % 2 ? 3 : 4;
        ComparatorNet net(cfg, rng.next_u64());
        for (int k = 0; k < 1000 && ok; ++k) {
            std::vector<double> x(static_cast<std::size_t>(cfg.x_dim)),
                y(static_cast<std::size_t>(cfg.x_dim));
            for (double& v : x) v = rng.uniform(-2.0, 2.0);
            for (double& v : y) v = rng.uniform(-2.0, 2.0);
            const auto [xx1, xx2] = net.forward(x, x);
            const auto [a1, a2] = net.forward(x, y);
            const auto [b1, b2] = net.forward(y, x);
            if (std::abs(xx1 - 0.5) >= 1e-9 || std::abs(xx2 - 0.5) >= 1e-9) ok = false;
            if (std::abs(a1 - b2) >= 1e-9 || std::abs(a2 - b1) >= 1e-9) ok = false;
            if (std::abs(a1 + a2 - 1.0) >= 1e-12) ok = false;
        }
    }
    report(3, "comparator symmetry suite (10 nets x 10^4 pairs)", ok);
}

// 4. Backprop vs central finite differences on a capped-width net.
void criterion_4() {
    NetConfig cfg;
    cfg.x_dim = 8;
    cfg.h1_cap = 16;
    ComparatorNet net(cfg, 77);
    SplitMix64 rng(88);
    double worst = 0.0;
    int checked = 0;
    for (int k = 0; checked < 20 && k < 200; ++k) {
        Sample s;
        s.x.resize(8);
        s.y.resize(8);
        for (double& v : s.x) v = rng.uniform(-1.0, 1.0);
        for (double& v : s.y) v = rng.uniform(-1.0, 1.0);
        s.label = static_cast<int>(rng.uniform_int(0, 1));
        if (net.min_relu_margin(s.x, s.y) < 1e-3) continue;  // off the ReLU kink
        worst = std::max(worst, grad_check(net, s, 1e-5));
        ++checked;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max relative error %.3g over %d samples", worst,
                  checked);
    report(4, "gradient check vs finite differences < 1e-4", checked == 20 && worst < 1e-4,
           detail);
}

// 5. First-hidden-width formula.
void criterion_5() {
    const bool ok = first_hidden_width(10) == 1024 && first_hidden_width(24) == 2048 &&
                    first_hidden_width(33) == 4096 && first_hidden_width(64) == 4096;
    report(5, "h1 = 2^(ceil(lg x_dim)+6) on {10,24,33,64}", ok);
}

// 6. Learned policy quality at desk scale.
void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();

    // grid-search VDaS on its own seed block
    BatchConfig grid_cfg;
    grid_cfg.scenario = desk_cfg();
    grid_cfg.num_seeds = 40;
    grid_cfg.seed0 = 50'000;
    const GridResult grid = grid_search_vdas(grid_cfg, {0.0, 0.5, 1.0, 1.5, 2.0},
                                             {1.0, 1.2, 1.5, 2.0, 3.0});
    VdasParams best;
    best.mu = grid.best_mu;
    best.gamma = grid.best_gamma;

    // train on 300 oracle-solved scenarios
    PipelineConfig pcfg;
    pcfg.scenario = desk_cfg();
    pcfg.num_scenarios = 300;
    pcfg.seed0 = 60'000;
    pcfg.train.epochs = 40;
    pcfg.train.seed = 7;
    pcfg.h1_cap = 128;
    pcfg.model_path = "acceptance-model.cmpnet";
    const PipelineReport pipeline = train_pipeline(pcfg);
    auto net = std::make_shared<ComparatorNet>(
        load_net(pcfg.model_path, FeatureRegistry::layout_hash(3)));

    // evaluate both policies on fresh seeds with certified optima
    BatchConfig eval_cfg;
    eval_cfg.scenario = desk_cfg();
    eval_cfg.num_seeds = 300;
    eval_cfg.seed0 = 70'000;
    eval_cfg.oracle = true;
    const BatchResult r =
        run_batch(eval_cfg, {vdas_spec(best, "vdas"), ranking_spec(net, "ranking")});

    const double f_vdas = r.summary.fraction[0].mean;
    const double f_rank = r.summary.fraction[1].mean;
    const int certified = r.summary.fraction[0].count;
    const bool ok = certified == 300 && f_rank >= f_vdas - 0.01 && f_vdas >= 0.70 &&
                    f_rank >= 0.70;
    char detail[240];
    std::snprintf(detail, sizeof(detail),
                  "grid best (mu=%.1f,gamma=%.1f); pipeline %d/%d certified, %zu samples, "
                  "val_acc %.3f; frac vdas %.4f vs ranking %.4f (gap %+.4f), %.0fs",
                  grid.best_mu, grid.best_gamma, pipeline.certified, pipeline.scenarios,
                  pipeline.samples, pipeline.train.val_accuracy, f_vdas, f_rank,
                  f_rank - f_vdas, elapsed_s(t0));
    report(6, "trained Ranking holds its own against grid-searched VDaS", ok, detail);
}

// 8. Degenerate single-server fixture, hand-traced.
void criterion_8() {
    Scenario s;
    s.num_types = 1;
    s.t_max = 20;
    s.servers = {Server{0, {1.0}}};
    auto mk = [](int id, Time a, Time d, int p, double v) {
        Job j;
        j.id = id;
        j.arrival = a;
        j.deadline = d;
        j.proc_time = p;
        j.value = v;
        j.pref = {1.0};
        return j;
    };
    s.jobs = {mk(0, 0, 10, 4, 40.0), mk(1, 2, 12, 4, 60.0), mk(2, 3, 18, 6, 90.0)};
    s.validate();

    struct Recorder : Policy {
        VdasPolicy inner;
        std::vector<std::tuple<Time, int, int>> log;
        explicit Recorder(VdasParams p) : inner(p) {}
        std::vector<Directive> on_arrival(const SimView& v, std::span<const int> ids,
                                          Time t) override {
            auto dirs = inner.on_arrival(v, ids, t);
            for (const Directive& d : dirs) log.emplace_back(t, d.job, d.server);
            return dirs;
        }
        std::vector<Directive> on_completion(const SimView& v, std::span<const int> ids,
                                             Time t) override {
            auto dirs = inner.on_completion(v, ids, t);
            for (const Directive& d : dirs) log.emplace_back(t, d.job, d.server);
            return dirs;
        }
    };
    VdasParams params;
    params.mu = 0.0;
    params.gamma = 1.2;
    Recorder rec(params);
    const SimResult r = run(s, rec);
    const std::vector<std::tuple<Time, int, int>> expected = {{0, 0, 0}, {2, 1, 0}, {6, 2, 0}};
    const bool ok = rec.log == expected && std::abs(r.total_value - 150.0) < 1e-9 &&
                    r.completed == std::vector<int>{1, 2};
    report(8, "VDaS degenerate fixture matches the hand-traced directives", ok);
}

// 9. Byte-identical batch outputs across reruns and thread counts.
void criterion_9() {
    BatchConfig cfg;
    cfg.scenario = tiny_cfg();
    cfg.num_seeds = 25;
    cfg.seed0 = 123;
    cfg.oracle = true;
    VdasParams params;
    params.gamma = 1.5;
    cfg.threads = 1;
    const std::string a =
        records_to_csv(run_batch(cfg, {vdas_spec(params)}).records, {"vdas"});
    cfg.threads = 4;
    const std::string b =
        records_to_csv(run_batch(cfg, {vdas_spec(params)}).records, {"vdas"});
    cfg.threads = 0;
    const std::string c =
        records_to_csv(run_batch(cfg, {vdas_spec(params)}).records, {"vdas"});
    report(9, "rerunning a batch produces byte-identical CSV", a == b && b == c);
}

// 10. Separable synthetic rule reaches 0.95 validation accuracy in budget.
void criterion_10() {
    const auto t0 = std::chrono::steady_clock::now();
    SplitMix64 rng(4242);
    std::vector<Sample> samples;
    for (int k = 0; k < 1000; ++k) {
        Sample s;
        s.x.resize(6);
        s.y.resize(6);
        for (double& v : s.x) v = rng.uniform(-1.0, 1.0);
        for (double& v : s.y) v = rng.uniform(-1.0, 1.0);
        if (s.x[0] == s.y[0]) s.x[0] += 0.25;
        s.label = s.x[0] > s.y[0] ? 0 : 1;
        samples.push_back(std::move(s));
    }
    NetConfig cfg;
    cfg.x_dim = 6;  // default cap applies: widths 512/256/128/64
    ComparatorNet net(cfg, 11);
    const TrainConfig tcfg;  // the default training budget
    const TrainReport rep = train(net, samples, tcfg);
    const double secs = elapsed_s(t0);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "val_accuracy %.3f in %.1fs (%d epochs)",
                  rep.val_accuracy, secs, rep.epochs_run);
    report(10, "synthetic separable rule learned to >= 0.95 within 60s",
           rep.val_accuracy >= 0.95 && secs < 60.0, detail);
}

}  // namespace

int main() {
    bool c7_ok = true;
    criterion_1_and_7_part(c7_ok);
    criterion_2(c7_ok);
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    report(7, "capacity/window/all-or-nothing/affinity hold on every solution", c7_ok);
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf(failures == 0 ? "ALL CRITERIA PASSED\n" : "%d CRITERIA FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
