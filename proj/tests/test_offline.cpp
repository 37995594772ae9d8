#include <doctest.h>

#include "oracle_bruteforce.hpp"
#include "schedlab/offline.hpp"
#include "schedlab/sim.hpp"
#include "schedlab/vdas.hpp"

using namespace schedlab;

namespace {

Job job(int id, Time a, Time d, int p, double v, int jtype = 0,
        std::vector<double> pref = {1.0}) {
    Job j;
    j.id = id;
    j.arrival = a;
    j.deadline = d;
    j.proc_time = p;
    j.value = v;
    j.jtype = jtype;
    j.pref = std::move(pref);
    return j;
}

RandomConfig tiny_config(std::uint64_t seed) {
    RandomConfig cfg;
    cfg.seed = seed;
    cfg.num_jobs = 6;
    cfg.num_servers = 2;
    cfg.proc_time = {2, 5};
    cfg.slack = {1.5, 3.0};
    cfg.t_max = 20;
    cfg.arrival_hi = 5;
    return cfg;
}

}  // namespace

TEST_CASE("one feasible job yields its preference-scaled value") {
    Scenario s;
    s.num_types = 1;
    s.t_max = 20;
    s.servers = {Server{0, {1.0}}};
    s.jobs = {job(0, 0, 10, 5, 100.0, 0, {0.8})};
    s.validate();
    const OfflineProblem p = OfflineProblem::from(s);
    const OfflineSolution sol = solve_exact(p);
    CHECK(sol.certified);
    CHECK(sol.objective == doctest::Approx(80.0));
    CHECK(sol.server_of_job == std::vector<int>{0});
    validate_solution(p, sol);
}

TEST_CASE("mutually exclusive jobs resolve to the dominant one") {
    Scenario s;
    s.num_types = 1;
    s.t_max = 20;
    s.servers = {Server{0, {1.0}}};
    s.jobs = {job(0, 0, 5, 5, 100.0), job(1, 0, 5, 5, 60.0)};
    s.validate();
    const OfflineProblem p = OfflineProblem::from(s);
    const OfflineSolution sol = solve_exact(p);
    CHECK(sol.objective == doctest::Approx(100.0));
    CHECK(sol.server_of_job[0] == 0);
    CHECK(sol.server_of_job[1] == -1);

    // the losing job's whole lifecycle is one arrival reject
    const ScheduleTrace trace = extract_decision_trace(p, sol);
    int rejects = 0;
    for (const TraceEvent& e : trace.events)
        if (e.job == 1) {
            CHECK(e.kind == TraceEventKind::reject);
            CHECK(e.t == 0);
            ++rejects;
        }
    CHECK(rejects == 1);
}

TEST_CASE("solver matches the exhaustive matching oracle exactly") {
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
        const Scenario s = generate_scenario(tiny_config(seed));
        const OfflineProblem p = OfflineProblem::from(s);
        const OfflineSolution sol = solve_exact(p);
        REQUIRE(sol.certified);
        validate_solution(p, sol);
        const double oracle = testoracle::brute_force_optimal(s);
        CHECK(sol.objective == oracle);  // exact, no tolerance
    }
}

TEST_CASE("a contiguous run produces schedule and complete events only") {
    Scenario s;
    s.num_types = 1;
    s.t_max = 12;
    s.servers = {Server{0, {1.0}}};
    s.jobs = {job(0, 3, 8, 5, 50.0)};
    s.validate();
    const OfflineProblem p = OfflineProblem::from(s);
    const OfflineSolution sol = solve_exact(p);
    const ScheduleTrace trace = extract_decision_trace(p, sol);
    REQUIRE(trace.events.size() == 2);
    CHECK(trace.events[0] == TraceEvent{3, TraceEventKind::schedule, 0, 0});
    CHECK(trace.events[1] == TraceEvent{8, TraceEventKind::complete, 0, 0});
    CHECK(trace.off_event_decisions == 0);
}

TEST_CASE("an interrupted run reconstructs schedule/preempt/resume/complete") {
    // EDF packs job 0 on [3,5] and [9,11], job 1 on [6,8]
    Scenario s;
    s.num_types = 1;
    s.t_max = 15;
    s.servers = {Server{0, {1.0}}};
    s.jobs = {job(0, 3, 11, 6, 60.0), job(1, 6, 9, 3, 30.0)};
    s.validate();
    const OfflineProblem p = OfflineProblem::from(s);
    const OfflineSolution sol = solve_exact(p);
    CHECK(sol.objective == doctest::Approx(90.0));
    const ScheduleTrace trace = extract_decision_trace(p, sol);

    std::vector<TraceEvent> job0;
    for (const TraceEvent& e : trace.events)
        if (e.job == 0) job0.push_back(e);
    REQUIRE(job0.size() == 4);
    CHECK(job0[0] == TraceEvent{3, TraceEventKind::schedule, 0, 0});
    CHECK(job0[1] == TraceEvent{6, TraceEventKind::preempt, 0, 0});
    CHECK(job0[2] == TraceEvent{9, TraceEventKind::resume, 0, 0});
    CHECK(job0[3] == TraceEvent{12, TraceEventKind::complete, 0, 0});
    // the preemption lands on job 1's arrival, the resume on its completion
    CHECK(trace.off_event_decisions == 0);
}

TEST_CASE("structural validation rejects corrupted solutions") {
    Scenario s;
    s.num_types = 1;
    s.t_max = 10;
    s.servers = {Server{0, {1.0}}};
    s.jobs = {job(0, 0, 6, 3, 30.0)};
    s.validate();
    const OfflineProblem p = OfflineProblem::from(s);
    OfflineSolution sol = solve_exact(p);

    SUBCASE("window violation") {
        sol.timeline[0][8] = 0;  // outside [0,6]
        CHECK_THROWS_AS(validate_solution(p, sol), IntegrityError);
    }
    SUBCASE("partial allocation") {
        for (auto& cell : sol.timeline[0]) cell = -1;
        sol.timeline[0][0] = 0;  // 1 of 3 demand units
        CHECK_THROWS_AS(validate_solution(p, sol), IntegrityError);
    }
    SUBCASE("assignment mismatch") {
        sol.server_of_job[0] = -1;
        CHECK_THROWS_AS(validate_solution(p, sol), IntegrityError);
    }
}

TEST_CASE("a node budget of one returns an uncertified incumbent") {
    const Scenario s = generate_scenario(tiny_config(5));
    SolveBudget budget;
    budget.max_nodes = 1;
    const OfflineSolution sol = solve_exact(OfflineProblem::from(s), budget);
    CHECK_FALSE(sol.certified);
}

TEST_CASE("adding a job never decreases the optimal objective") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        RandomConfig cfg = tiny_config(seed);
        cfg.num_jobs = 5;
        const Scenario base = generate_scenario(cfg);
        const double v0 = solve_exact(OfflineProblem::from(base)).objective;

        Scenario extended = base;
        Job extra = job(base.num_jobs(), 2, 14, 3, 120.0, 0,
                        std::vector<double>(static_cast<std::size_t>(base.num_servers()), 0.9));
        extended.jobs.push_back(extra);
        extended.validate();
        const double v1 = solve_exact(OfflineProblem::from(extended)).objective;
        CHECK(v1 >= v0);
    }
}

TEST_CASE("no online policy beats the certified offline optimum") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const Scenario s = generate_scenario(tiny_config(seed));
        const OfflineSolution sol = solve_exact(OfflineProblem::from(s));
        REQUIRE(sol.certified);
        VdasParams params;
        params.gamma = 1.2;
        VdasPolicy vdas(params);
        const SimResult r = run(s, vdas);
        CHECK(r.total_value <= sol.objective);
    }
}

TEST_CASE("solving the same problem twice is bit-identical") {
    const Scenario s = generate_scenario(tiny_config(9));
    const OfflineProblem p = OfflineProblem::from(s);
    const OfflineSolution a = solve_exact(p);
    const OfflineSolution b = solve_exact(p);
    CHECK(a.objective == b.objective);
    CHECK(a.server_of_job == b.server_of_job);
    CHECK(a.timeline == b.timeline);
    CHECK(a.nodes == b.nodes);
}
