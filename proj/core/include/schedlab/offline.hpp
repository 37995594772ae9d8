#pragma once

#include <cstdint>
#include <vector>

#include "schedlab/model.hpp"
#include "schedlab/trace.hpp"

namespace schedlab {

// Time-indexed view of a scenario: per-pair demand (ceil of proc/eta) and
// the matching per-pair value density value*pref/demand.
struct OfflineProblem {
    const Scenario* scenario = nullptr;
    std::vector<std::vector<int>> demand;   // [server][job]
    std::vector<std::vector<double>> vd;    // [server][job]

    static OfflineProblem from(const Scenario& s);
};

struct SolveBudget {
    std::uint64_t max_nodes = 200'000'000;
    double max_seconds = 600.0;
};

struct OfflineSolution {
    // server_of_job[j] = chosen server or -1 (not scheduled).
    std::vector<int> server_of_job;
    // timeline[i][t - t_min] = job id running on server i at step t, or -1.
    std::vector<std::vector<int>> timeline;
    double objective = 0.0;
    bool certified = false;  // false when a budget cut the search short
    std::uint64_t nodes = 0;
};

// Exact branch-and-bound over job-completion subsets and server choices.
// Within a chosen set, feasibility and packing use earliest-deadline-first
// per server with preemption at any integer step, which preserves the
// time-indexed semantics (allocation permitted on any step of [arrival,
// deadline], all-or-nothing demand, single-server affinity, unit capacity).
// Deterministic for a fixed problem. On budget exhaustion returns the best
// incumbent with certified = false.
OfflineSolution solve_exact(const OfflineProblem& problem, const SolveBudget& budget = {});

// Structural checks: capacity, window, all-or-nothing demand, affinity, and
// the objective accounting. Throws IntegrityError on any violation.
void validate_solution(const OfflineProblem& problem, const OfflineSolution& solution);

// Chronological schedule/reject/preempt/resume/complete events reconstructed
// from the allocation timeline. Also counts decision points that do not
// coincide with any arrival or completion time (the timeline is free to
// preempt anywhere; event-aligned schedules have off_event_decisions == 0).
ScheduleTrace extract_decision_trace(const OfflineProblem& problem,
                                     const OfflineSolution& solution);

// Canonical completed-value sum (ascending job id), shared by the solver's
// objective so equal completion sets compare bit for bit.
double completion_value(const Scenario& s, const std::vector<int>& server_of_job);

}  // namespace schedlab
