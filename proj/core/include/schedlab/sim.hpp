#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schedlab/model.hpp"
#include "schedlab/trace.hpp"

namespace schedlab {

enum class JobStatus { unarrived, unassigned, running, preempted, completed, expired };

const char* job_status_name(JobStatus status);

struct JobState {
    JobStatus status = JobStatus::unarrived;
    int assigned_server = -1;  // locked once progress > 0
    int progress = 0;          // timesteps completed toward server_demand
    Time completed_at = -1;
};

// Scheduling decisions are delivered only at these two event kinds; at equal
// timestamps completions precede arrivals.
struct SimEvent {
    Time t = 0;
    bool is_completion = false;
    std::vector<int> ids;  // job ids for arrivals, server ids for completions
};

// Instruction to run `job` on `server` starting at the current event time,
// preempting whatever runs there. The displaced job keeps its progress and
// accrues none for this step.
struct Directive {
    int job = -1;
    int server = -1;
};

struct SimState;  // internal

// Read-only window onto the simulation that policies decide from.
class SimView {
  public:
    explicit SimView(const SimState& state) : state_(&state) {}

    const Scenario& scenario() const;
    Time now() const;
    int running(int server) const;  // job id or -1
    const std::vector<int>& pool() const;
    const std::vector<int>& preempted_on(int server) const;
    JobStatus status(int job) const;
    int progress(int job) const;
    int assigned_server(int job) const;
    int demand(int job, int server) const;
    // Remaining demand if `job` ran on `server` (full demand for pool jobs).
    int remaining_on(int job, int server) const;
    // Remaining demand still fits before the deadline when started now.
    bool feasible_on(int job, int server) const;

  private:
    const SimState* state_;
};

class Policy {
  public:
    virtual ~Policy() = default;
    virtual std::vector<Directive> on_arrival(const SimView& view, std::span<const int> jobs,
                                              Time t) = 0;
    virtual std::vector<Directive> on_completion(const SimView& view,
                                                 std::span<const int> servers, Time t) = 0;
};

struct JobOutcome {
    int job = 0;
    JobStatus status = JobStatus::expired;
    int server = -1;
    int progress = 0;
    Time completed_at = -1;
    double value = 0.0;  // credited only on completion: value * pref[server]
};

struct SimResult {
    double total_value = 0.0;
    std::vector<int> completed;  // ascending job ids
    std::vector<JobOutcome> outcomes;
    ScheduleTrace trace;
    std::int64_t events_processed = 0;
};

// Runs `scenario` to the end of its horizon under `policy`. Deterministic
// given a deterministic policy. Throws PolicyViolation when a directive
// breaks affinity, double-books a server, or schedules an infeasible job.
SimResult run(const Scenario& scenario, Policy& policy);

// Jobs preempted on `server` plus unassigned-pool jobs whose remaining
// demand still fits before their deadline; ascending job id (ordering of
// actual use is the policy's business).
std::vector<int> idle_resume_candidates(const SimView& view, int server, Time t);

// Recomputes total value from a trace's complete events (ascending job id
// summation, matching SimResult::total_value bit for bit).
double trace_total_value(const ScheduleTrace& trace, const Scenario& scenario);

}  // namespace schedlab
