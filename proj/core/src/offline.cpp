#include "schedlab/offline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "schedlab/errors.hpp"

namespace schedlab {

OfflineProblem OfflineProblem::from(const Scenario& s) {
    s.validate();
    OfflineProblem p;
    p.scenario = &s;
    const int C = s.num_servers();
    const int N = s.num_jobs();
    p.demand.assign(static_cast<std::size_t>(C), std::vector<int>(static_cast<std::size_t>(N)));
    p.vd.assign(static_cast<std::size_t>(C), std::vector<double>(static_cast<std::size_t>(N)));
    for (int i = 0; i < C; ++i) {
        for (int j = 0; j < N; ++j) {
            const Job& job = s.jobs[static_cast<std::size_t>(j)];
            const int d = server_demand(job, s.servers[static_cast<std::size_t>(i)]);
            p.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d;
            p.vd[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                job.value * job.pref[static_cast<std::size_t>(i)] / d;
        }
    }
    return p;
}

double completion_value(const Scenario& s, const std::vector<int>& server_of_job) {
    double total = 0.0;
    for (int j = 0; j < s.num_jobs(); ++j) {
        const int i = server_of_job[static_cast<std::size_t>(j)];
        if (i < 0) continue;
        const Job& job = s.jobs[static_cast<std::size_t>(j)];
        total += job.value * job.pref[static_cast<std::size_t>(i)];
    }
    return total;
}

namespace {

// Earliest-deadline-first packing of `jobs` on one server, allocation
// permitted on any step of [arrival, deadline]. Returns false if some job
// cannot absorb its full demand. When `timeline` is given, records the chosen
// step assignment (t_min-based indexing).
bool edf_pack(const Scenario& s, const std::vector<int>& demand_row, const std::vector<int>& jobs,
              std::vector<int>* timeline) {
    if (jobs.empty()) return true;
    std::vector<int> remaining(jobs.size());
    int total = 0;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        remaining[k] = demand_row[static_cast<std::size_t>(jobs[k])];
        total += remaining[k];
    }
    for (Time t = s.t_min; t <= s.t_max && total > 0; ++t) {
        int pick = -1;
        Time pick_deadline = 0;
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            if (remaining[k] == 0) continue;
            const Job& job = s.jobs[static_cast<std::size_t>(jobs[k])];
            if (t < job.arrival || t > job.deadline) {
                if (t > job.deadline) return false;  // missed its window
                continue;
            }
            if (pick < 0 || job.deadline < pick_deadline ||
                (job.deadline == pick_deadline && jobs[k] < jobs[static_cast<std::size_t>(pick)])) {
                pick = static_cast<int>(k);
                pick_deadline = job.deadline;
            }
        }
        if (pick < 0) continue;
        --remaining[static_cast<std::size_t>(pick)];
        --total;
        if (timeline) (*timeline)[static_cast<std::size_t>(t - s.t_min)] = jobs[static_cast<std::size_t>(pick)];
    }
    return total == 0;
}

struct SearchContext {
    const OfflineProblem* p;
    const Scenario* s;
    std::vector<int> order;                  // branching order over completable jobs
    std::vector<double> suffix_bound;        // best-case value of jobs order[k..]
    std::vector<std::vector<int>> by_server; // current per-server assignment
    std::vector<int> assignment;             // job -> server or -1
    std::vector<int> best_assignment;
    double best_value = 0.0;
    std::uint64_t nodes = 0;
    std::uint64_t max_nodes = 0;
    std::chrono::steady_clock::time_point t0;
    double max_seconds = 0.0;
    bool exhausted = false;

    bool budget_hit() {
        if (nodes > max_nodes) return true;
        if ((nodes & 0xfffu) == 0) {
            const auto dt = std::chrono::steady_clock::now() - t0;
            if (std::chrono::duration<double>(dt).count() > max_seconds) return true;
        }
        return false;
    }
};

// Admissible pruning margin; exceeds the accumulated float error of the
// partial-value sums so an improving branch is never cut.
constexpr double kBoundMargin = 1e-9;

void dfs(SearchContext& ctx, std::size_t depth, double value) {
    ++ctx.nodes;
    if (ctx.budget_hit()) {
        ctx.exhausted = true;
        return;
    }
    if (value > ctx.best_value) {
        ctx.best_value = value;
        ctx.best_assignment = ctx.assignment;
    }
    if (depth == ctx.order.size()) return;
    if (value + ctx.suffix_bound[depth] <= ctx.best_value - kBoundMargin) return;

    const int j = ctx.order[depth];
    const Job& job = ctx.s->jobs[static_cast<std::size_t>(j)];

    // Servers in decreasing value-density order, then the skip branch.
    const int C = ctx.s->num_servers();
    std::vector<int> servers(static_cast<std::size_t>(C));
    std::iota(servers.begin(), servers.end(), 0);
    std::sort(servers.begin(), servers.end(), [&](int a, int b) {
        const double va = ctx.p->vd[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
        const double vb = ctx.p->vd[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
        return va != vb ? va > vb : a < b;
    });

    for (int i : servers) {
        const int dij = ctx.p->demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (static_cast<Time>(dij) > job.deadline - job.arrival + 1) continue;
        auto& assigned = ctx.by_server[static_cast<std::size_t>(i)];
        assigned.push_back(j);
        if (edf_pack(*ctx.s, ctx.p->demand[static_cast<std::size_t>(i)], assigned, nullptr)) {
            ctx.assignment[static_cast<std::size_t>(j)] = i;
            dfs(ctx, depth + 1,
                value + job.value * job.pref[static_cast<std::size_t>(i)]);
            ctx.assignment[static_cast<std::size_t>(j)] = -1;
        }
        assigned.pop_back();
        if (ctx.exhausted) return;
    }
    dfs(ctx, depth + 1, value);
}

}  // namespace

OfflineSolution solve_exact(const OfflineProblem& problem, const SolveBudget& budget) {
    const Scenario& s = *problem.scenario;
    const int C = s.num_servers();
    const int N = s.num_jobs();

    // Best completed value per job over servers whose window can absorb the
    // demand at all; jobs with no such server never branch.
    std::vector<double> best_value(static_cast<std::size_t>(N), 0.0);
    std::vector<char> completable(static_cast<std::size_t>(N), 0);
    for (int j = 0; j < N; ++j) {
        const Job& job = s.jobs[static_cast<std::size_t>(j)];
        for (int i = 0; i < C; ++i) {
            const int dij = problem.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (static_cast<Time>(dij) > job.deadline - job.arrival + 1) continue;
            completable[static_cast<std::size_t>(j)] = 1;
            best_value[static_cast<std::size_t>(j)] =
                std::max(best_value[static_cast<std::size_t>(j)],
                         job.value * job.pref[static_cast<std::size_t>(i)]);
        }
    }

    SearchContext ctx;
    ctx.p = &problem;
    ctx.s = &s;
    ctx.assignment.assign(static_cast<std::size_t>(N), -1);
    ctx.best_assignment = ctx.assignment;
    ctx.by_server.assign(static_cast<std::size_t>(C), {});
    ctx.max_nodes = budget.max_nodes;
    ctx.max_seconds = budget.max_seconds;
    ctx.t0 = std::chrono::steady_clock::now();
    for (int j = 0; j < N; ++j)
        if (completable[static_cast<std::size_t>(j)]) ctx.order.push_back(j);
    std::sort(ctx.order.begin(), ctx.order.end(), [&](int a, int b) {
        const double va = best_value[static_cast<std::size_t>(a)];
        const double vb = best_value[static_cast<std::size_t>(b)];
        return va != vb ? va > vb : a < b;
    });
    ctx.suffix_bound.assign(ctx.order.size() + 1, 0.0);
    for (std::size_t k = ctx.order.size(); k-- > 0;)
        ctx.suffix_bound[k] =
            ctx.suffix_bound[k + 1] + best_value[static_cast<std::size_t>(ctx.order[k])];

    dfs(ctx, 0, 0.0);

    OfflineSolution sol;
    sol.server_of_job = ctx.best_assignment;
    sol.objective = completion_value(s, sol.server_of_job);
    sol.certified = !ctx.exhausted;
    sol.nodes = ctx.nodes;

    sol.timeline.assign(static_cast<std::size_t>(C),
                        std::vector<int>(static_cast<std::size_t>(s.t_max - s.t_min + 1), -1));
    std::vector<std::vector<int>> by_server(static_cast<std::size_t>(C));
    for (int j = 0; j < N; ++j) {
        const int i = sol.server_of_job[static_cast<std::size_t>(j)];
        if (i >= 0) by_server[static_cast<std::size_t>(i)].push_back(j);
    }
    for (int i = 0; i < C; ++i) {
        if (!edf_pack(s, problem.demand[static_cast<std::size_t>(i)],
                      by_server[static_cast<std::size_t>(i)],
                      &sol.timeline[static_cast<std::size_t>(i)]))
            throw IntegrityError("offline: incumbent assignment failed to repack");
    }
    return sol;
}

void validate_solution(const OfflineProblem& problem, const OfflineSolution& solution) {
    const Scenario& s = *problem.scenario;
    const int C = s.num_servers();
    const int N = s.num_jobs();
    const std::size_t T = static_cast<std::size_t>(s.t_max - s.t_min + 1);
    if (solution.timeline.size() != static_cast<std::size_t>(C))
        throw IntegrityError("offline: timeline server count mismatch");
    std::vector<std::vector<int>> alloc(static_cast<std::size_t>(C),
                                        std::vector<int>(static_cast<std::size_t>(N), 0));
    for (int i = 0; i < C; ++i) {
        const auto& row = solution.timeline[static_cast<std::size_t>(i)];
        if (row.size() != T) throw IntegrityError("offline: timeline horizon mismatch");
        for (std::size_t k = 0; k < T; ++k) {
            const int j = row[k];
            if (j < 0) continue;  // capacity holds by representation: one slot per (i,t)
            if (j >= N) throw IntegrityError("offline: timeline references unknown job");
            const Job& job = s.jobs[static_cast<std::size_t>(j)];
            const Time t = s.t_min + static_cast<Time>(k);
            if (t < job.arrival || t > job.deadline)
                throw IntegrityError("offline: window violated for job " + std::to_string(j) +
                                     " at t=" + std::to_string(t));
            ++alloc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    for (int j = 0; j < N; ++j) {
        int servers_used = 0;
        for (int i = 0; i < C; ++i) {
            const int a = alloc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (a == 0) continue;
            ++servers_used;
            if (a != problem.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                throw IntegrityError("offline: partial allocation for job " + std::to_string(j));
            if (solution.server_of_job[static_cast<std::size_t>(j)] != i)
                throw IntegrityError("offline: timeline disagrees with assignment for job " +
                                     std::to_string(j));
        }
        if (servers_used > 1)
            throw IntegrityError("offline: affinity violated for job " + std::to_string(j));
        if (servers_used == 0 && solution.server_of_job[static_cast<std::size_t>(j)] >= 0)
            throw IntegrityError("offline: scheduled job has no allocation: " + std::to_string(j));
    }
    const double recomputed = completion_value(s, solution.server_of_job);
    if (std::abs(recomputed - solution.objective) > 1e-9 * std::max(1.0, std::abs(recomputed)))
        throw IntegrityError("offline: objective does not match allocations");
}

ScheduleTrace extract_decision_trace(const OfflineProblem& problem,
                                     const OfflineSolution& solution) {
    validate_solution(problem, solution);
    const Scenario& s = *problem.scenario;
    const int C = s.num_servers();
    const int N = s.num_jobs();

    ScheduleTrace trace;
    std::vector<std::vector<Time>> steps(static_cast<std::size_t>(N));
    for (int i = 0; i < C; ++i) {
        const auto& row = solution.timeline[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k] < 0) continue;
            const Time t = s.t_min + static_cast<Time>(k);
            trace.alloc.push_back({t, i, row[k]});
            steps[static_cast<std::size_t>(row[k])].push_back(t);
        }
    }

    // Intra-timestep order: completions free capacity, preemptions release
    // it, placements claim it, rejects trail the decisions they lost to.
    auto rank = [](TraceEventKind k) {
        switch (k) {
            case TraceEventKind::complete: return 0;
            case TraceEventKind::preempt: return 1;
            case TraceEventKind::schedule:
            case TraceEventKind::resume: return 2;
            default: return 3;
        }
    };

    std::vector<Time> completion_times;
    for (int j = 0; j < N; ++j) {
        const int i = solution.server_of_job[static_cast<std::size_t>(j)];
        const Job& job = s.jobs[static_cast<std::size_t>(j)];
        if (i < 0) {
            trace.events.push_back({job.arrival, TraceEventKind::reject, j, -1});
            continue;
        }
        auto& ts = steps[static_cast<std::size_t>(j)];
        std::sort(ts.begin(), ts.end());
        if (ts.front() > job.arrival)
            trace.events.push_back({job.arrival, TraceEventKind::reject, j, -1});
        trace.events.push_back({ts.front(), TraceEventKind::schedule, j, i});
        for (std::size_t k = 1; k < ts.size(); ++k) {
            if (ts[k] == ts[k - 1] + 1) continue;
            trace.events.push_back({ts[k - 1] + 1, TraceEventKind::preempt, j, i});
            trace.events.push_back({ts[k], TraceEventKind::resume, j, i});
        }
        trace.events.push_back({ts.back() + 1, TraceEventKind::complete, j, i});
        completion_times.push_back(ts.back() + 1);
    }

    std::sort(trace.events.begin(), trace.events.end(),
              [&](const TraceEvent& a, const TraceEvent& b) {
                  if (a.t != b.t) return a.t < b.t;
                  if (rank(a.kind) != rank(b.kind)) return rank(a.kind) < rank(b.kind);
                  return a.job < b.job;
              });

    // Count decisions made outside arrival/completion times; the timeline has
    // no event-alignment constraint, so these measure that gap.
    std::vector<Time> event_times;
    for (const Job& j : s.jobs) event_times.push_back(j.arrival);
    event_times.insert(event_times.end(), completion_times.begin(), completion_times.end());
    std::sort(event_times.begin(), event_times.end());
    for (const TraceEvent& e : trace.events) {
        if (e.kind != TraceEventKind::schedule && e.kind != TraceEventKind::resume &&
            e.kind != TraceEventKind::preempt)
            continue;
        if (!std::binary_search(event_times.begin(), event_times.end(), e.t))
            ++trace.off_event_decisions;
    }
    return trace;
}

}  // namespace schedlab
