#include "schedlab/sim.hpp"

#include <algorithm>
#include <cassert>
#include <map>

#include "schedlab/errors.hpp"

namespace schedlab {

const char* job_status_name(JobStatus status) {
    switch (status) {
        case JobStatus::unarrived: return "unarrived";
        case JobStatus::unassigned: return "unassigned";
        case JobStatus::running: return "running";
        case JobStatus::preempted: return "preempted";
        case JobStatus::completed: return "completed";
        case JobStatus::expired: return "expired";
    }
    return "unknown";
}

struct SimState {
    const Scenario* scenario = nullptr;
    Time now = 0;
    std::vector<JobState> jobs;
    std::vector<int> running;                // per server, job id or -1
    std::vector<std::vector<int>> preempted; // per server, ascending job id
    std::vector<int> pool;                   // ascending job id
    std::vector<std::vector<int>> demand;    // [server][job]

    int remaining_on(int job, int server) const {
        const JobState& js = jobs[static_cast<std::size_t>(job)];
        const int full = demand[static_cast<std::size_t>(server)][static_cast<std::size_t>(job)];
        if (js.assigned_server == server) return full - js.progress;
        return full;
    }
};

const Scenario& SimView::scenario() const { return *state_->scenario; }
Time SimView::now() const { return state_->now; }
int SimView::running(int server) const { return state_->running[static_cast<std::size_t>(server)]; }
const std::vector<int>& SimView::pool() const { return state_->pool; }
const std::vector<int>& SimView::preempted_on(int server) const {
    return state_->preempted[static_cast<std::size_t>(server)];
}
JobStatus SimView::status(int job) const {
    return state_->jobs[static_cast<std::size_t>(job)].status;
}
int SimView::progress(int job) const {
    return state_->jobs[static_cast<std::size_t>(job)].progress;
}
int SimView::assigned_server(int job) const {
    return state_->jobs[static_cast<std::size_t>(job)].assigned_server;
}
int SimView::demand(int job, int server) const {
    return state_->demand[static_cast<std::size_t>(server)][static_cast<std::size_t>(job)];
}
int SimView::remaining_on(int job, int server) const { return state_->remaining_on(job, server); }
bool SimView::feasible_on(int job, int server) const {
    const Job& j = state_->scenario->jobs[static_cast<std::size_t>(job)];
    return static_cast<Time>(state_->remaining_on(job, server)) <= j.deadline - state_->now;
}

std::vector<int> idle_resume_candidates(const SimView& view, int server, Time t) {
    std::vector<int> out;
    const Scenario& s = view.scenario();
    for (int j : view.preempted_on(server)) {
        const Job& job = s.jobs[static_cast<std::size_t>(j)];
        if (static_cast<Time>(view.remaining_on(j, server)) <= job.deadline - t) out.push_back(j);
    }
    for (int j : view.pool()) {
        const Job& job = s.jobs[static_cast<std::size_t>(j)];
        if (static_cast<Time>(view.demand(j, server)) <= job.deadline - t) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void erase_id(std::vector<int>& v, int id) {
    auto it = std::find(v.begin(), v.end(), id);
    if (it != v.end()) v.erase(it);
}

void insert_sorted(std::vector<int>& v, int id) {
    v.insert(std::upper_bound(v.begin(), v.end(), id), id);
}

std::string directive_str(const Directive& d, Time t) {
    return "directive (job " + std::to_string(d.job) + " -> server " + std::to_string(d.server) +
           ") at t=" + std::to_string(t);
}

void apply_directives(SimState& st, const std::vector<Directive>& dirs, Time t,
                      ScheduleTrace& trace) {
    const Scenario& s = *st.scenario;
    // Validate the whole batch against the pre-event state first.
    for (std::size_t a = 0; a < dirs.size(); ++a) {
        const Directive& d = dirs[a];
        if (d.job < 0 || d.job >= s.num_jobs() || d.server < 0 || d.server >= s.num_servers())
            throw PolicyViolation("out-of-range " + directive_str(d, t));
        for (std::size_t b = a + 1; b < dirs.size(); ++b) {
            if (dirs[b].server == d.server)
                throw PolicyViolation("server double-booked by " + directive_str(dirs[b], t));
            if (dirs[b].job == d.job)
                throw PolicyViolation("job issued twice by " + directive_str(dirs[b], t));
        }
        const JobState& js = st.jobs[static_cast<std::size_t>(d.job)];
        if (js.status != JobStatus::unassigned && js.status != JobStatus::preempted)
            throw PolicyViolation("job is " + std::string(job_status_name(js.status)) + " in " +
                                  directive_str(d, t));
        if (js.status == JobStatus::preempted && js.assigned_server != d.server)
            throw PolicyViolation("affinity violation (locked to server " +
                                  std::to_string(js.assigned_server) + ") in " +
                                  directive_str(d, t));
        const Job& job = s.jobs[static_cast<std::size_t>(d.job)];
        if (static_cast<Time>(st.remaining_on(d.job, d.server)) > job.deadline - t)
            throw PolicyViolation("remaining demand cannot meet deadline in " +
                                  directive_str(d, t));
    }
    for (const Directive& d : dirs) {
        const int displaced = st.running[static_cast<std::size_t>(d.server)];
        if (displaced >= 0) {
            JobState& ds = st.jobs[static_cast<std::size_t>(displaced)];
            ds.status = JobStatus::preempted;
            insert_sorted(st.preempted[static_cast<std::size_t>(d.server)], displaced);
            trace.events.push_back({t, TraceEventKind::preempt, displaced, d.server});
        }
        JobState& js = st.jobs[static_cast<std::size_t>(d.job)];
        if (js.status == JobStatus::unassigned)
            erase_id(st.pool, d.job);
        else
            erase_id(st.preempted[static_cast<std::size_t>(d.server)], d.job);
        const bool fresh = js.progress == 0;
        js.status = JobStatus::running;
        js.assigned_server = d.server;
        st.running[static_cast<std::size_t>(d.server)] = d.job;
        trace.events.push_back(
            {t, fresh ? TraceEventKind::schedule : TraceEventKind::resume, d.job, d.server});
    }
}

}  // namespace

SimResult run(const Scenario& scenario, Policy& policy) {
    scenario.validate();
    const int C = scenario.num_servers();
    const int N = scenario.num_jobs();

    SimState st;
    st.scenario = &scenario;
    st.jobs.assign(static_cast<std::size_t>(N), JobState{});
    st.running.assign(static_cast<std::size_t>(C), -1);
    st.preempted.assign(static_cast<std::size_t>(C), {});
    st.demand.assign(static_cast<std::size_t>(C), std::vector<int>(static_cast<std::size_t>(N)));
    for (int i = 0; i < C; ++i)
        for (int j = 0; j < N; ++j)
            st.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                server_demand(scenario.jobs[static_cast<std::size_t>(j)],
                              scenario.servers[static_cast<std::size_t>(i)]);

    std::map<Time, std::vector<int>> arrivals;
    for (const Job& j : scenario.jobs) arrivals[j.arrival].push_back(j.id);

    SimResult result;
    SimView view(st);

    for (Time t = scenario.t_min; t <= scenario.t_max; ++t) {
        st.now = t;

        // Completions first: freed servers are visible to arrival handling.
        SimEvent completions{t, true, {}};
        for (int i = 0; i < C; ++i) {
            const int j = st.running[static_cast<std::size_t>(i)];
            if (j < 0) continue;
            JobState& js = st.jobs[static_cast<std::size_t>(j)];
            if (js.progress ==
                st.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                js.status = JobStatus::completed;
                js.completed_at = t;
                st.running[static_cast<std::size_t>(i)] = -1;
                result.trace.events.push_back({t, TraceEventKind::complete, j, i});
                completions.ids.push_back(i);
            }
        }

        SimEvent arrivals_ev{t, false, {}};
        if (auto it = arrivals.find(t); it != arrivals.end()) {
            for (int j : it->second) {
                st.jobs[static_cast<std::size_t>(j)].status = JobStatus::unassigned;
                insert_sorted(st.pool, j);
                result.trace.events.push_back({t, TraceEventKind::arrive, j, -1});
                arrivals_ev.ids.push_back(j);
            }
        }

        // Eager expiry: policies never see candidates that cannot finish.
        for (std::size_t k = 0; k < st.pool.size();) {
            const int j = st.pool[k];
            const Job& job = scenario.jobs[static_cast<std::size_t>(j)];
            bool fits_somewhere = false;
            for (int i = 0; i < C && !fits_somewhere; ++i)
                fits_somewhere =
                    static_cast<Time>(
                        st.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) <=
                    job.deadline - t;
            if (fits_somewhere) {
                ++k;
            } else {
                st.jobs[static_cast<std::size_t>(j)].status = JobStatus::expired;
                st.pool.erase(st.pool.begin() + static_cast<std::ptrdiff_t>(k));
                result.trace.events.push_back({t, TraceEventKind::expire, j, -1});
            }
        }
        for (int i = 0; i < C; ++i) {
            auto& plist = st.preempted[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < plist.size();) {
                const int j = plist[k];
                const Job& job = scenario.jobs[static_cast<std::size_t>(j)];
                if (static_cast<Time>(st.remaining_on(j, i)) <= job.deadline - t) {
                    ++k;
                } else {
                    st.jobs[static_cast<std::size_t>(j)].status = JobStatus::expired;
                    plist.erase(plist.begin() + static_cast<std::ptrdiff_t>(k));
                    result.trace.events.push_back({t, TraceEventKind::expire, j, i});
                }
            }
        }

        if (!completions.ids.empty()) {
            ++result.events_processed;
            const auto dirs = policy.on_completion(view, completions.ids, t);
            apply_directives(st, dirs, t, result.trace);
        }
        // Drop arrivals that expired on the spot.
        std::vector<int> alive;
        for (int j : arrivals_ev.ids)
            if (st.jobs[static_cast<std::size_t>(j)].status == JobStatus::unassigned)
                alive.push_back(j);
        if (!alive.empty()) {
            ++result.events_processed;
            const auto dirs = policy.on_arrival(view, alive, t);
            apply_directives(st, dirs, t, result.trace);
        }

        // Execute the step [t, t+1).
        for (int i = 0; i < C; ++i) {
            const int j = st.running[static_cast<std::size_t>(i)];
            if (j < 0) continue;
            result.trace.alloc.push_back({t, i, j});
            JobState& js = st.jobs[static_cast<std::size_t>(j)];
            ++js.progress;
            assert(js.progress <=
                   st.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
    }

    result.outcomes.reserve(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        const JobState& js = st.jobs[static_cast<std::size_t>(j)];
        JobOutcome o;
        o.job = j;
        o.status = js.status;
        o.server = js.assigned_server;
        o.progress = js.progress;
        o.completed_at = js.completed_at;
        if (js.status == JobStatus::completed) {
            const Job& job = scenario.jobs[static_cast<std::size_t>(j)];
            o.value = job.value * job.pref[static_cast<std::size_t>(js.assigned_server)];
            result.completed.push_back(j);
            result.total_value += o.value;
        }
        // Feasibility-validated directives guarantee every arrived job ends
        // completed or expired by the end of the horizon.
        assert(js.status == JobStatus::completed || js.status == JobStatus::expired);
        result.outcomes.push_back(o);
    }
    return result;
}

double trace_total_value(const ScheduleTrace& trace, const Scenario& scenario) {
    std::vector<std::pair<int, int>> done;  // (job, server)
    for (const TraceEvent& e : trace.events)
        if (e.kind == TraceEventKind::complete) done.emplace_back(e.job, e.server);
    std::sort(done.begin(), done.end());
    double total = 0.0;
    for (auto [j, i] : done) {
        const Job& job = scenario.jobs[static_cast<std::size_t>(j)];
        total += job.value * job.pref[static_cast<std::size_t>(i)];
    }
    return total;
}

}  // namespace schedlab
