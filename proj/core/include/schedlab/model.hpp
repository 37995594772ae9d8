#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "schedlab/errors.hpp"

namespace schedlab {

using Time = std::int64_t;

// A deadline-constrained preemptible job. `pref` holds one entry per server
// in (0,1]; completing the job on server i yields value * pref[i].
struct Job {
    int id = 0;
    Time arrival = 0;
    Time deadline = 0;
    int proc_time = 1;       // nominal processing time, timesteps
    double value = 1.0;
    int jtype = 0;
    std::vector<double> pref;

    double slack() const {
        return static_cast<double>(deadline - arrival) / static_cast<double>(proc_time);
    }
};

// A server with one per-job-type efficiency multiplier in (0,1]. Efficiency
// divides into the nominal processing time, inflating actual demand.
struct Server {
    int id = 0;
    std::vector<double> eta;
};

struct Scenario {
    int num_types = 1;
    std::vector<Job> jobs;
    std::vector<Server> servers;
    Time t_min = 0;
    Time t_max = 0;

    int num_jobs() const { return static_cast<int>(jobs.size()); }
    int num_servers() const { return static_cast<int>(servers.size()); }

    // Throws ConfigError on any violated invariant.
    void validate() const;
};

// Actual demand of `job` on `server`: ceil(proc_time / eta). The small guard
// keeps exact quotients (10 / 0.5) from being bumped by float rounding.
inline int server_demand(const Job& job, const Server& server) {
    const double eta = server.eta[static_cast<std::size_t>(job.jtype)];
    return static_cast<int>(std::ceil(static_cast<double>(job.proc_time) / eta - 1e-9));
}

inline double value_density(const Job& job) {
    return job.value / static_cast<double>(job.proc_time);
}

// Value-density scaled by the job's preference for the server and the
// server's efficiency for the job's type.
inline double server_value_density(const Job& job, const Server& server) {
    return value_density(job) * job.pref[static_cast<std::size_t>(server.id)] *
           server.eta[static_cast<std::size_t>(job.jtype)];
}

// Admission window test: t in [arrival, deadline - mu * p'] where p' is the
// server-dependent demand (or nominal proc_time when nominal_proc is set).
inline bool in_window(const Job& job, const Server& server, Time t, double mu,
                      bool nominal_proc = false) {
    const double p = nominal_proc ? static_cast<double>(job.proc_time)
                                  : static_cast<double>(server_demand(job, server));
    return t >= job.arrival && static_cast<double>(t) <= static_cast<double>(job.deadline) - mu * p;
}

struct RealRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct IntRange {
    int lo = 0;
    int hi = 0;
};

// Seeded scenario generator configuration. Draw order, per job j = 0..n-1:
// proc_time, slack, value, type, arrival, pref[0..servers-1]; then per server
// i = 0..servers-1: eta[0..types-1]. Each field consumes exactly one
// generator draw, except fields pinned by fixed_pref / eta_override which
// consume none.
struct RandomConfig {
    std::uint64_t seed = 1;
    int num_jobs = 40;
    int num_servers = 4;
    int num_types = 3;
    IntRange proc_time{5, 31};
    RealRange slack{1.5, 4.0};
    RealRange value{50.0, 200.0};
    RealRange pref{0.5, 1.0};
    RealRange eta{0.5, 1.0};
    Time t_min = 0;
    Time t_max = 500;
    // Latest allowed arrival. Unset: t_max - 4 * ceil(proc_time.hi / eta.lo),
    // clamped so every drawn deadline fits inside the horizon.
    std::optional<Time> arrival_hi;
    // Studies fix the preference factor instead of drawing it.
    std::optional<double> fixed_pref;
    // Explicit efficiency profile [server][type]; overrides eta draws.
    std::optional<std::vector<std::vector<double>>> eta_override;

    void validate() const;
};

// Deterministic for a fixed config: same seed, bitwise-identical scenario.
// Deadlines derive from slack as arrival + round_half_up(slack * proc_time).
Scenario generate_scenario(const RandomConfig& cfg);

}  // namespace schedlab
