#include "schedlab/model.hpp"

#include <cmath>
#include <string>

#include "schedlab/random.hpp"

namespace schedlab {

namespace {

std::string job_tag(int id) { return "job " + std::to_string(id) + ": "; }

}  // namespace

void Scenario::validate() const {
    if (num_types <= 0) throw ConfigError("scenario: num_types must be positive");
    if (t_min > t_max) throw ConfigError("scenario: t_min > t_max");
    for (std::size_t i = 0; i < servers.size(); ++i) {
        const Server& s = servers[i];
        if (s.id != static_cast<int>(i)) throw ConfigError("scenario: server ids must be 0..C-1");
        if (s.eta.size() != static_cast<std::size_t>(num_types))
            throw ConfigError("server " + std::to_string(s.id) + ": eta size != num_types");
        for (double e : s.eta)
            if (!(e > 0.0 && e <= 1.0))
                throw ConfigError("server " + std::to_string(s.id) + ": eta outside (0,1]");
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const Job& job = jobs[j];
        if (job.id != static_cast<int>(j)) throw ConfigError("scenario: job ids must be 0..N-1");
        if (job.jtype < 0 || job.jtype >= num_types)
            throw ConfigError(job_tag(job.id) + "type outside [0,num_types)");
        if (job.proc_time < 1) throw ConfigError(job_tag(job.id) + "proc_time < 1");
        if (!(job.value > 0.0)) throw ConfigError(job_tag(job.id) + "value <= 0");
        if (job.arrival > job.deadline) throw ConfigError(job_tag(job.id) + "arrival > deadline");
        if (job.arrival < t_min || job.deadline > t_max)
            throw ConfigError(job_tag(job.id) + "window outside horizon");
        if (job.slack() < 1.0) throw ConfigError(job_tag(job.id) + "slack < 1");
        if (job.pref.size() != servers.size())
            throw ConfigError(job_tag(job.id) + "pref size != num_servers");
        for (double p : job.pref)
            if (!(p > 0.0 && p <= 1.0)) throw ConfigError(job_tag(job.id) + "pref outside (0,1]");
    }
}

void RandomConfig::validate() const {
    if (num_jobs <= 0 || num_servers <= 0 || num_types <= 0)
        throw ConfigError("config: counts must be positive");
    if (proc_time.lo < 1 || proc_time.lo > proc_time.hi)
        throw ConfigError("config: bad proc_time range");
    if (!(slack.lo >= 1.0) || slack.lo > slack.hi) throw ConfigError("config: bad slack range");
    if (!(value.lo > 0.0) || value.lo > value.hi) throw ConfigError("config: bad value range");
    if (!(pref.lo > 0.0) || pref.lo > pref.hi || pref.hi > 1.0)
        throw ConfigError("config: bad pref range");
    if (!(eta.lo > 0.0) || eta.lo > eta.hi || eta.hi > 1.0)
        throw ConfigError("config: bad eta range");
    if (t_min > t_max) throw ConfigError("config: t_min > t_max");
    if (eta_override) {
        if (eta_override->size() != static_cast<std::size_t>(num_servers))
            throw ConfigError("config: eta_override size != num_servers");
        for (const auto& row : *eta_override) {
            if (row.size() != static_cast<std::size_t>(num_types))
                throw ConfigError("config: eta_override row size != num_types");
            for (double e : row)
                if (!(e > 0.0 && e <= 1.0)) throw ConfigError("config: eta_override outside (0,1]");
        }
    }
    if (fixed_pref && !(*fixed_pref > 0.0 && *fixed_pref <= 1.0))
        throw ConfigError("config: fixed_pref outside (0,1]");
}

namespace {

Time latest_arrival(const RandomConfig& cfg) {
    // Keep the tail of the horizon clear so most jobs are feasible, and never
    // let a drawn deadline exceed t_max.
    const double eta_lo = cfg.eta_override ? 1.0 : cfg.eta.lo;
    double min_eta = eta_lo;
    if (cfg.eta_override) {
        for (const auto& row : *cfg.eta_override)
            for (double e : row) min_eta = std::min(min_eta, e);
    }
    const Time max_demand = static_cast<Time>(std::ceil(cfg.proc_time.hi / min_eta - 1e-9));
    const Time max_window = static_cast<Time>(std::ceil(cfg.slack.hi * cfg.proc_time.hi));
    Time hi = cfg.arrival_hi ? *cfg.arrival_hi : cfg.t_max - 4 * max_demand;
    hi = std::min(hi, cfg.t_max - max_window);
    if (hi < cfg.t_min)
        throw ConfigError("config: horizon too short for the requested job windows");
    return hi;
}

}  // namespace

Scenario generate_scenario(const RandomConfig& cfg) {
    cfg.validate();
    const Time arrival_hi = latest_arrival(cfg);

    SplitMix64 rng(cfg.seed);
    Scenario s;
    s.num_types = cfg.num_types;
    s.t_min = cfg.t_min;
    s.t_max = cfg.t_max;

    s.jobs.reserve(static_cast<std::size_t>(cfg.num_jobs));
    for (int j = 0; j < cfg.num_jobs; ++j) {
        Job job;
        job.id = j;
        job.proc_time = static_cast<int>(rng.uniform_int(cfg.proc_time.lo, cfg.proc_time.hi));
        const double slack = rng.uniform(cfg.slack.lo, cfg.slack.hi);
        job.value = rng.uniform(cfg.value.lo, cfg.value.hi);
        job.jtype = static_cast<int>(rng.uniform_int(0, cfg.num_types - 1));
        job.arrival = rng.uniform_int(cfg.t_min, arrival_hi);
        job.deadline = job.arrival +
                       static_cast<Time>(std::floor(slack * job.proc_time + 0.5));
        job.pref.resize(static_cast<std::size_t>(cfg.num_servers));
        for (int i = 0; i < cfg.num_servers; ++i)
            job.pref[static_cast<std::size_t>(i)] =
                cfg.fixed_pref ? *cfg.fixed_pref : rng.uniform(cfg.pref.lo, cfg.pref.hi);
        s.jobs.push_back(std::move(job));
    }

    s.servers.reserve(static_cast<std::size_t>(cfg.num_servers));
    for (int i = 0; i < cfg.num_servers; ++i) {
        Server server;
        server.id = i;
        server.eta.resize(static_cast<std::size_t>(cfg.num_types));
        for (int ty = 0; ty < cfg.num_types; ++ty)
            server.eta[static_cast<std::size_t>(ty)] =
                cfg.eta_override ? (*cfg.eta_override)[static_cast<std::size_t>(i)]
                                                      [static_cast<std::size_t>(ty)]
                                 : rng.uniform(cfg.eta.lo, cfg.eta.hi);
        s.servers.push_back(std::move(server));
    }

    s.validate();
    return s;
}

}  // namespace schedlab
