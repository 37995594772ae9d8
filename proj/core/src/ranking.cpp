#include "schedlab/ranking.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "schedlab/errors.hpp"
#include "schedlab/scenario_io.hpp"

namespace schedlab {

namespace {

// Replay bookkeeping for an offline decision trace. Window semantics follow
// the time-indexed formulation (allocation permitted on any step of
// [arrival, deadline]).
struct Replay {
    const Scenario* s;
    std::vector<std::vector<int>> demand;       // [server][job]
    std::vector<std::vector<Time>> job_steps;   // sorted allocation steps per job
    std::vector<int> running;                   // per server
    std::vector<std::set<int>> preempted;       // per server
    std::set<int> pool;
    std::vector<char> dead;
    std::vector<int> by_arrival;  // job ids ordered by (arrival, id)
    std::size_t next_arrival = 0;

    explicit Replay(const Scenario& scenario, const ScheduleTrace& trace) : s(&scenario) {
        const int C = scenario.num_servers();
        const int N = scenario.num_jobs();
        demand.assign(static_cast<std::size_t>(C),
                      std::vector<int>(static_cast<std::size_t>(N)));
        for (int i = 0; i < C; ++i)
            for (int j = 0; j < N; ++j)
                demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = server_demand(
                    scenario.jobs[static_cast<std::size_t>(j)],
                    scenario.servers[static_cast<std::size_t>(i)]);
        job_steps.assign(static_cast<std::size_t>(N), {});
        for (const TraceAlloc& a : trace.alloc) {
            if (a.job < 0 || a.job >= N || a.server < 0 || a.server >= C)
                throw IntegrityError("extract: trace allocation outside the scenario");
            job_steps[static_cast<std::size_t>(a.job)].push_back(a.t);
        }
        for (auto& v : job_steps) std::sort(v.begin(), v.end());
        running.assign(static_cast<std::size_t>(C), -1);
        preempted.assign(static_cast<std::size_t>(C), {});
        dead.assign(static_cast<std::size_t>(N), 0);
        by_arrival.resize(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j) by_arrival[static_cast<std::size_t>(j)] = j;
        std::sort(by_arrival.begin(), by_arrival.end(), [&](int a, int b) {
            const Time aa = scenario.jobs[static_cast<std::size_t>(a)].arrival;
            const Time ab = scenario.jobs[static_cast<std::size_t>(b)].arrival;
            return aa != ab ? aa < ab : a < b;
        });
    }

    int progress_at(int job, Time t) const {
        const auto& v = job_steps[static_cast<std::size_t>(job)];
        return static_cast<int>(std::upper_bound(v.begin(), v.end(), t - 1) - v.begin());
    }

    int remaining_on(int job, int server, Time t) const {
        return demand[static_cast<std::size_t>(server)][static_cast<std::size_t>(job)] -
               progress_at(job, t);
    }

    void admit_arrivals_and_expire(Time t) {
        while (next_arrival < by_arrival.size() &&
               s->jobs[static_cast<std::size_t>(by_arrival[next_arrival])].arrival <= t) {
            pool.insert(by_arrival[next_arrival]);
            ++next_arrival;
        }
        // Prune pool/preempted entries that can no longer absorb their demand
        // by the deadline anywhere legal.
        for (auto it = pool.begin(); it != pool.end();) {
            const Job& job = s->jobs[static_cast<std::size_t>(*it)];
            bool fits = false;
            for (int i = 0; i < s->num_servers() && !fits; ++i)
                fits = static_cast<Time>(
                           demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(*it)]) <=
                       job.deadline - t + 1;
            if (fits) {
                ++it;
            } else {
                dead[static_cast<std::size_t>(*it)] = 1;
                it = pool.erase(it);
            }
        }
        for (int i = 0; i < s->num_servers(); ++i) {
            auto& pset = preempted[static_cast<std::size_t>(i)];
            for (auto it = pset.begin(); it != pset.end();) {
                const Job& job = s->jobs[static_cast<std::size_t>(*it)];
                if (static_cast<Time>(remaining_on(*it, i, t)) <= job.deadline - t + 1) {
                    ++it;
                } else {
                    dead[static_cast<std::size_t>(*it)] = 1;
                    it = pset.erase(it);
                }
            }
        }
    }
};

}  // namespace

std::vector<TrainingSample> extract_samples(const ScheduleTrace& trace, const Scenario& scenario,
                                            std::uint64_t scenario_id) {
    scenario.validate();
    Replay rp(scenario, trace);
    const FeatureScales scales = FeatureScales::from(scenario);
    const int C = scenario.num_servers();

    auto feat = [&](int job, int server, Time t) {
        PairingContext ctx;
        ctx.t = t;
        ctx.remaining_on_server = rp.remaining_on(job, server, t);
        const int run = rp.running[static_cast<std::size_t>(server)];
        ctx.server_idle = run < 0;
        ctx.running_vd =
            run < 0 ? 0.0
                    : server_value_density(scenario.jobs[static_cast<std::size_t>(run)],
                                           scenario.servers[static_cast<std::size_t>(server)]);
        ctx.preempted_count =
            static_cast<int>(rp.preempted[static_cast<std::size_t>(server)].size());
        return pairing_features(scenario.jobs[static_cast<std::size_t>(job)],
                                scenario.servers[static_cast<std::size_t>(server)], ctx, scales,
                                scenario.num_types);
    };

    std::vector<TrainingSample> out;
    auto emit = [&](Time t, char kind, int wj, int wi, int lj, int li) {
        TrainingSample ts;
        ts.scenario_id = scenario_id;
        ts.t = t;
        ts.event_kind = kind;
        ts.winner_job = wj;
        ts.winner_server = wi;
        ts.loser_job = lj;
        ts.loser_server = li;
        ts.winner_features = feat(wj, wi, t);
        ts.loser_features = feat(lj, li, t);
        out.push_back(std::move(ts));
    };

    std::vector<TraceEvent> events = trace.events;
    auto rank = [](TraceEventKind k) {
        switch (k) {
            case TraceEventKind::complete: return 0;
            case TraceEventKind::preempt: return 1;
            case TraceEventKind::schedule:
            case TraceEventKind::resume: return 2;
            default: return 3;
        }
    };
    std::stable_sort(events.begin(), events.end(), [&](const TraceEvent& a, const TraceEvent& b) {
        if (a.t != b.t) return a.t < b.t;
        return rank(a.kind) < rank(b.kind);
    });

    std::size_t k = 0;
    while (k < events.size()) {
        const Time t = events[k].t;
        std::size_t end = k;
        while (end < events.size() && events[end].t == t) ++end;

        // Phase 1: completions free their servers before anything is decided.
        for (std::size_t e = k; e < end; ++e) {
            const TraceEvent& ev = events[e];
            if (ev.kind != TraceEventKind::complete) continue;
            if (ev.job < 0 || ev.job >= scenario.num_jobs() || ev.server < 0 || ev.server >= C)
                throw IntegrityError("extract: event outside the scenario");
            if (rp.running[static_cast<std::size_t>(ev.server)] != ev.job)
                throw IntegrityError("extract: completion of a job that is not running");
            rp.running[static_cast<std::size_t>(ev.server)] = -1;
        }
        rp.admit_arrivals_and_expire(t);

        // Phase 2: every decision at this instant is sampled against the same
        // snapshot, then the state changes are applied together.
        for (std::size_t e = k; e < end; ++e) {
            const TraceEvent& ev = events[e];
            const int j = ev.job;
            const int i = ev.server;
            if (j < 0 || j >= scenario.num_jobs())
                throw IntegrityError("extract: event references unknown job");
            switch (ev.kind) {
                case TraceEventKind::schedule: {
                    const char kind = t == scenario.jobs[static_cast<std::size_t>(j)].arrival
                                          ? 'a'
                                          : 'c';
                    for (int other : rp.preempted[static_cast<std::size_t>(i)])
                        emit(t, kind, j, i, other, i);
                    for (int other : rp.pool)
                        if (other != j) emit(t, kind, j, i, other, i);
                    for (int other_server = 0; other_server < C; ++other_server)
                        if (other_server != i) emit(t, kind, j, i, j, other_server);
                    break;
                }
                case TraceEventKind::resume: {
                    for (int other : rp.preempted[static_cast<std::size_t>(i)])
                        if (other != j) emit(t, 'c', j, i, other, i);
                    for (int other : rp.pool) emit(t, 'c', j, i, other, i);
                    break;
                }
                case TraceEventKind::reject: {
                    for (int srv = 0; srv < C; ++srv) {
                        const int run = rp.running[static_cast<std::size_t>(srv)];
                        if (run >= 0) emit(t, 'a', run, srv, j, srv);
                    }
                    break;
                }
                default: break;
            }
        }
        for (std::size_t e = k; e < end; ++e) {
            const TraceEvent& ev = events[e];
            switch (ev.kind) {
                case TraceEventKind::preempt:
                    if (rp.running[static_cast<std::size_t>(ev.server)] != ev.job)
                        throw IntegrityError("extract: preempt of a job that is not running");
                    rp.running[static_cast<std::size_t>(ev.server)] = -1;
                    rp.preempted[static_cast<std::size_t>(ev.server)].insert(ev.job);
                    break;
                case TraceEventKind::schedule:
                    rp.pool.erase(ev.job);
                    rp.running[static_cast<std::size_t>(ev.server)] = ev.job;
                    break;
                case TraceEventKind::resume:
                    rp.preempted[static_cast<std::size_t>(ev.server)].erase(ev.job);
                    rp.running[static_cast<std::size_t>(ev.server)] = ev.job;
                    break;
                default: break;
            }
        }
        k = end;
    }
    return out;
}

// ----------------------------------------------------------------------------
// Sample file io

void save_samples(const std::vector<TrainingSample>& samples, int num_types,
                  const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("samples: cannot open for write: " + path);
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(FeatureRegistry::layout_hash(num_types)));
    out << "schedlab-samples v1\n";
    out << "xdim " << FeatureRegistry::dim(num_types) << "\n";
    out << "types " << num_types << "\n";
    out << "registry " << hex << "\n";
    out << "count " << samples.size() << "\n";
    for (const TrainingSample& s : samples) {
        out << "sample " << s.scenario_id << " " << s.t << " " << s.event_kind << " "
            << s.winner_job << " " << s.winner_server << " " << s.loser_job << " "
            << s.loser_server;
        for (double v : s.winner_features) out << " " << format_real(v);
        for (double v : s.loser_features) out << " " << format_real(v);
        out << "\n";
    }
    if (!out) throw IoError("samples: write failed: " + path);
}

std::vector<TrainingSample> load_samples(const std::string& path, int expected_types) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("samples: cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "schedlab-samples v1")
        throw IoError("samples: missing or unsupported header: '" + line + "'");
    int xdim = 0, types = 0;
    std::size_t count = 0;
    std::uint64_t registry = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "xdim") ls >> xdim;
        else if (tag == "types") ls >> types;
        else if (tag == "registry") {
            std::string hex;
            ls >> hex;
            registry = std::stoull(hex, nullptr, 16);
        } else if (tag == "count") {
            ls >> count;
            break;
        } else {
            throw IoError("samples: unknown header line '" + line + "'");
        }
    }
    if (types != expected_types)
        throw IoError("samples: file was extracted with a different type count");
    if (registry != FeatureRegistry::layout_hash(types))
        throw IoError("samples: feature registry mismatch");
    std::vector<TrainingSample> out;
    out.reserve(count);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "sample") throw IoError("samples: unexpected record '" + tag + "'");
        TrainingSample s;
        ls >> s.scenario_id >> s.t >> s.event_kind >> s.winner_job >> s.winner_server >>
            s.loser_job >> s.loser_server;
        s.winner_features.resize(static_cast<std::size_t>(xdim));
        s.loser_features.resize(static_cast<std::size_t>(xdim));
        for (double& v : s.winner_features) ls >> v;
        for (double& v : s.loser_features) ls >> v;
        if (!ls) throw IoError("samples: truncated sample line");
        out.push_back(std::move(s));
    }
    if (out.size() != count) throw IoError("samples: count header disagrees with body");
    return out;
}

std::vector<Sample> to_net_samples(const std::vector<TrainingSample>& samples) {
    std::vector<Sample> out;
    out.reserve(samples.size());
    for (const TrainingSample& s : samples)
        out.push_back({s.winner_features, s.loser_features, 0});
    return out;
}

// ----------------------------------------------------------------------------
// Ranking policy

RankingPolicy::RankingPolicy(const Scenario& scenario, CompareFn cmp)
    : scenario_(&scenario), scales_(FeatureScales::from(scenario)), cmp_(std::move(cmp)) {}

RankingPolicy::RankingPolicy(const Scenario& scenario, const ComparatorNet* net)
    : RankingPolicy(scenario, CompareFn([net](const std::vector<double>& a,
                                              const std::vector<double>& b) {
          return net->forward(a, b).first;
      })) {
    if (FeatureRegistry::dim(scenario.num_types) != net->x_dim())
        throw ConfigError("ranking: comparator input width does not fit this scenario");
}

std::vector<double> RankingPolicy::features(const SimView& view, int job, int server) const {
    return pairing_features(view, job, server, scales_);
}

std::vector<Directive> RankingPolicy::on_arrival(const SimView& view, std::span<const int> jobs,
                                                 Time /*t*/) {
    const int C = scenario_->num_servers();
    std::vector<Directive> dirs;
    std::vector<int> pending(jobs.begin(), jobs.end());
    std::sort(pending.begin(), pending.end());
    std::set<int> committed_servers;
    std::map<int, std::set<int>> lost;  // job -> servers it lost this event

    const int max_rounds = scenario_->num_jobs() * std::max(1, C) + 1;
    for (int round = 0;; ++round) {
        if (round > max_rounds)
            throw IntegrityError("ranking: arrival conflict loop failed to terminate");
        std::map<int, std::vector<int>> proposals;  // server -> contending jobs
        std::vector<int> next_pending;
        for (int j : pending) {
            std::vector<int> candidates;
            for (int i = 0; i < C; ++i) {
                if (committed_servers.count(i) || lost[j].count(i)) continue;
                if (!view.feasible_on(j, i)) continue;
                const int run = view.running(i);
                if (run < 0 || cmp_(features(view, j, i), features(view, run, i)) > 0.5)
                    candidates.push_back(i);
            }
            if (candidates.empty()) continue;  // stays in the unassigned pool
            const std::size_t top =
                rank_top_index(candidates.size(), [&](std::size_t a, std::size_t b) {
                    return cmp_(features(view, j, candidates[a]),
                                features(view, j, candidates[b]));
                });
            proposals[candidates[top]].push_back(j);
            next_pending.push_back(j);
        }
        if (proposals.empty()) break;
        std::set<int> placed;
        for (auto& [server, contenders] : proposals) {
            const std::size_t win =
                rank_top_index(contenders.size(), [&](std::size_t a, std::size_t b) {
                    return cmp_(features(view, contenders[a], server),
                                features(view, contenders[b], server));
                });
            const int winner = contenders[win];
            dirs.push_back({winner, server});
            committed_servers.insert(server);
            placed.insert(winner);
            for (int j : contenders)
                if (j != winner) lost[j].insert(server);
        }
        pending.clear();
        for (int j : next_pending)
            if (!placed.count(j)) pending.push_back(j);
    }
    return dirs;
}

std::vector<Directive> RankingPolicy::on_completion(const SimView& view,
                                                    std::span<const int> servers, Time /*t*/) {
    std::vector<Directive> dirs;
    std::vector<int> idle(servers.begin(), servers.end());
    std::sort(idle.begin(), idle.end());
    std::set<int> committed_jobs;
    std::map<int, std::set<int>> lost;  // server -> jobs it lost this event

    const int max_rounds = scenario_->num_jobs() * std::max(1, scenario_->num_servers()) + 1;
    for (int round = 0;; ++round) {
        if (round > max_rounds)
            throw IntegrityError("ranking: completion conflict loop failed to terminate");
        std::map<int, std::vector<int>> proposals;  // job -> contending servers
        std::vector<int> next_idle;
        for (int i : idle) {
            std::vector<int> candidates;
            auto consider = [&](int j) {
                if (committed_jobs.count(j) || lost[i].count(j)) return;
                if (!view.feasible_on(j, i)) return;
                candidates.push_back(j);
            };
            for (int j : view.preempted_on(i)) consider(j);
            for (int j : view.pool()) consider(j);
            std::sort(candidates.begin(), candidates.end());
            if (candidates.empty()) continue;  // server stays idle
            const std::size_t top =
                rank_top_index(candidates.size(), [&](std::size_t a, std::size_t b) {
                    return cmp_(features(view, candidates[a], i),
                                features(view, candidates[b], i));
                });
            proposals[candidates[top]].push_back(i);
            next_idle.push_back(i);
        }
        if (proposals.empty()) break;
        std::set<int> matched;
        for (auto& [job, contenders] : proposals) {
            const std::size_t win =
                rank_top_index(contenders.size(), [&](std::size_t a, std::size_t b) {
                    return cmp_(features(view, job, contenders[a]),
                                features(view, job, contenders[b]));
                });
            const int server = contenders[win];
            dirs.push_back({job, server});
            committed_jobs.insert(job);
            matched.insert(server);
            for (int i : contenders)
                if (i != server) lost[i].insert(job);
        }
        idle.clear();
        for (int i : next_idle)
            if (!matched.count(i)) idle.push_back(i);
    }
    return dirs;
}

}  // namespace schedlab
