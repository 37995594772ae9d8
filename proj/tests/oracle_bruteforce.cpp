#include "oracle_bruteforce.hpp"

#include <vector>

namespace schedlab::testoracle {

namespace {

// Kuhn's augmenting-path matching: one node per demand unit, one per
// timestep; a unit of job j may occupy any step of [arrival, deadline].
struct UnitMatcher {
    const Scenario* s;
    std::vector<Time> unit_arrival, unit_deadline;
    std::vector<int> slot_owner;  // per timestep offset, unit id or -1
    std::vector<char> visited;

    bool augment(int unit) {
        for (Time t = unit_arrival[static_cast<std::size_t>(unit)];
             t <= unit_deadline[static_cast<std::size_t>(unit)]; ++t) {
            const std::size_t slot = static_cast<std::size_t>(t - s->t_min);
            if (visited[slot]) continue;
            visited[slot] = 1;
            if (slot_owner[slot] < 0 || augment(slot_owner[slot])) {
                slot_owner[slot] = unit;
                return true;
            }
        }
        return false;
    }

    bool feasible(const Scenario& scenario, const std::vector<int>& jobs,
                  const std::vector<int>& demand_row) {
        s = &scenario;
        unit_arrival.clear();
        unit_deadline.clear();
        for (int j : jobs) {
            const Job& job = scenario.jobs[static_cast<std::size_t>(j)];
            for (int u = 0; u < demand_row[static_cast<std::size_t>(j)]; ++u) {
                unit_arrival.push_back(job.arrival);
                unit_deadline.push_back(job.deadline);
            }
        }
        const std::size_t slots = static_cast<std::size_t>(scenario.t_max - scenario.t_min + 1);
        if (unit_arrival.size() > slots) return false;
        slot_owner.assign(slots, -1);
        for (std::size_t u = 0; u < unit_arrival.size(); ++u) {
            visited.assign(slots, 0);
            if (!augment(static_cast<int>(u))) return false;
        }
        return true;
    }
};

struct Enumerator {
    const Scenario* s;
    std::vector<std::vector<int>> demand;       // [server][job]
    std::vector<std::vector<int>> assigned;     // [server] -> job ids
    std::vector<int> choice;                    // job -> server or -1
    UnitMatcher matcher;
    double best = 0.0;

    double value_of() const {
        double total = 0.0;
        for (int j = 0; j < s->num_jobs(); ++j) {
            const int i = choice[static_cast<std::size_t>(j)];
            if (i < 0) continue;
            const Job& job = s->jobs[static_cast<std::size_t>(j)];
            total += job.value * job.pref[static_cast<std::size_t>(i)];
        }
        return total;
    }

    void recurse(int j) {
        if (j == s->num_jobs()) {
            best = std::max(best, value_of());
            return;
        }
        choice[static_cast<std::size_t>(j)] = -1;
        recurse(j + 1);
        const Job& job = s->jobs[static_cast<std::size_t>(j)];
        for (int i = 0; i < s->num_servers(); ++i) {
            const auto& row = demand[static_cast<std::size_t>(i)];
            if (static_cast<Time>(row[static_cast<std::size_t>(j)]) >
                job.deadline - job.arrival + 1)
                continue;
            auto& set = assigned[static_cast<std::size_t>(i)];
            set.push_back(j);
            if (matcher.feasible(*s, set, row)) {
                choice[static_cast<std::size_t>(j)] = i;
                recurse(j + 1);
                choice[static_cast<std::size_t>(j)] = -1;
            }
            set.pop_back();
        }
    }
};

}  // namespace

double brute_force_optimal(const Scenario& scenario) {
    Enumerator e;
    e.s = &scenario;
    const int C = scenario.num_servers();
    const int N = scenario.num_jobs();
    e.demand.assign(static_cast<std::size_t>(C), std::vector<int>(static_cast<std::size_t>(N)));
    for (int i = 0; i < C; ++i)
        for (int j = 0; j < N; ++j)
            e.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                server_demand(scenario.jobs[static_cast<std::size_t>(j)],
                              scenario.servers[static_cast<std::size_t>(i)]);
    e.assigned.assign(static_cast<std::size_t>(C), {});
    e.choice.assign(static_cast<std::size_t>(N), -1);
    e.recurse(0);
    return e.best;
}

}  // namespace schedlab::testoracle
