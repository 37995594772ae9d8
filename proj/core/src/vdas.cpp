#include "schedlab/vdas.hpp"

#include <map>

#include "schedlab/errors.hpp"

namespace schedlab {

void VdasParams::validate() const {
    if (!(mu >= 0.0)) throw ConfigError("vdas: mu must be >= 0");
    if (!(gamma >= 1.0)) throw ConfigError("vdas: gamma must be >= 1");
    if (slack_min && !(*slack_min >= 1.0)) throw ConfigError("vdas: slack_min must be >= 1");
}

double delta_value_density(const Job& job, const Server& server, const Job* running) {
    const double base = running ? server_value_density(*running, server) : 0.0;
    return server_value_density(job, server) - base;
}

VdasPolicy::VdasPolicy(VdasParams params) : params_(params) { params_.validate(); }

std::optional<int> VdasPolicy::threshold_choose(
    const std::vector<std::pair<int, double>>& candidates, std::optional<double> running_rho,
    double gamma) {
    if (candidates.empty()) return std::nullopt;
    int best = candidates.front().first;
    double best_rho = candidates.front().second;
    for (const auto& [id, rho] : candidates) {
        if (rho > best_rho || (rho == best_rho && id < best)) {
            best = id;
            best_rho = rho;
        }
    }
    if (!running_rho) return best;
    return best_rho > gamma * *running_rho ? std::optional<int>(best) : std::nullopt;
}

// Commitments made earlier inside the same event batch.
struct VdasPolicy::Overlay {
    std::map<int, int> placed;        // server -> job committed this event
    std::unordered_set<int> taken;    // jobs no longer available this event

    int running(const SimView& view, int server) const {
        auto it = placed.find(server);
        return it != placed.end() ? it->second : view.running(server);
    }
};

std::vector<std::pair<int, double>> VdasPolicy::candidates_for(const SimView& view,
                                                               const Overlay& ov, int server,
                                                               Time t) const {
    const Scenario& s = view.scenario();
    const Server& srv = s.servers[static_cast<std::size_t>(server)];
    std::vector<std::pair<int, double>> out;
    auto consider = [&](int j) {
        if (ov.taken.count(j) || rejected_.count(j)) return;
        const Job& job = s.jobs[static_cast<std::size_t>(j)];
        if (!in_window(job, srv, t, params_.mu, params_.nominal_window)) return;
        if (!view.feasible_on(j, server)) return;
        out.emplace_back(j, server_value_density(job, srv));
    };
    for (int j : view.preempted_on(server)) consider(j);
    for (int j : view.pool()) consider(j);
    return out;
}

std::vector<Directive> VdasPolicy::on_arrival(const SimView& view, std::span<const int> jobs,
                                              Time t) {
    const Scenario& s = view.scenario();
    Overlay ov;
    std::vector<Directive> dirs;

    for (int arriving : jobs) {
        const Job& job = s.jobs[static_cast<std::size_t>(arriving)];
        if (params_.slack_min && job.slack() < *params_.slack_min) {
            rejected_.insert(arriving);
            continue;
        }
        if (ov.taken.count(arriving)) continue;  // grabbed by an earlier probe

        // Server with the highest value-density delta, ties to the lowest id.
        int best_server = 0;
        double best_delta = 0.0;
        for (int i = 0; i < s.num_servers(); ++i) {
            const int run = ov.running(view, i);
            const Job* run_job = run >= 0 ? &s.jobs[static_cast<std::size_t>(run)] : nullptr;
            const double delta =
                delta_value_density(job, s.servers[static_cast<std::size_t>(i)], run_job);
            if (i == 0 || delta > best_delta) {
                best_server = i;
                best_delta = delta;
            }
        }

        const int run = ov.running(view, best_server);
        std::optional<double> running_rho;
        if (run >= 0)
            running_rho = server_value_density(s.jobs[static_cast<std::size_t>(run)],
                                               s.servers[static_cast<std::size_t>(best_server)]);
        const auto choice =
            threshold_choose(candidates_for(view, ov, best_server, t), running_rho, params_.gamma);
        if (choice) {
            if (run >= 0) ++preemptions_;
            dirs.push_back({*choice, best_server});
            ov.placed[best_server] = *choice;
            ov.taken.insert(*choice);
        }
    }
    return dirs;
}

std::vector<Directive> VdasPolicy::on_completion(const SimView& view, std::span<const int> servers,
                                                 Time t) {
    const Scenario& s = view.scenario();
    Overlay ov;
    std::vector<Directive> dirs;

    for (int i : servers) {
        // Resume the feasible preempted job with the highest rho_dot, then
        // give the threshold rule a chance to displace it from the pool.
        const Server& srv = s.servers[static_cast<std::size_t>(i)];
        int resume = -1;
        double resume_rho = 0.0;
        for (int j : view.preempted_on(i)) {
            if (ov.taken.count(j) || rejected_.count(j)) continue;
            if (!view.feasible_on(j, i)) continue;
            const double rho = server_value_density(s.jobs[static_cast<std::size_t>(j)], srv);
            if (resume < 0 || rho > resume_rho || (rho == resume_rho && j < resume)) {
                resume = j;
                resume_rho = rho;
            }
        }

        auto cands = candidates_for(view, ov, i, t);
        if (resume >= 0)
            std::erase_if(cands, [&](const auto& c) { return c.first == resume; });
        const auto choice = threshold_choose(
            cands, resume >= 0 ? std::optional<double>(resume_rho) : std::nullopt, params_.gamma);

        int placed = -1;
        if (choice)
            placed = *choice;  // displaces the would-be resume before it runs
        else if (resume >= 0)
            placed = resume;
        if (placed >= 0) {
            dirs.push_back({placed, i});
            ov.placed[i] = placed;
            ov.taken.insert(placed);
        }
    }
    return dirs;
}

}  // namespace schedlab
