#include "schedlab/features.hpp"

#include <algorithm>

namespace schedlab {

FeatureScales FeatureScales::from(const Scenario& s) {
    FeatureScales f;
    for (const Job& j : s.jobs) {
        f.v_max = std::max(f.v_max, j.value);
        f.p_max = std::max(f.p_max, static_cast<double>(j.proc_time));
        f.rho_max = std::max(f.rho_max, value_density(j));
    }
    f.horizon = std::max<double>(1.0, static_cast<double>(s.t_max - s.t_min));
    f.n_jobs = std::max(1, s.num_jobs());
    return f;
}

std::vector<std::string> FeatureRegistry::names(int num_types) {
    std::vector<std::string> n = {
        "job_value",        "job_proc_time",    "job_value_density", "job_time_to_deadline",
        "job_remaining",    "job_slack_remaining", "job_pref",
    };
    for (int t = 0; t < num_types; ++t) n.push_back("job_type_" + std::to_string(t));
    n.insert(n.end(), {"srv_eta", "srv_idle", "srv_running_vd", "srv_preempted_count"});
    return n;
}

std::uint64_t FeatureRegistry::layout_hash(int num_types) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        h ^= '\n';
        h *= 0x100000001b3ull;
    };
    for (const std::string& name : names(num_types)) mix(name);
    return h;
}

std::vector<double> pairing_features(const Job& job, const Server& server,
                                     const PairingContext& ctx, const FeatureScales& scales,
                                     int num_types) {
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(FeatureRegistry::dim(num_types)));
    x.push_back(job.value / scales.v_max);
    x.push_back(static_cast<double>(job.proc_time) / scales.p_max);
    x.push_back(value_density(job) / scales.rho_max);
    const double ttd = static_cast<double>(job.deadline - ctx.t);
    x.push_back(ttd / scales.horizon);
    x.push_back(static_cast<double>(ctx.remaining_on_server) / scales.horizon);
    const double slack_rem = ttd / std::max(1, ctx.remaining_on_server);
    x.push_back(std::min(slack_rem, 8.0) / 8.0);
    x.push_back(job.pref[static_cast<std::size_t>(server.id)]);
    for (int t = 0; t < num_types; ++t) x.push_back(job.jtype == t ? 1.0 : 0.0);
    x.push_back(server.eta[static_cast<std::size_t>(job.jtype)]);
    x.push_back(ctx.server_idle ? 1.0 : 0.0);
    x.push_back(ctx.running_vd / scales.rho_max);
    x.push_back(static_cast<double>(ctx.preempted_count) / scales.n_jobs);
    return x;
}

std::vector<double> pairing_features(const SimView& view, int job, int server,
                                     const FeatureScales& scales) {
    const Scenario& s = view.scenario();
    PairingContext ctx;
    ctx.t = view.now();
    ctx.remaining_on_server = view.remaining_on(job, server);
    const int run = view.running(server);
    ctx.server_idle = run < 0;
    ctx.running_vd = run < 0 ? 0.0
                             : server_value_density(s.jobs[static_cast<std::size_t>(run)],
                                                    s.servers[static_cast<std::size_t>(server)]);
    ctx.preempted_count = static_cast<int>(view.preempted_on(server).size());
    return pairing_features(s.jobs[static_cast<std::size_t>(job)],
                            s.servers[static_cast<std::size_t>(server)], ctx, scales, s.num_types);
}

}  // namespace schedlab
