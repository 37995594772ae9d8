#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "schedlab/model.hpp"
#include "schedlab/sim.hpp"

namespace schedlab {

// Scenario-relative normalizers so the same trained comparator transfers
// across scenario sizes.
struct FeatureScales {
    double v_max = 1.0;
    double p_max = 1.0;
    double rho_max = 1.0;
    double horizon = 1.0;
    int n_jobs = 1;

    static FeatureScales from(const Scenario& s);
};

// One job/server pairing described by a fixed-length vector; the first block
// describes the candidate job (value, proc time, value density, time to
// deadline, remaining demand here, remaining slack, preference, one-hot
// type), the second the server's state (efficiency for the job's type, idle
// flag, running job's rho_dot, preempted count). The same layout serves both
// comparison modes: two servers for one job, and two jobs for one server.
class FeatureRegistry {
  public:
    static std::vector<std::string> names(int num_types);
    static int dim(int num_types) { return 11 + num_types; }
    // FNV-1a over the registry names; stored in model and sample files so a
    // trained net is never applied to a mismatched layout.
    static std::uint64_t layout_hash(int num_types);
};

// State of the target server at the decision instant, captured before the
// decision is applied.
struct PairingContext {
    Time t = 0;
    int remaining_on_server = 0;
    bool server_idle = true;
    double running_vd = 0.0;  // rho_dot of the running job, 0 when idle
    int preempted_count = 0;
};

std::vector<double> pairing_features(const Job& job, const Server& server,
                                     const PairingContext& ctx, const FeatureScales& scales,
                                     int num_types);

// Convenience for live simulation state.
std::vector<double> pairing_features(const SimView& view, int job, int server,
                                     const FeatureScales& scales);

}  // namespace schedlab
