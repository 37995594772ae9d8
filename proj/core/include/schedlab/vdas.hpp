#pragma once

#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "schedlab/sim.hpp"

namespace schedlab {

struct VdasParams {
    double mu = 0.0;                  // deadline headroom, in multiples of demand
    double gamma = 1.0;               // preemption threshold, >= 1
    std::optional<double> slack_min;  // optional admission filter on job slack
    bool nominal_window = false;      // window from nominal proc_time instead of demand

    void validate() const;
};

// rho_dot of `job` on `server` minus rho_dot of the job currently running
// there (zero for an idle server).
double delta_value_density(const Job& job, const Server& server, const Job* running);

// Value-density scheduler with threshold preemption. At an arrival it probes
// only the server with the highest value-density delta; at a completion it
// resumes the best preempted job and then re-applies the threshold rule.
class VdasPolicy : public Policy {
  public:
    explicit VdasPolicy(VdasParams params);

    std::vector<Directive> on_arrival(const SimView& view, std::span<const int> jobs,
                                      Time t) override;
    std::vector<Directive> on_completion(const SimView& view, std::span<const int> servers,
                                         Time t) override;

    // Pure threshold rule over (job id, rho_dot) candidates: picks the
    // highest-density candidate (ties to the lowest id) and admits it iff its
    // density strictly exceeds gamma times the running density (always, when
    // the server is idle). Exposed for direct boundary testing.
    static std::optional<int> threshold_choose(
        const std::vector<std::pair<int, double>>& candidates,
        std::optional<double> running_rho, double gamma);

    int preemptions_issued() const { return preemptions_; }

  private:
    struct Overlay;  // pending commitments within one event

    std::vector<std::pair<int, double>> candidates_for(const SimView& view, const Overlay& ov,
                                                       int server, Time t) const;

    VdasParams params_;
    std::unordered_set<int> rejected_;  // jobs dropped by the slack filter
    int preemptions_ = 0;
};

}  // namespace schedlab
