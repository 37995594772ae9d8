#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "schedlab/cmpnet.hpp"
#include "schedlab/features.hpp"
#include "schedlab/sim.hpp"
#include "schedlab/trace.hpp"

namespace schedlab {

// Pairwise supervision unit: the optimal scheduler preferred the winner
// pairing over the loser pairing at one decision instant. Feature vectors
// are captured at that instant, not reconstructed afterwards.
struct TrainingSample {
    std::uint64_t scenario_id = 0;
    Time t = 0;
    char event_kind = 'a';  // 'a' arrival decision, 'c' completion decision
    int winner_job = -1, winner_server = -1;
    int loser_job = -1, loser_server = -1;
    std::vector<double> winner_features, loser_features;
};

// Replays an optimal decision trace and emits pairwise samples:
//  - a job scheduled at its arrival beats every job preempted on or pooled
//    for that server, and beats its own pairing with every other server;
//  - a job left unscheduled at its arrival loses to every running job;
//  - a job picked at a completion beats the other pending/unassigned
//    candidates there, and a pool pick beats its other-server pairings.
// Throws IntegrityError if the trace does not match the scenario.
std::vector<TrainingSample> extract_samples(const ScheduleTrace& trace, const Scenario& scenario,
                                            std::uint64_t scenario_id);

// Columnar text format, header "schedlab-samples v1"; carries the feature
// registry hash so mismatched layouts are rejected at load time.
void save_samples(const std::vector<TrainingSample>& samples, int num_types,
                  const std::string& path);
std::vector<TrainingSample> load_samples(const std::string& path, int expected_types);

// Winner-first network samples (label 0).
std::vector<Sample> to_net_samples(const std::vector<TrainingSample>& samples);

// p(first pairing should outrank second pairing).
using CompareFn =
    std::function<double(const std::vector<double>&, const std::vector<double>&)>;

// Comparator-driven two-phase scheduler. Arrivals propose their top-ranked
// admissible server and servers break conflicts; freed servers propose their
// top-ranked candidate job and jobs break conflicts. Losers retry until no
// unscheduled entity has candidates left.
class RankingPolicy : public Policy {
  public:
    RankingPolicy(const Scenario& scenario, CompareFn cmp);
    RankingPolicy(const Scenario& scenario, const ComparatorNet* net);

    std::vector<Directive> on_arrival(const SimView& view, std::span<const int> jobs,
                                      Time t) override;
    std::vector<Directive> on_completion(const SimView& view, std::span<const int> servers,
                                         Time t) override;

  private:
    std::vector<double> features(const SimView& view, int job, int server) const;

    const Scenario* scenario_;
    FeatureScales scales_;
    CompareFn cmp_;
};

}  // namespace schedlab
