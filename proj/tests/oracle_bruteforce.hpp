#pragma once

#include "schedlab/model.hpp"

namespace schedlab::testoracle {

// Exhaustive enumeration of every (completion subset, server assignment)
// combination. Feasibility per server is decided by maximum bipartite
// matching between demand units and timesteps inside each job's window --
// a deliberately different route from the solver's packing check. Only
// usable at toy scale.
double brute_force_optimal(const Scenario& s);

}  // namespace schedlab::testoracle
