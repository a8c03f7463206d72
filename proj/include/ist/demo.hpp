#pragma once

// The shipped structural-fidelity split scenario: a competitive-analysis
// request whose carrier encodes only the task itself, leaving four private
// dimensions (audience, market, criteria, tone) to the model prior.

#include <cstdint>
#include <string>

#include "ist/intent_model.hpp"
#include "ist/prior_sim.hpp"
#include "ist/spec_io.hpp"

namespace ist::demo {

inline constexpr std::uint64_t kSeed = 20240917;
inline constexpr std::string_view kTaskId = "competitive_analysis";

WorldConfig world_config();
SyntheticWorld world();

// World task spec plus privacy hints (what: public, the rest: private).
IntentSpec spec();
Carrier carrier();
ModelOutput simulated_output();

}  // namespace ist::demo
