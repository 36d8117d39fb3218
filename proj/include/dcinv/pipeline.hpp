#pragma once

#include <cstdint>
#include <string>

#include "dcinv/config.hpp"
#include "dcinv/consistency.hpp"
#include "dcinv/harness.hpp"
#include "dcinv/synthesis.hpp"

namespace dcinv {

// In-memory pipeline steps shared by the command-line driver and the
// integration tests. File handling lives in the driver.

TrueSystem system_from_config(const RunConfig& config);

ContractionSettings settings_from_config(const RunConfig& config);

Dataset step_simulate(const RunConfig& config);

ConsistencySet step_consistency(const RunConfig& config, const Dataset& data);

ThetaVertexFamily step_vertices(const RunConfig& config,
                                const ConsistencySet& cs);

/// Assembles the robust model: basis and boxes from the example system,
/// disturbance box from config.epsilon, family as given.
RobustModel model_from_config(const RunConfig& config,
                              ThetaVertexFamily family);

CandidatePolytope initial_candidate(const RunConfig& config);

SynthesisOutput step_synthesize(const RunConfig& config,
                                const RobustModel& model);

EnlargeResult step_enlarge(const RunConfig& config, const RobustModel& model,
                           const Certificate& cert);

/// Everything from data to certificate in one call (no enlarging).
struct PipelineRun {
  Dataset dataset;
  ConsistencySet consistency;
  RobustModel model;
  SynthesisOutput synthesis;
};
PipelineRun run_pipeline(const RunConfig& config);

}  // namespace dcinv
