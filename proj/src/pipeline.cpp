#include "dcinv/pipeline.hpp"

#include <utility>
#include <cmath>

#include "dcinv/errors.hpp"
#include "dcinv/serialize.hpp"

namespace dcinv {

TrueSystem system_from_config(const RunConfig& config) {
  TrueSystem sys = example_system(config.injected_noise());
  return sys;
}

ContractionSettings settings_from_config(const RunConfig& config) {
  ContractionSettings settings;
  settings.lambda_w = config.lambda_w;
  settings.gamma_min = config.gamma_min;
  settings.gamma_max = config.gamma_max;
  settings.jobs = config.jobs;
  return settings;
}

Dataset step_simulate(const RunConfig& config) {
  validate(config);
  const TrueSystem sys = system_from_config(config);
  return generate_dataset(sys, config.T, config.seed);
}

ConsistencySet step_consistency(const RunConfig& config, const Dataset& data) {
  const TrueSystem sys = system_from_config(config);
  return build_consistency_set(data, sys.basis, config.epsilon);
}

ThetaVertexFamily step_vertices(const RunConfig& config,
                                const ConsistencySet& cs) {
  return enumerate_parameter_vertices(cs, config.max_family_count,
                                      config.jobs);
}

RobustModel model_from_config(const RunConfig& config,
                              ThetaVertexFamily family) {
  const TrueSystem sys = system_from_config(config);
  RobustModel model{sys.basis,
                    std::move(family),
                    Box::cube(sys.basis.state_dim(), config.epsilon),
                    InputRegion(sys.input_box),
                    sys.state_box,
                    DcScheme::Shifted,
                    std::nullopt};
  if (config.cap_override) {
    Vector caps =
        Vector::Constant(sys.basis.size(), *config.cap_override);
    model.cap_override = caps;
  }
  return model;
}

CandidatePolytope initial_candidate(const RunConfig& config) {
  if (config.initial_shape == "regular")
    return regular_polygon_candidate(config.initial_vertices,
                                     config.initial_radius);
  // Axis box cut by the ones-diagonal slab: 2n box facets plus the
  // +/-(1,...,1)/sqrt(n) pair at the configured distance.
  const int n = 2;
  const double hw = config.initial_box_half_width;
  const double cut = config.initial_diagonal_cut;
  Matrix normals(2 * n + 2, n);
  normals.setZero();
  for (int i = 0; i < n; ++i) {
    normals(2 * i, i) = 1.0 / hw;
    normals(2 * i + 1, i) = -1.0 / hw;
  }
  const double diag = std::sqrt(static_cast<double>(n)) * cut;
  normals.row(2 * n).setConstant(1.0 / diag);
  normals.row(2 * n + 1).setConstant(-1.0 / diag);
  return make_candidate(HPolytope(normals, Vector::Ones(2 * n + 2)),
                        "initial");
}

SynthesisOutput step_synthesize(const RunConfig& config,
                                const RobustModel& model) {
  return compute_contractive_set(initial_candidate(config), model,
                                 settings_from_config(config));
}

EnlargeResult step_enlarge(const RunConfig& config, const RobustModel& model,
                           const Certificate& cert) {
  return enlarge_random(cert, model, config.enlarge_candidates, config.seed,
                        settings_from_config(config));
}

PipelineRun run_pipeline(const RunConfig& config) {
  validate(config);
  Dataset dataset = step_simulate(config);
  ConsistencySet consistency = step_consistency(config, dataset);
  ThetaVertexFamily family = step_vertices(config, consistency);
  RobustModel model = model_from_config(config, std::move(family));
  SynthesisOutput synthesis = step_synthesize(config, model);
  synthesis.certificate.consistency_digest = consistency.data_digest();
  return PipelineRun{std::move(dataset), std::move(consistency),
                     std::move(model), std::move(synthesis)};
}

}  // namespace dcinv
