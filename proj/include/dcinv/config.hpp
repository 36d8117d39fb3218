#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dcinv/types.hpp"

namespace dcinv {

/// One configuration drives the whole pipeline. JSON schema version 1.
struct RunConfig {
  int schema = 1;

  // Data generation
  std::uint64_t seed = 20260822;
  int T = 30;
  /// Known per-component noise bound: consistency margin and disturbance
  /// box half-width. The default keeps the identified control gain's sign
  /// unambiguous, which any certificate needs (see README).
  double epsilon = 0.004;
  /// Noise actually injected by the harness; defaults to epsilon.
  std::optional<double> true_noise;

  // Contraction. The default sits at the invariance endpoint: the
  // identified family's uncontrollable direction contracts at a worst-case
  // open-loop rate just below 1, so any smaller factor leaves no
  // certifiable set (see README).
  double lambda_w = 1.0;
  double gamma_min = 1e-6;
  double gamma_max = 1e3;

  // Initial candidate. "box-diagonal" intersects the axis box
  // |x_i| <= initial_box_half_width with the diagonal slab
  // |sum_i x_i| / sqrt(n) <= initial_diagonal_cut, matching the geometry
  // this plant rewards: room along the weakly-coupled diagonal, tight
  // along the strongly-driven one. "regular" is a 2-D regular polygon.
  std::string initial_shape = "box-diagonal";
  double initial_box_half_width = 0.1;
  double initial_diagonal_cut = 0.035;
  int initial_vertices = 12;    // regular shape only
  double initial_radius = 0.25; // regular shape only

  // Enlarging
  int enlarge_candidates = 20;
  int enlarge_directions = 0;  // 0 = skip directional pass

  // Numerics
  std::optional<double> cap_override;  // uniform per-atom magnitude cap
  int max_family_count = 200000;
  int jobs = 1;

  double injected_noise() const { return true_noise.value_or(epsilon); }
};

/// Throws Error with a actionable message when a field is out of range
/// (epsilon > 0, lambda_w in (0,1], T >= 1, initial_vertices >= 3, ...).
void validate(const RunConfig& config);

RunConfig load_config(const std::string& path);  // throws Error on IO/parse
void save_config(const RunConfig& config, const std::string& path);

/// Canonical JSON text (sorted keys, fixed float format) — also the input
/// to the config digest.
std::string config_to_json_text(const RunConfig& config);
RunConfig config_from_json_text(const std::string& text);

}  // namespace dcinv
