#include "dcinv/config.hpp"

#include "json.hpp"

#include "dcinv/errors.hpp"
#include "dcinv/serialize.hpp"

namespace dcinv {

namespace {

using nlohmann::json;

void check(bool ok, const std::string& what) {
  if (!ok) throw Error("invalid configuration: " + what);
}

}  // namespace

void validate(const RunConfig& config) {
  check(config.schema == 1, "unsupported schema version (this build reads 1)");
  check(config.T >= 1, "T must be at least 1 (need data to fit)");
  check(config.epsilon > 0.0, "epsilon must be positive");
  if (config.true_noise)
    check(*config.true_noise >= 0.0 && *config.true_noise <= config.epsilon,
          "true_noise must lie in [0, epsilon] (the consistency bound must "
          "cover every injected disturbance)");
  check(config.lambda_w > 0.0 && config.lambda_w <= 1.0,
        "lambda_w must lie in (0, 1]");
  check(config.gamma_min > 0.0, "gamma_min must be positive");
  check(config.gamma_max > config.gamma_min,
        "gamma_max must exceed gamma_min");
  check(config.initial_shape == "regular" ||
            config.initial_shape == "box-diagonal",
        "initial_shape must be \"regular\" or \"box-diagonal\"");
  check(config.initial_box_half_width > 0.0,
        "initial_box_half_width must be positive");
  check(config.initial_diagonal_cut > 0.0,
        "initial_diagonal_cut must be positive");
  check(config.initial_vertices >= 3,
        "initial_vertices must be at least 3 (need a full-dimensional "
        "polygon)");
  check(config.initial_radius > 0.0, "initial_radius must be positive");
  check(config.enlarge_candidates >= 0,
        "enlarge_candidates must be nonnegative");
  check(config.enlarge_directions >= 0,
        "enlarge_directions must be nonnegative");
  if (config.cap_override)
    check(*config.cap_override > 0.0, "cap_override must be positive");
  check(config.max_family_count >= 1, "max_family_count must be at least 1");
  check(config.jobs >= 1, "jobs must be at least 1");
}

std::string config_to_json_text(const RunConfig& config) {
  json j;
  j["schema"] = config.schema;
  j["seed"] = config.seed;
  j["T"] = config.T;
  j["epsilon"] = config.epsilon;
  if (config.true_noise) j["true_noise"] = *config.true_noise;
  j["lambda_w"] = config.lambda_w;
  j["gamma_min"] = config.gamma_min;
  j["gamma_max"] = config.gamma_max;
  j["initial_shape"] = config.initial_shape;
  j["initial_box_half_width"] = config.initial_box_half_width;
  j["initial_diagonal_cut"] = config.initial_diagonal_cut;
  j["initial_vertices"] = config.initial_vertices;
  j["initial_radius"] = config.initial_radius;
  j["enlarge_candidates"] = config.enlarge_candidates;
  j["enlarge_directions"] = config.enlarge_directions;
  if (config.cap_override) j["cap_override"] = *config.cap_override;
  j["max_family_count"] = config.max_family_count;
  j["jobs"] = config.jobs;
  return j.dump(2) + "\n";
}

RunConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("configuration parse failure: ") + e.what());
  }
  if (!j.is_object()) throw Error("configuration must be a JSON object");

  RunConfig config;
  config.schema = j.value("schema", config.schema);
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  config.T = j.value("T", config.T);
  config.epsilon = j.value("epsilon", config.epsilon);
  if (j.contains("true_noise"))
    config.true_noise = j.at("true_noise").get<double>();
  config.lambda_w = j.value("lambda_w", config.lambda_w);
  config.gamma_min = j.value("gamma_min", config.gamma_min);
  config.gamma_max = j.value("gamma_max", config.gamma_max);
  config.initial_shape = j.value("initial_shape", config.initial_shape);
  config.initial_box_half_width =
      j.value("initial_box_half_width", config.initial_box_half_width);
  config.initial_diagonal_cut =
      j.value("initial_diagonal_cut", config.initial_diagonal_cut);
  config.initial_vertices = j.value("initial_vertices", config.initial_vertices);
  config.initial_radius = j.value("initial_radius", config.initial_radius);
  config.enlarge_candidates =
      j.value("enlarge_candidates", config.enlarge_candidates);
  config.enlarge_directions =
      j.value("enlarge_directions", config.enlarge_directions);
  if (j.contains("cap_override"))
    config.cap_override = j.at("cap_override").get<double>();
  config.max_family_count = j.value("max_family_count", config.max_family_count);
  config.jobs = j.value("jobs", config.jobs);

  validate(config);
  return config;
}

RunConfig load_config(const std::string& path) {
  return config_from_json_text(read_text_file(path));
}

void save_config(const RunConfig& config, const std::string& path) {
  write_text_file(path, config_to_json_text(config));
}

}  // namespace dcinv
