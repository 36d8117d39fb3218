// Command-line driver: each subcommand reads/writes JSON/CSV/SVG artifacts
// in the --out directory so runs can be scripted and diffed.
//
// Exit codes: 0 success (and verification pass), 1 verification failure,
// 2 usage or I/O error.

#include <ctime>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcinv/config.hpp"
#include "dcinv/consistency.hpp"
#include "dcinv/errors.hpp"
#include "dcinv/harness.hpp"
#include "dcinv/pipeline.hpp"
#include "dcinv/serialize.hpp"
#include "dcinv/synthesis.hpp"

namespace {

using dcinv::RunConfig;
using nlohmann::json;

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<double> lambda;
  int samples = 10000;
};

RunConfig effective_config(const CliOptions& opts) {
  RunConfig config;
  if (!opts.config_path.empty()) config = dcinv::load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.jobs) config.jobs = *opts.jobs;
  if (opts.lambda) config.lambda_w = *opts.lambda;
  dcinv::validate(config);
  return config;
}

std::string artifact_path(const CliOptions& opts, const std::string& name) {
  if (opts.out_dir.empty() || opts.out_dir == ".") return name;
  std::string dir = opts.out_dir;
  if (dir.back() != '/') dir += '/';
  return dir + name;
}

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return std::string(buf);
}

// Adds the provenance envelope (config digest, timestamp) on top of the
// deterministic payload keys. The timestamp is the only nondeterministic
// byte range in any artifact and is excluded from all digests.
void write_artifact(const CliOptions& opts, const std::string& name,
                    const std::string& payload_text,
                    std::uint64_t config_digest) {
  json j = json::parse(payload_text);
  j["config_digest"] = dcinv::hex64(config_digest);
  j["timestamp"] = iso_utc_now();
  dcinv::write_text_file(artifact_path(opts, name), j.dump(2) + "\n");
}

std::uint64_t config_digest_of(const RunConfig& config) {
  return dcinv::fnv1a64(dcinv::config_to_json_text(config));
}

// Digest of a stored artifact's payload (envelope keys stripped).
std::uint64_t payload_digest(const std::string& file_text) {
  json j = json::parse(file_text);
  j.erase("timestamp");
  j.erase("config_digest");
  return dcinv::fnv1a64(j.dump(2) + "\n");
}

std::vector<dcinv::AdmittedPoint> read_admitted_csv(const std::string& text,
                                                    int n, int m) {
  std::vector<dcinv::AdmittedPoint> out;
  size_t pos = text.find('\n');  // skip header
  while (pos != std::string::npos && pos + 1 < text.size()) {
    const size_t end = text.find('\n', pos + 1);
    const std::string line = text.substr(
        pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1);
    pos = end;
    if (line.empty()) continue;
    std::vector<double> cells;
    size_t start = 0;
    while (start <= line.size()) {
      const size_t comma = line.find(',', start);
      const std::string cell =
          line.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      cells.push_back(std::stod(cell));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(cells.size()) != n + m + 1)
      throw dcinv::Error("admitted-point CSV has unexpected column count");
    dcinv::AdmittedPoint pt;
    pt.point = dcinv::Vector(n);
    for (int i = 0; i < n; ++i) pt.point(i) = cells[i];
    pt.control = dcinv::Vector(m);
    for (int i = 0; i < m; ++i) pt.control(i) = cells[n + i];
    pt.worst_residual = cells[n + m];
    out.push_back(std::move(pt));
  }
  return out;
}

int cmd_simulate(const CliOptions& opts) {
  const RunConfig config = effective_config(opts);
  const dcinv::Dataset data = dcinv::step_simulate(config);
  write_artifact(opts, "dataset.json", dcinv::to_json_text(data),
                 config_digest_of(config));
  dcinv::write_text_file(artifact_path(opts, "dataset.csv"),
                         dcinv::dataset_to_csv(data));
  std::cout << "wrote " << data.size() << " transitions, digest "
            << dcinv::hex64(dcinv::dataset_digest(data)) << "\n";
  return 0;
}

int cmd_consistency(const CliOptions& opts) {
  const RunConfig config = effective_config(opts);
  const dcinv::Dataset data = dcinv::dataset_from_json_text(
      dcinv::read_text_file(artifact_path(opts, "dataset.json")));
  const dcinv::ConsistencySet cs = dcinv::step_consistency(config, data);

  const dcinv::RankReport rank =
      dcinv::check_identifiability(data, cs.basis());
  std::cout << "regressor rank " << rank.rank << "/" << rank.cols
            << (rank.identifiable ? " (identifiable)" : " (RANK DEFICIENT)")
            << "\n";

  const dcinv::ThetaVertexFamily family = dcinv::step_vertices(config, cs);
  write_artifact(opts, "consistency.json", dcinv::to_json_text(cs, &family),
                 config_digest_of(config));
  std::cout << "consistency set: " << cs.num_components() << " blocks, "
            << family.count() << " coefficient vertices\n";
  return 0;
}

int cmd_synthesize(const CliOptions& opts) {
  const RunConfig config = effective_config(opts);
  const std::string cons_text =
      dcinv::read_text_file(artifact_path(opts, "consistency.json"));
  dcinv::LoadedConsistency loaded =
      dcinv::consistency_from_json_text(cons_text);
  if (!loaded.has_family)
    loaded.family = dcinv::step_vertices(config, loaded.set);

  dcinv::RobustModel model =
      dcinv::model_from_config(config, std::move(loaded.family));
  dcinv::SynthesisOutput output = dcinv::step_synthesize(config, model);
  output.certificate.consistency_digest = loaded.set.data_digest();

  write_artifact(opts, "certificate.json",
                 dcinv::to_json_text(output.certificate),
                 config_digest_of(config));
  dcinv::write_text_file(
      artifact_path(opts, "certified_vertices.csv"),
      dcinv::vertices_to_csv(output.certificate.polytope.vrep));
  std::cout << "alpha " << output.scaling.alpha
            << (output.scaling.clipped_to_state_box
                    ? " (clipped to the state box)"
                    : "")
            << ", max residual " << output.certificate.max_residual
            << ", vertices " << output.certificate.polytope.num_vertices()
            << ", family " << model.family.count() << "\n";
  return 0;
}

int cmd_enlarge(const CliOptions& opts) {
  const RunConfig config = effective_config(opts);
  dcinv::LoadedConsistency loaded = dcinv::consistency_from_json_text(
      dcinv::read_text_file(artifact_path(opts, "consistency.json")));
  if (!loaded.has_family)
    loaded.family = dcinv::step_vertices(config, loaded.set);
  const dcinv::Certificate cert = dcinv::certificate_from_json_text(
      dcinv::read_text_file(artifact_path(opts, "certificate.json")));

  const dcinv::RobustModel model =
      dcinv::model_from_config(config, std::move(loaded.family));
  const dcinv::EnlargeResult result = dcinv::step_enlarge(config, model, cert);

  write_artifact(opts, "enlarged.json",
                 dcinv::to_json_text(result.enlarged.vrep),
                 config_digest_of(config));
  dcinv::write_text_file(artifact_path(opts, "admitted.csv"),
                         dcinv::admitted_to_csv(result.admitted));
  std::cout << "admitted " << result.admitted.size() << " of "
            << result.candidates_tested << " candidates; hull has "
            << result.enlarged.num_vertices() << " vertices\n";
  return 0;
}

int cmd_verify(const CliOptions& opts) {
  const RunConfig config = effective_config(opts);
  const std::string cert_text =
      dcinv::read_text_file(artifact_path(opts, "certificate.json"));
  const dcinv::Certificate cert =
      dcinv::certificate_from_json_text(cert_text);
  dcinv::LoadedConsistency loaded = dcinv::consistency_from_json_text(
      dcinv::read_text_file(artifact_path(opts, "consistency.json")));
  if (!loaded.has_family)
    loaded.family = dcinv::step_vertices(config, loaded.set);

  bool pass = true;
  if (cert.consistency_digest != loaded.set.data_digest()) {
    std::cout << "provenance mismatch: certificate was built from different "
                 "data\n";
    pass = false;
  }

  const dcinv::RobustModel model =
      dcinv::model_from_config(config, std::move(loaded.family));
  const dcinv::CertificateCheck check = dcinv::check_certificate(cert, model);
  std::cout << "residual recheck: max " << check.max_residual
            << (check.pass ? " (pass)" : " (FAIL)") << ", controls "
            << (check.controls_feasible ? "admissible" : "INADMISSIBLE")
            << "\n";
  pass = pass && check.pass && check.controls_feasible;

  const dcinv::TrueSystem sys = dcinv::system_from_config(config);
  const dcinv::VerificationReport report =
      dcinv::monte_carlo_verify(cert, sys, opts.samples, config.seed);
  std::cout << "sampled check: " << report.violations << " violations in "
            << report.samples << " samples, max margin " << report.max_margin
            << "\n";
  pass = pass && report.violations == 0;

  write_artifact(opts, "verification.json", dcinv::to_json_text(report),
                 config_digest_of(config) ^ payload_digest(cert_text));
  std::cout << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_plot(const CliOptions& opts) {
  const RunConfig config = effective_config(opts);
  const dcinv::Certificate cert = dcinv::certificate_from_json_text(
      dcinv::read_text_file(artifact_path(opts, "certificate.json")));
  const dcinv::TrueSystem sys = dcinv::system_from_config(config);
  const dcinv::CandidatePolytope initial = dcinv::initial_candidate(config);

  std::optional<dcinv::VPolytope> enlarged;
  std::vector<dcinv::AdmittedPoint> admitted;
  try {
    enlarged = dcinv::vpolytope_from_json_text(
        dcinv::read_text_file(artifact_path(opts, "enlarged.json")));
    admitted = read_admitted_csv(
        dcinv::read_text_file(artifact_path(opts, "admitted.csv")),
        cert.polytope.dim(), static_cast<int>(cert.controls.front().size()));
  } catch (const dcinv::Error&) {
    enlarged.reset();  // optional layer: absent files are fine
    admitted.clear();
  }

  dcinv::PlotLayers layers;
  layers.state_box = &sys.state_box;
  layers.initial = &initial.vrep;
  layers.certified = &cert.polytope.vrep;
  layers.enlarged = enlarged ? &*enlarged : nullptr;
  layers.admitted = admitted.empty() ? nullptr : &admitted;

  dcinv::write_text_file(artifact_path(opts, "figure.svg"),
                         dcinv::render_svg(layers));
  std::cout << "wrote figure.svg\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Data-driven robust contractive-set toolkit for polynomial systems"};
  app.require_subcommand(1);

  CliOptions opts;
  app.add_option("--config", opts.config_path, "configuration JSON path");
  app.add_option("--out", opts.out_dir, "artifact directory");
  std::uint64_t seed_value = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_value, "override the configured seed");
  int jobs_value = 0;
  auto* jobs_opt =
      app.add_option("--jobs", jobs_value, "override the worker-thread cap");
  double lambda_value = 0.0;
  auto* lambda_opt = app.add_option("--lambda", lambda_value,
                                    "override the contraction factor");
  app.add_option("--samples", opts.samples,
                 "sampled-state count for the verify command");

  auto* simulate = app.add_subcommand("simulate", "generate logged data");
  auto* consistency = app.add_subcommand(
      "consistency", "build the data-consistent coefficient set");
  auto* synthesize =
      app.add_subcommand("synthesize", "compute the certified set");
  auto* enlarge =
      app.add_subcommand("enlarge", "grow the certified set by admissions");
  auto* verify = app.add_subcommand("verify", "recheck a stored certificate");
  auto* plot = app.add_subcommand("plot", "render the planar figure");
  for (CLI::App* sub : {simulate, consistency, synthesize, enlarge, verify, plot})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*seed_opt) opts.seed = seed_value;
  if (*jobs_opt) opts.jobs = jobs_value;
  if (*lambda_opt) opts.lambda = lambda_value;

  try {
    if (*simulate) return cmd_simulate(opts);
    if (*consistency) return cmd_consistency(opts);
    if (*synthesize) return cmd_synthesize(opts);
    if (*enlarge) return cmd_enlarge(opts);
    if (*verify) return cmd_verify(opts);
    if (*plot) return cmd_plot(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
