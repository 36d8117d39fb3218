#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcinv/consistency.hpp"
#include "dcinv/dcmodel.hpp"
#include "dcinv/geometry.hpp"
#include "dcinv/harness.hpp"
#include "dcinv/synthesis.hpp"
#include "dcinv/types.hpp"

namespace dcinv {

// ---- Digests --------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

/// Digest of the dataset's canonical text form (records only, full
/// precision, locale-independent).
std::uint64_t dataset_digest(const Dataset& data);

// ---- JSON artifact text ---------------------------------------------------
// All writers produce deterministic text: fixed key order, shortest
// round-trip float formatting. A "timestamp" key, when present, is excluded
// from digests by construction (digests cover the "payload" subtree only).

std::string to_json_text(const HPolytope& p);
std::string to_json_text(const VPolytope& v);
std::string to_json_text(const Dataset& data);
std::string to_json_text(const ConsistencySet& cs,
                         const ThetaVertexFamily* family);  // family optional
std::string to_json_text(const Certificate& cert);
std::string to_json_text(const VerificationReport& report);

HPolytope hpolytope_from_json_text(const std::string& text);
VPolytope vpolytope_from_json_text(const std::string& text);
Dataset dataset_from_json_text(const std::string& text);

struct LoadedConsistency {
  ConsistencySet set;
  ThetaVertexFamily family;  // empty combos when absent from the file
  bool has_family = false;
};
LoadedConsistency consistency_from_json_text(const std::string& text);

/// Reads back everything check_certificate needs; the polytope's vrep is
/// rebuilt from the stored vertices verbatim.
Certificate certificate_from_json_text(const std::string& text);

// ---- CSV ------------------------------------------------------------------

std::string dataset_to_csv(const Dataset& data);
std::string vertices_to_csv(const VPolytope& v);
std::string admitted_to_csv(const std::vector<AdmittedPoint>& points);
std::string trajectory_to_csv(const std::vector<TrajectoryRow>& rows);

// ---- SVG (2-D only) -------------------------------------------------------

struct PlotLayers {
  const Box* state_box = nullptr;          // drawn as the outer frame (required)
  const VPolytope* initial = nullptr;      // optional layers; null = skip
  const VPolytope* certified = nullptr;
  const VPolytope* enlarged = nullptr;
  const std::vector<AdmittedPoint>* admitted = nullptr;
};

/// Self-contained SVG: state box, initial candidate, certified set,
/// enlarged hull, admitted points. Throws DegenerateInput when the state
/// dimension is not 2.
std::string render_svg(const PlotLayers& layers);

// ---- Files ----------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);  // throws Error

}  // namespace dcinv
