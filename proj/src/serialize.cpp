#include "dcinv/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "dcinv/errors.hpp"

namespace dcinv {

namespace {

using nlohmann::json;

// Shortest round-trip, locale-independent float text (used for digests and
// CSV; the JSON library applies the same policy internally).
std::string fmt(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw Error("expected a JSON array of numbers");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw Error("expected a JSON array of rows");
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw Error("ragged matrix rows in JSON");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json hpolytope_to_json(const HPolytope& p) {
  json out;
  out["normals"] = matrix_to_json(p.normals());
  out["offsets"] = vector_to_json(p.offsets());
  return out;
}

HPolytope hpolytope_from_json(const json& j) {
  return HPolytope(matrix_from_json(j.at("normals")),
                   vector_from_json(j.at("offsets")));
}

json basis_to_json(const PolyBasis& basis) {
  json atoms = json::array();
  for (int a = 0; a < basis.size(); ++a) {
    json exps = json::array();
    const auto& e = basis.atom(a).exponents;
    for (int i = 0; i < e.size(); ++i) exps.push_back(e(i));
    atoms.push_back(std::move(exps));
  }
  json out;
  out["state_dim"] = basis.state_dim();
  out["input_dim"] = basis.input_dim();
  out["atoms"] = std::move(atoms);
  return out;
}

PolyBasis basis_from_json(const json& j) {
  const int n = j.at("state_dim").get<int>();
  const int m = j.at("input_dim").get<int>();
  std::vector<Monomial> atoms;
  for (const auto& exps : j.at("atoms")) {
    Monomial atom;
    atom.exponents = Eigen::VectorXi(exps.size());
    for (size_t i = 0; i < exps.size(); ++i)
      atom.exponents(static_cast<int>(i)) = exps[i].get<int>();
    atoms.push_back(std::move(atom));
  }
  return PolyBasis(n, m, std::move(atoms));
}

json parse_typed(const std::string& text, const std::string& type) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("JSON parse failure: ") + e.what());
  }
  if (!j.is_object() || j.value("type", "") != type)
    throw Error("artifact is not of type \"" + type + "\"");
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

// ---- Digests --------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return std::string(buf);
}

std::uint64_t dataset_digest(const Dataset& data) {
  std::string text;
  for (const Transition& rec : data.records) {
    for (int i = 0; i < rec.x.size(); ++i) text += fmt(rec.x(i)) + " ";
    text += "|";
    for (int i = 0; i < rec.u.size(); ++i) text += " " + fmt(rec.u(i));
    text += " |";
    for (int i = 0; i < rec.x_next.size(); ++i)
      text += " " + fmt(rec.x_next(i));
    text += "\n";
  }
  return fnv1a64(text);
}

// ---- JSON artifact text ---------------------------------------------------

std::string to_json_text(const HPolytope& p) {
  json j = hpolytope_to_json(p);
  j["type"] = "hpolytope";
  return dump(j);
}

std::string to_json_text(const VPolytope& v) {
  json j;
  j["type"] = "vpolytope";
  j["vertices"] = matrix_to_json(v.vertices());
  return dump(j);
}

std::string to_json_text(const Dataset& data) {
  json records = json::array();
  for (const Transition& rec : data.records) {
    json r;
    r["x"] = vector_to_json(rec.x);
    r["u"] = vector_to_json(rec.u);
    r["x_next"] = vector_to_json(rec.x_next);
    records.push_back(std::move(r));
  }
  json j;
  j["type"] = "dataset";
  j["seed"] = data.seed;
  j["source"] = data.source;
  j["records"] = std::move(records);
  j["digest"] = hex64(dataset_digest(data));
  return dump(j);
}

std::string to_json_text(const ConsistencySet& cs,
                         const ThetaVertexFamily* family) {
  json blocks = json::array();
  for (int b = 0; b < cs.num_components(); ++b)
    blocks.push_back(hpolytope_to_json(cs.block(b)));
  json j;
  j["type"] = "consistency";
  j["epsilon"] = cs.epsilon();
  j["data_digest"] = hex64(cs.data_digest());
  j["basis"] = basis_to_json(cs.basis());
  j["blocks"] = std::move(blocks);
  if (family != nullptr) {
    json fam;
    json block_vertices = json::array();
    for (const Matrix& bv : family->block_vertices)
      block_vertices.push_back(matrix_to_json(bv));
    json combos = json::array();
    for (const Matrix& combo : family->combos)
      combos.push_back(matrix_to_json(combo));
    fam["block_vertices"] = std::move(block_vertices);
    fam["combos"] = std::move(combos);
    j["family"] = std::move(fam);
  }
  return dump(j);
}

std::string to_json_text(const Certificate& cert) {
  json poly;
  poly["hrep"] = hpolytope_to_json(cert.polytope.hrep);
  poly["vrep"] = matrix_to_json(cert.polytope.vrep.vertices());
  poly["provenance"] = cert.polytope.provenance;

  json controls = json::array();
  for (const Vector& u : cert.controls) controls.push_back(vector_to_json(u));

  json residuals = json::array();
  for (const Matrix& slab : cert.residual_tensor)
    residuals.push_back(matrix_to_json(slab));

  json j;
  j["type"] = "certificate";
  j["polytope"] = std::move(poly);
  j["lambda_w"] = cert.lambda_w;
  j["alpha"] = cert.alpha;
  j["controls"] = std::move(controls);
  j["residual_tensor"] = std::move(residuals);
  j["max_residual"] = cert.max_residual;
  j["argmax_residual"] = {cert.argmax_residual[0], cert.argmax_residual[1],
                          cert.argmax_residual[2]};
  j["noise_support"] = vector_to_json(cert.noise_support);
  j["consistency_digest"] = hex64(cert.consistency_digest);
  return dump(j);
}

std::string to_json_text(const VerificationReport& report) {
  json j;
  j["type"] = "verification";
  j["samples"] = report.samples;
  j["violations"] = report.violations;
  j["max_margin"] = report.max_margin;
  j["facet_noise"] = vector_to_json(report.facet_noise);
  return dump(j);
}

HPolytope hpolytope_from_json_text(const std::string& text) {
  return hpolytope_from_json(parse_typed(text, "hpolytope"));
}

VPolytope vpolytope_from_json_text(const std::string& text) {
  return VPolytope(
      matrix_from_json(parse_typed(text, "vpolytope").at("vertices")));
}

Dataset dataset_from_json_text(const std::string& text) {
  const json j = parse_typed(text, "dataset");
  Dataset data;
  data.seed = j.at("seed").get<std::uint64_t>();
  data.source = j.at("source").get<std::string>();
  for (const auto& r : j.at("records")) {
    Transition rec;
    rec.x = vector_from_json(r.at("x"));
    rec.u = vector_from_json(r.at("u"));
    rec.x_next = vector_from_json(r.at("x_next"));
    data.records.push_back(std::move(rec));
  }
  const std::string stored = j.value("digest", "");
  if (!stored.empty() && stored != hex64(dataset_digest(data)))
    throw Error("dataset digest mismatch: file contents were altered");
  return data;
}

LoadedConsistency consistency_from_json_text(const std::string& text) {
  const json j = parse_typed(text, "consistency");
  PolyBasis basis = basis_from_json(j.at("basis"));
  std::vector<HPolytope> blocks;
  for (const auto& b : j.at("blocks")) blocks.push_back(hpolytope_from_json(b));
  const double epsilon = j.at("epsilon").get<double>();
  const std::uint64_t digest =
      std::stoull(j.at("data_digest").get<std::string>(), nullptr, 16);

  LoadedConsistency out{
      ConsistencySet(std::move(basis), std::move(blocks), epsilon, digest),
      ThetaVertexFamily{}, false};
  if (j.contains("family")) {
    const json& fam = j.at("family");
    for (const auto& bv : fam.at("block_vertices"))
      out.family.block_vertices.push_back(matrix_from_json(bv));
    for (const auto& combo : fam.at("combos"))
      out.family.combos.push_back(matrix_from_json(combo));
    out.has_family = true;
  }
  return out;
}

Certificate certificate_from_json_text(const std::string& text) {
  const json j = parse_typed(text, "certificate");
  const json& poly = j.at("polytope");
  CandidatePolytope cand{hpolytope_from_json(poly.at("hrep")),
                         VPolytope(matrix_from_json(poly.at("vrep"))),
                         poly.at("provenance").get<std::string>()};

  std::vector<Vector> controls;
  for (const auto& u : j.at("controls")) controls.push_back(vector_from_json(u));
  std::vector<Matrix> residuals;
  for (const auto& slab : j.at("residual_tensor"))
    residuals.push_back(matrix_from_json(slab));

  const auto& arg = j.at("argmax_residual");
  Certificate cert{std::move(cand),
                   j.at("lambda_w").get<double>(),
                   std::move(controls),
                   std::move(residuals),
                   j.at("max_residual").get<double>(),
                   {arg.at(0).get<int>(), arg.at(1).get<int>(),
                    arg.at(2).get<int>()},
                   vector_from_json(j.at("noise_support")),
                   j.at("alpha").get<double>(),
                   std::stoull(j.at("consistency_digest").get<std::string>(),
                               nullptr, 16)};
  return cert;
}

// ---- CSV ------------------------------------------------------------------

std::string dataset_to_csv(const Dataset& data) {
  const int n = data.state_dim();
  const int m = data.input_dim();
  std::string out = "k";
  for (int i = 0; i < n; ++i) out += ",x" + std::to_string(i + 1);
  for (int i = 0; i < m; ++i) out += ",u" + std::to_string(i + 1);
  for (int i = 0; i < n; ++i) out += ",x_next" + std::to_string(i + 1);
  out += "\n";
  for (int k = 0; k < data.size(); ++k) {
    const Transition& rec = data.records[k];
    out += std::to_string(k);
    for (int i = 0; i < n; ++i) out += "," + fmt(rec.x(i));
    for (int i = 0; i < m; ++i) out += "," + fmt(rec.u(i));
    for (int i = 0; i < n; ++i) out += "," + fmt(rec.x_next(i));
    out += "\n";
  }
  return out;
}

std::string vertices_to_csv(const VPolytope& v) {
  std::string out;
  for (int c = 0; c < v.dim(); ++c)
    out += (c ? "," : "") + ("x" + std::to_string(c + 1));
  out += "\n";
  for (int r = 0; r < v.size(); ++r) {
    for (int c = 0; c < v.dim(); ++c)
      out += (c ? "," : "") + fmt(v.vertices()(r, c));
    out += "\n";
  }
  return out;
}

std::string admitted_to_csv(const std::vector<AdmittedPoint>& points) {
  if (points.empty()) return "worst_residual\n";
  const int n = static_cast<int>(points.front().point.size());
  const int m = static_cast<int>(points.front().control.size());
  std::string out;
  for (int i = 0; i < n; ++i)
    out += (i ? "," : "") + ("x" + std::to_string(i + 1));
  for (int i = 0; i < m; ++i) out += ",u" + std::to_string(i + 1);
  out += ",worst_residual\n";
  for (const AdmittedPoint& pt : points) {
    for (int i = 0; i < n; ++i) out += (i ? "," : "") + fmt(pt.point(i));
    for (int i = 0; i < m; ++i) out += "," + fmt(pt.control(i));
    out += "," + fmt(pt.worst_residual) + "\n";
  }
  return out;
}

std::string trajectory_to_csv(const std::vector<TrajectoryRow>& rows) {
  std::string out = "k,set_scale,membership";
  const int n = rows.empty() ? 0 : static_cast<int>(rows.front().state.size());
  for (int i = 0; i < n; ++i) out += ",x" + std::to_string(i + 1);
  out += "\n";
  for (const TrajectoryRow& row : rows) {
    out += std::to_string(row.k) + "," + fmt(row.set_scale) + "," +
           fmt(row.membership);
    for (int i = 0; i < n; ++i) out += "," + fmt(row.state(i));
    out += "\n";
  }
  return out;
}

// ---- SVG (2-D only) -------------------------------------------------------

namespace {

struct SvgMapper {
  double xmin, ymin, scale, height;
  double sx(double x) const { return (x - xmin) * scale + 20.0; }
  double sy(double y) const { return height - ((y - ymin) * scale + 20.0); }
};

std::string polygon_points(const VPolytope& v, const SvgMapper& map) {
  const std::vector<int> order = ccw_order_2d(v);
  std::string pts;
  for (int idx : order) {
    if (!pts.empty()) pts += " ";
    pts += fmt(map.sx(v.vertices()(idx, 0))) + "," +
           fmt(map.sy(v.vertices()(idx, 1)));
  }
  return pts;
}

}  // namespace

std::string render_svg(const PlotLayers& layers) {
  if (layers.state_box == nullptr ||
      layers.state_box->half_widths.size() != 2)
    throw DegenerateInput(
        "plotting supports planar systems only (state dimension 2)");
  for (const VPolytope* layer :
       {layers.initial, layers.certified, layers.enlarged}) {
    if (layer != nullptr && layer->dim() != 2)
      throw DegenerateInput(
          "plotting supports planar systems only (state dimension 2)");
  }

  const Vector lo = layers.state_box->center - layers.state_box->half_widths;
  const Vector hi = layers.state_box->center + layers.state_box->half_widths;
  const double span = std::max(hi(0) - lo(0), hi(1) - lo(1));
  const double scale = 560.0 / std::max(span, 1e-12);
  const SvgMapper map{lo(0), lo(1), scale,
                      (hi(1) - lo(1)) * scale + 40.0};
  const double width = (hi(0) - lo(0)) * scale + 40.0;

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
      "\" height=\"" + fmt(map.height) + "\" viewBox=\"0 0 " + fmt(width) +
      " " + fmt(map.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // State constraint frame.
  svg += "<rect x=\"" + fmt(map.sx(lo(0))) + "\" y=\"" + fmt(map.sy(hi(1))) +
         "\" width=\"" + fmt((hi(0) - lo(0)) * scale) + "\" height=\"" +
         fmt((hi(1) - lo(1)) * scale) +
         "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"2\"/>\n";

  if (layers.enlarged != nullptr)
    svg += "<polygon points=\"" + polygon_points(*layers.enlarged, map) +
           "\" fill=\"#2e8b5733\" stroke=\"#2e8b57\" stroke-width=\"1.5\"/>\n";
  if (layers.certified != nullptr)
    svg += "<polygon points=\"" + polygon_points(*layers.certified, map) +
           "\" fill=\"#80008022\" stroke=\"#800080\" stroke-width=\"2\"/>\n";
  if (layers.initial != nullptr)
    svg += "<polygon points=\"" + polygon_points(*layers.initial, map) +
           "\" fill=\"none\" stroke=\"#1e66c8\" stroke-width=\"1.5\" "
           "stroke-dasharray=\"6 4\"/>\n";
  if (layers.admitted != nullptr) {
    for (const AdmittedPoint& pt : *layers.admitted)
      svg += "<circle cx=\"" + fmt(map.sx(pt.point(0))) + "\" cy=\"" +
             fmt(map.sy(pt.point(1))) +
             "\" r=\"3\" fill=\"#e07b00\" stroke=\"none\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// ---- Files ----------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("write failure on " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path + " for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error("read failure on " + path);
  return buffer.str();
}

}  // namespace dcinv
