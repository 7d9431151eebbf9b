#include "msv/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../vendor/json.hpp"
#include "msv/csv.hpp"
#include "msv/errors.hpp"
#include "msv/penalty.hpp"

namespace msv {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json matrix_to_array(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

json vector_to_array(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

const json& require_field(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw DataFormatError("model document is missing the \"" + std::string(key) +
                          "\" field");
  }
  return *it;
}

double require_finite(const json& value, const char* key) {
  if (!value.is_number()) {
    throw DataFormatError("model field \"" + std::string(key) + "\" must be a number");
  }
  const double d = value.get<double>();
  if (!std::isfinite(d)) {
    throw DataFormatError("model field \"" + std::string(key) + "\" is not finite");
  }
  return d;
}

Eigen::MatrixXd array_to_matrix(const json& value, Eigen::Index rows, Eigen::Index cols,
                                const char* key) {
  if (!value.is_array() || value.size() != static_cast<std::size_t>(rows * cols)) {
    throw DataFormatError("model field \"" + std::string(key) + "\" must be an array of " +
                          std::to_string(rows * cols) + " numbers");
  }
  Eigen::MatrixXd out(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = require_finite(value[k++], key);
  }
  return out;
}

Eigen::VectorXd array_to_vector(const json& value, Eigen::Index size, const char* key) {
  return array_to_matrix(value, size, 1, key);
}

std::vector<double> array_to_doubles(const json& value, const char* key) {
  if (!value.is_array()) {
    throw DataFormatError("model field \"" + std::string(key) + "\" must be an array");
  }
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& entry : value) out.push_back(require_finite(entry, key));
  return out;
}

bool require_bool(const json& value, const char* key) {
  if (!value.is_boolean()) {
    throw DataFormatError("model field \"" + std::string(key) + "\" must be a boolean");
  }
  return value.get<bool>();
}

int require_int(const json& value, const char* key) {
  if (!value.is_number_integer()) {
    throw DataFormatError("model field \"" + std::string(key) + "\" must be an integer");
  }
  return value.get<int>();
}

json parse_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataFormatError("model document is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw DataFormatError("model document must be a JSON object");
  return doc;
}

void require_version(const json& doc) {
  const auto& version = require_field(doc, "version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw DataFormatError("unsupported model schema version " + version.dump() +
                          "; this reader handles version " +
                          std::to_string(kSchemaVersion));
  }
}

Eigen::Index require_dimension(const json& doc) {
  const int p = require_int(require_field(doc, "p"), "p");
  if (p < 1) throw DataFormatError("model field \"p\" must be a positive integer");
  return p;
}

json garch_to_json(const GarchFit& fit) {
  json out;
  out["omega"] = fit.omega;
  out["alpha"] = fit.alpha;
  out["beta"] = fit.beta;
  out["loglik"] = fit.loglik;
  out["h_path"] = vector_to_array(fit.h_path);
  out["last_obs"] = fit.last_obs;
  out["boundary"] = fit.boundary;
  out["converged"] = fit.converged;
  return out;
}

GarchFit garch_from_json(const json& value, const char* key) {
  if (!value.is_object()) {
    throw DataFormatError("model field \"" + std::string(key) + "\" must be an object");
  }
  GarchFit fit;
  fit.omega = require_finite(require_field(value, "omega"), "omega");
  fit.alpha = require_finite(require_field(value, "alpha"), "alpha");
  fit.beta = require_finite(require_field(value, "beta"), "beta");
  if (!(fit.omega > 0.0) || fit.alpha < 0.0 || fit.beta < 0.0 ||
      fit.alpha + fit.beta >= 1.0) {
    throw DataFormatError("model field \"" + std::string(key) +
                          "\" violates the variance-recursion constraints");
  }
  fit.loglik = require_finite(require_field(value, "loglik"), "loglik");
  const auto& path = require_field(value, "h_path");
  if (!path.is_array() || path.empty()) {
    throw DataFormatError("model field \"h_path\" must be a non-empty array");
  }
  fit.h_path = array_to_matrix(path, static_cast<Eigen::Index>(path.size()), 1, "h_path");
  if (fit.h_path.minCoeff() <= 0.0) {
    throw DataFormatError("model field \"h_path\" must be strictly positive");
  }
  fit.last_obs = require_finite(require_field(value, "last_obs"), "last_obs");
  fit.boundary = require_bool(require_field(value, "boundary"), "boundary");
  fit.converged = require_bool(require_field(value, "converged"), "converged");
  return fit;
}

json margins_to_json(const std::vector<GarchFit>& margins) {
  json out = json::array();
  for (const GarchFit& m : margins) out.push_back(garch_to_json(m));
  return out;
}

std::vector<GarchFit> margins_from_json(const json& value, Eigen::Index count,
                                        const char* key) {
  if (!value.is_array() || value.size() != static_cast<std::size_t>(count)) {
    throw DataFormatError("model field \"" + std::string(key) + "\" must be an array of " +
                          std::to_string(count) + " objects");
  }
  std::vector<GarchFit> margins;
  margins.reserve(count);
  for (const auto& entry : value) margins.push_back(garch_from_json(entry, key));
  for (const GarchFit& m : margins) {
    if (m.h_path.size() != margins.front().h_path.size()) {
      throw DataFormatError("model margins disagree on the sample length");
    }
  }
  return margins;
}

CccFit ccc_from_doc(const json& doc) {
  const Eigen::Index p = require_dimension(doc);
  CccFit fit;
  fit.margins = margins_from_json(require_field(doc, "margins"), p, "margins");
  fit.rbar = array_to_matrix(require_field(doc, "rbar"), p, p, "rbar");
  fit.rbar_ridged = require_bool(require_field(doc, "rbar_ridged"), "rbar_ridged");
  return fit;
}

DccFit dcc_from_doc(const json& doc) {
  const Eigen::Index p = require_dimension(doc);
  DccFit fit;
  fit.a = require_finite(require_field(doc, "a"), "a");
  fit.b = require_finite(require_field(doc, "b"), "b");
  if (fit.a < 0.0 || fit.b < 0.0 || fit.a + fit.b >= 1.0) {
    throw DataFormatError("model fields \"a\" and \"b\" must be nonnegative with a+b < 1");
  }
  fit.qbar = array_to_matrix(require_field(doc, "qbar"), p, p, "qbar");
  fit.margins = margins_from_json(require_field(doc, "margins"), p, "margins");
  fit.u_scale = array_to_vector(require_field(doc, "u_scale"), p, "u_scale");
  if (fit.u_scale.minCoeff() <= 0.0) {
    throw DataFormatError("model field \"u_scale\" must be strictly positive");
  }
  fit.q_last = array_to_matrix(require_field(doc, "q_last"), p, p, "q_last");
  fit.u_last = array_to_vector(require_field(doc, "u_last"), p, "u_last");
  fit.loglik_corr = require_finite(require_field(doc, "loglik_corr"), "loglik_corr");
  fit.boundary = require_bool(require_field(doc, "boundary"), "boundary");
  fit.qbar_ridged = require_bool(require_field(doc, "qbar_ridged"), "qbar_ridged");
  return fit;
}

OgarchFit ogarch_from_doc(const json& doc) {
  const Eigen::Index p = require_dimension(doc);
  const int k = require_int(require_field(doc, "k"), "k");
  if (k < 1 || k > p) {
    throw DataFormatError("model field \"k\" must lie in [1, p]");
  }
  OgarchFit fit;
  fit.loadings = array_to_matrix(require_field(doc, "loadings"), p, p, "loadings");
  fit.mean = array_to_vector(require_field(doc, "mean"), p, "mean");
  fit.margins = margins_from_json(require_field(doc, "margins"), k, "margins");
  fit.residual_variances = array_to_vector(require_field(doc, "residual_variances"),
                                           p - k, "residual_variances");
  if (fit.residual_variances.size() > 0 && fit.residual_variances.minCoeff() <= 0.0) {
    throw DataFormatError("model field \"residual_variances\" must be strictly positive");
  }
  return fit;
}

}  // namespace

std::string model_to_json(const MsvModel& model) {
  json doc;
  doc["version"] = kSchemaVersion;
  doc["p"] = model.p;
  doc["m"] = model.m;
  doc["c_star"] = vector_to_array(model.c_star);
  doc["c"] = vector_to_array(model.c);
  doc["phi"] = matrix_to_array(model.phi);
  doc["xi"] = matrix_to_array(model.xi);
  doc["sigma_zeta"] = matrix_to_array(model.sigma_zeta);
  doc["sigma_alpha"] = matrix_to_array(model.sigma_alpha);
  doc["gamma"] = matrix_to_array(model.gamma);
  doc["dbar"] = vector_to_array(model.dbar);
  doc["r_split"] = model.r_split;

  json meta;
  meta["penalty_family"] = to_string(model.meta.penalty_family);
  meta["penalty_a"] = model.meta.penalty_a;
  meta["penalty_b"] = model.meta.penalty_b;
  meta["lambda"] = model.meta.lambda;
  meta["lambda_from_cv"] = model.meta.lambda_from_cv;
  json cv;
  cv["lambda_star"] = model.meta.cv.lambda_star;
  cv["lambda_grid"] = model.meta.cv.lambda_grid;
  cv["cv_curve"] = model.meta.cv.cv_curve;
  cv["n_folds"] = model.meta.cv.n_folds;
  cv["gap"] = model.meta.cv.gap;
  meta["cv"] = cv;
  meta["seed"] = model.meta.seed;
  meta["phi_rescaled"] = model.meta.phi_rescaled;
  meta["gamma_ridged"] = model.meta.gamma_ridged;
  meta["step1_converged"] = model.meta.step1_converged;
  meta["spectral_radius_phi"] = model.spectral_radius_phi;
  doc["meta"] = meta;

  return doc.dump(2) + "\n";
}

namespace {

MsvModel msv_from_doc(const json& doc) {
  require_version(doc);

  MsvModel model;
  model.p = static_cast<int>(require_dimension(doc));
  model.m = require_int(require_field(doc, "m"), "m");
  if (model.m < 1) {
    throw DataFormatError("model field \"m\" must be a positive integer");
  }
  const Eigen::Index p = model.p;

  model.c_star = array_to_vector(require_field(doc, "c_star"), p, "c_star");
  model.c = array_to_vector(require_field(doc, "c"), p, "c");
  model.phi = array_to_matrix(require_field(doc, "phi"), p, p, "phi");
  model.xi = array_to_matrix(require_field(doc, "xi"), p, p, "xi");
  model.sigma_zeta = array_to_matrix(require_field(doc, "sigma_zeta"), p, p, "sigma_zeta");
  model.sigma_alpha =
      array_to_matrix(require_field(doc, "sigma_alpha"), p, p, "sigma_alpha");
  model.gamma = array_to_matrix(require_field(doc, "gamma"), p, p, "gamma");
  model.dbar = array_to_vector(require_field(doc, "dbar"), p, "dbar");
  model.r_split = require_finite(require_field(doc, "r_split"), "r_split");
  if (!(model.r_split > 0.0 && model.r_split < 1.0)) {
    throw DataFormatError("model field \"r_split\" must lie in (0, 1); got " +
                          format_double(model.r_split));
  }

  const auto& meta = require_field(doc, "meta");
  if (!meta.is_object()) throw DataFormatError("model field \"meta\" must be an object");
  const auto& family = require_field(meta, "penalty_family");
  if (!family.is_string()) {
    throw DataFormatError("model field \"penalty_family\" must be a string");
  }
  model.meta.penalty_family = penalty_family_from_string(family.get<std::string>());
  model.meta.penalty_a = require_finite(require_field(meta, "penalty_a"), "penalty_a");
  model.meta.penalty_b = require_finite(require_field(meta, "penalty_b"), "penalty_b");
  model.meta.lambda = require_finite(require_field(meta, "lambda"), "lambda");
  model.meta.lambda_from_cv =
      require_bool(require_field(meta, "lambda_from_cv"), "lambda_from_cv");
  const auto& cv = require_field(meta, "cv");
  model.meta.cv.lambda_star =
      require_finite(require_field(cv, "lambda_star"), "cv.lambda_star");
  model.meta.cv.lambda_grid = array_to_doubles(require_field(cv, "lambda_grid"), "cv.lambda_grid");
  model.meta.cv.cv_curve = array_to_doubles(require_field(cv, "cv_curve"), "cv.cv_curve");
  if (model.meta.cv.lambda_grid.size() != model.meta.cv.cv_curve.size()) {
    throw DataFormatError("model CV record has " +
                          std::to_string(model.meta.cv.lambda_grid.size()) +
                          " grid points but " +
                          std::to_string(model.meta.cv.cv_curve.size()) + " curve values");
  }
  model.meta.cv.n_folds = require_int(require_field(cv, "n_folds"), "cv.n_folds");
  model.meta.cv.gap = require_int(require_field(cv, "gap"), "cv.gap");
  const auto& seed = require_field(meta, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw DataFormatError("model field \"seed\" must be an integer");
  }
  model.meta.seed = seed.get<std::uint64_t>();
  model.meta.phi_rescaled =
      require_bool(require_field(meta, "phi_rescaled"), "phi_rescaled");
  model.meta.gamma_ridged =
      require_bool(require_field(meta, "gamma_ridged"), "gamma_ridged");
  model.meta.step1_converged =
      require_bool(require_field(meta, "step1_converged"), "step1_converged");
  model.spectral_radius_phi =
      require_finite(require_field(meta, "spectral_radius_phi"), "spectral_radius_phi");
  return model;
}

}  // namespace

MsvModel model_from_json(const std::string& text) {
  return msv_from_doc(parse_document(text));
}

std::string model_to_json(const CccFit& fit) {
  json doc;
  doc["kind"] = "ccc";
  doc["version"] = kSchemaVersion;
  doc["p"] = fit.margins.size();
  doc["margins"] = margins_to_json(fit.margins);
  doc["rbar"] = matrix_to_array(fit.rbar);
  doc["rbar_ridged"] = fit.rbar_ridged;
  return doc.dump(2) + "\n";
}

std::string model_to_json(const DccFit& fit) {
  json doc;
  doc["kind"] = "dcc";
  doc["version"] = kSchemaVersion;
  doc["p"] = fit.margins.size();
  doc["a"] = fit.a;
  doc["b"] = fit.b;
  doc["qbar"] = matrix_to_array(fit.qbar);
  doc["margins"] = margins_to_json(fit.margins);
  doc["u_scale"] = vector_to_array(fit.u_scale);
  doc["q_last"] = matrix_to_array(fit.q_last);
  doc["u_last"] = vector_to_array(fit.u_last);
  doc["loglik_corr"] = fit.loglik_corr;
  doc["boundary"] = fit.boundary;
  doc["qbar_ridged"] = fit.qbar_ridged;
  return doc.dump(2) + "\n";
}

std::string model_to_json(const OgarchFit& fit) {
  json doc;
  doc["kind"] = "ogarch";
  doc["version"] = kSchemaVersion;
  doc["p"] = fit.loadings.rows();
  doc["k"] = fit.margins.size();
  doc["loadings"] = matrix_to_array(fit.loadings);
  doc["mean"] = vector_to_array(fit.mean);
  doc["margins"] = margins_to_json(fit.margins);
  doc["residual_variances"] = vector_to_array(fit.residual_variances);
  return doc.dump(2) + "\n";
}

AnyModel any_model_from_json(const std::string& text) {
  const json doc = parse_document(text);
  const auto it = doc.find("kind");
  if (it == doc.end()) return msv_from_doc(doc);
  if (!it->is_string()) {
    throw DataFormatError("model field \"kind\" must be a string");
  }
  const std::string kind = it->get<std::string>();
  require_version(doc);
  if (kind == "ccc") return ccc_from_doc(doc);
  if (kind == "dcc") return dcc_from_doc(doc);
  if (kind == "ogarch") return ogarch_from_doc(doc);
  throw DataFormatError("unknown model kind \"" + kind + "\"");
}

void save_model(const MsvModel& model, const std::string& path) {
  atomic_write_file(path, model_to_json(model));
}

void save_model(const CccFit& fit, const std::string& path) {
  atomic_write_file(path, model_to_json(fit));
}

void save_model(const DccFit& fit, const std::string& path) {
  atomic_write_file(path, model_to_json(fit));
}

void save_model(const OgarchFit& fit, const std::string& path) {
  atomic_write_file(path, model_to_json(fit));
}

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open model file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw DataFormatError("failed reading model file: " + path);
  }
  return buffer.str();
}

}  // namespace

MsvModel load_model(const std::string& path) {
  return model_from_json(read_text_file(path));
}

AnyModel load_any_model(const std::string& path) {
  return any_model_from_json(read_text_file(path));
}

}  // namespace msv
