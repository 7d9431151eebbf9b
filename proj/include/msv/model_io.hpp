#pragma once

#include <string>
#include <variant>

#include "msv/baselines.hpp"
#include "msv/model.hpp"

namespace msv {

/// Renders a fitted model as versioned JSON: scalars and flags at the top
/// level, matrices as flat row-major arrays, the penalty/CV/seed record under
/// "meta". Every double round-trips bit-for-bit through the text form.
std::string model_to_json(const MsvModel& model);

/// Parses and validates a model document: schema version, dimensions,
/// finiteness, and the r-split range. Rejections carry the offending field.
MsvModel model_from_json(const std::string& text);

/// File forms of the two above; writes are atomic (temp file + rename).
void save_model(const MsvModel& model, const std::string& path);
MsvModel load_model(const std::string& path);

/// Baseline fits share the envelope, distinguished by a "kind" tag
/// ("ccc" / "dcc" / "ogarch"); stochastic-volatility documents carry no tag.
std::string model_to_json(const CccFit& fit);
std::string model_to_json(const DccFit& fit);
std::string model_to_json(const OgarchFit& fit);
void save_model(const CccFit& fit, const std::string& path);
void save_model(const DccFit& fit, const std::string& path);
void save_model(const OgarchFit& fit, const std::string& path);

using AnyModel = std::variant<MsvModel, CccFit, DccFit, OgarchFit>;

/// Dispatches on the "kind" tag; a document without one is parsed as a
/// stochastic-volatility model.
AnyModel any_model_from_json(const std::string& text);
AnyModel load_any_model(const std::string& path);

}  // namespace msv
