#pragma once

#include <iosfwd>
#include <string>

#include "arflow/predictor.hpp"

namespace arflow {

/// Text format, documented in docs/formats.md. Values round-trip bit-exactly.
void write_predictor(std::ostream& out, const PredictorParams& params);
std::string predictor_to_string(const PredictorParams& params);

/// Throws SchemaError naming the offending line.
PredictorParams read_predictor(std::istream& in);

void save_predictor(const std::string& path, const PredictorParams& params);
/// Throws IoError when the file cannot be opened.
PredictorParams load_predictor(const std::string& path);

}  // namespace arflow
