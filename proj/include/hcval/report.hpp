#ifndef HCVAL_REPORT_HPP
#define HCVAL_REPORT_HPP

#include "hcval/analyses.hpp"

namespace hcval {

/// Machine-readable report with stable key names: kind, witness,
/// certificate, involved, narrative, delta. Lossless round-trip through
/// report_from_json.
std::string report_to_json(const ValidationReport& rep);
ValidationReport report_from_json(const std::string& json_text);

std::string report_to_text(const ValidationReport& rep);

}  // namespace hcval

#endif
