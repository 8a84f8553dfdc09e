#pragma once

#include <json.hpp>

#include "bwvi/diagnostics.hpp"
#include "bwvi/harness.hpp"

namespace bwvi {

using Json = nlohmann::json;

Json to_json(const CPolicy& policy);
CPolicy c_policy_from_json(const Json& j);

Json to_json(const ExperimentSpec& spec);
// Missing optional fields take their defaults; throws SpecError on malformed input.
ExperimentSpec experiment_spec_from_json(const Json& j);

Json to_json(const VarianceReport& report);
VarianceReport variance_report_from_json(const Json& j);

Json to_json(const BoundInputs& in);

Json to_json(const Gaussian& g);

}  // namespace bwvi
