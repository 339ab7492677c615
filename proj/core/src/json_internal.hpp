#pragma once

#include <json.hpp>

#include "fedsim/run_config.hpp"

namespace fedsim::detail {

// Config echo in the exact external schema, used by the report writer.
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace fedsim::detail
