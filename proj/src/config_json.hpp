#pragma once

#include <json.hpp>

#include "levitrap/config.hpp"

namespace levitrap::detail {

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

}  // namespace levitrap::detail
