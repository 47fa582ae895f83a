#pragma once

#include "wallgen/alcm.hpp"
#include "wallgen/components.hpp"
#include "wallgen/config.hpp"
#include "wallgen/dataset.hpp"
#include "wallgen/image.hpp"
#include "wallgen/maskgen.hpp"
#include "wallgen/metrics.hpp"
#include "wallgen/preprocess.hpp"

namespace wallgen {
inline constexpr const char* kVersion = "1.0.0";
}
