#pragma once

#include "roughdrift/convergence.hpp"
#include "roughdrift/drift.hpp"
#include "roughdrift/errors.hpp"
#include "roughdrift/euler_maruyama.hpp"
#include "roughdrift/fbm.hpp"
#include "roughdrift/heat_kernel.hpp"
#include "roughdrift/random_source.hpp"
#include "roughdrift/report.hpp"
#include "roughdrift/scheme.hpp"

namespace roughdrift {
inline constexpr const char* kVersion = "0.1.0";
}
