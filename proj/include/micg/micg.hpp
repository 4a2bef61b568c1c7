#pragma once

#include "micg/catalog.hpp"
#include "micg/charts.hpp"
#include "micg/csv.hpp"
#include "micg/dataset.hpp"
#include "micg/deprivation.hpp"
#include "micg/design.hpp"
#include "micg/ecodyn.hpp"
#include "micg/error.hpp"
#include "micg/expr.hpp"
#include "micg/frontier.hpp"
#include "micg/index.hpp"
#include "micg/regress.hpp"
#include "micg/stats.hpp"
#include "micg/synth.hpp"
#include "micg/weighting.hpp"

namespace micg {

inline constexpr const char *version = "0.1.0";

} // namespace micg
