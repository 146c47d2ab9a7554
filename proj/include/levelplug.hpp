#pragma once

#include "levelplug/distributions.hpp"
#include "levelplug/ecdf.hpp"
#include "levelplug/error.hpp"
#include "levelplug/grid.hpp"
#include "levelplug/levelset.hpp"
#include "levelplug/metrics.hpp"
#include "levelplug/rng.hpp"
#include "levelplug/sample.hpp"
#include "levelplug/theory.hpp"
