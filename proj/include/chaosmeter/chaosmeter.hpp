#pragma once

// Umbrella header.

#include "chaosmeter/assignment.hpp"
#include "chaosmeter/bounds.hpp"
#include "chaosmeter/gaussian.hpp"
#include "chaosmeter/meanfield.hpp"
#include "chaosmeter/metrics.hpp"
#include "chaosmeter/model.hpp"
#include "chaosmeter/parallel.hpp"
#include "chaosmeter/rng.hpp"
#include "chaosmeter/sampler.hpp"
#include "chaosmeter/stats.hpp"
