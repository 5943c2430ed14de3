#pragma once

// Umbrella header for the escm library.

#include "escm/aggregation.hpp"
#include "escm/analytics.hpp"
#include "escm/competence.hpp"
#include "escm/errors.hpp"
#include "escm/heatmap_image.hpp"
#include "escm/montecarlo.hpp"
#include "escm/parallel.hpp"
#include "escm/pipeline.hpp"
#include "escm/quadrature.hpp"
#include "escm/rng.hpp"
#include "escm/scan.hpp"
#include "escm/stats.hpp"
#include "escm/version.hpp"
#include "escm/weighting.hpp"
