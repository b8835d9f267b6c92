#pragma once

#include "fovea/error.hpp"
#include "fovea/rng.hpp"
#include "fovea/geometry.hpp"
#include "fovea/grid.hpp"
#include "fovea/scene.hpp"
#include "fovea/sensor.hpp"
#include "fovea/belief.hpp"
#include "fovea/objective.hpp"
#include "fovea/observer.hpp"
#include "fovea/search.hpp"
#include "fovea/config.hpp"
#include "fovea/metrics.hpp"
#include "fovea/report.hpp"
#include "fovea/experiments.hpp"
