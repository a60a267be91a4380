#pragma once

// Umbrella header for the whole library.

#include "rsreg/bandwidth.hpp"
#include "rsreg/calibration.hpp"
#include "rsreg/comparators.hpp"
#include "rsreg/errors.hpp"
#include "rsreg/harness.hpp"
#include "rsreg/inference.hpp"
#include "rsreg/moments.hpp"
#include "rsreg/ols.hpp"
#include "rsreg/pipeline.hpp"
#include "rsreg/prob.hpp"
#include "rsreg/quadrature.hpp"
#include "rsreg/rng.hpp"
#include "rsreg/simulators.hpp"
#include "rsreg/smoothing.hpp"
#include "rsreg/spectral.hpp"
