#pragma once

// Umbrella header for the whole toolkit.

#include "titan/apps/matrix_completion.hpp"
#include "titan/apps/sparse_nmf.hpp"
#include "titan/apps/synthetic.hpp"
#include "titan/bench.hpp"
#include "titan/config.hpp"
#include "titan/core.hpp"
#include "titan/extrapolation.hpp"
#include "titan/io.hpp"
#include "titan/numerics.hpp"
#include "titan/selfcheck.hpp"
#include "titan/solver.hpp"
#include "titan/surrogates.hpp"
