#pragma once

#include "frostlab/core.hpp"
#include "frostlab/exponents.hpp"
#include "frostlab/fft.hpp"
#include "frostlab/gamma.hpp"
#include "frostlab/grassmann.hpp"
#include "frostlab/grid.hpp"
#include "frostlab/harness.hpp"
#include "frostlab/measure.hpp"
#include "frostlab/potentials.hpp"
#include "frostlab/projections.hpp"
#include "frostlab/rng.hpp"
