#pragma once

#include "perckit/error.hpp"
#include "perckit/rng.hpp"
#include "perckit/special_fn.hpp"
#include "perckit/gap_process.hpp"
#include "perckit/qseries.hpp"
#include "perckit/lattice.hpp"
#include "perckit/growth_events.hpp"
#include "perckit/harness.hpp"
