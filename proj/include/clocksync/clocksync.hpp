#pragma once

// Umbrella header: the whole clock-network laboratory.
//
//   model.hpp       parameters, configurations, statistics, jump averaging
//   rng.hpp         reproducible per-replica streams and inter-event laws
//   numerics.hpp    stable exponential-difference kernels and line fits
//   analytics.hpp   closed-form moments, stationary limits, ODE cross-check
//   conditional.hpp event-conditioned recursion and variance-reduced
//                   estimator
//   simulator.hpp   direct Monte Carlo engine
//   stats.hpp       deterministic parallel ensembles
//   phase.hpp       growth exponents along t = s * N^gamma
//   io.hpp          CSV output and atomic file writes
//   cli.hpp         command-line front end

#include "clocksync/analytics.hpp"
#include "clocksync/common.hpp"
#include "clocksync/conditional.hpp"
#include "clocksync/io.hpp"
#include "clocksync/model.hpp"
#include "clocksync/numerics.hpp"
#include "clocksync/phase.hpp"
#include "clocksync/rng.hpp"
#include "clocksync/simulator.hpp"
#include "clocksync/stats.hpp"
