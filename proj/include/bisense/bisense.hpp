// SPDX-License-Identifier: Apache-2.0
//
// Everything except the CLI front end.

#pragma once

#include "augment.hpp"
#include "baselines.hpp"
#include "bench.hpp"
#include "config.hpp"
#include "core.hpp"
#include "csi_sim.hpp"
#include "doppler.hpp"
#include "extractor.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "srcc.hpp"
