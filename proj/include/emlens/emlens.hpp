// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include "emlens/analysis.hpp"
#include "emlens/covariance.hpp"
#include "emlens/estimation.hpp"
#include "emlens/geometry.hpp"
#include "emlens/harness.hpp"
#include "emlens/lens.hpp"
#include "emlens/receiver.hpp"
#include "emlens/rng.hpp"
#include "emlens/selection.hpp"
#include "emlens/simulation.hpp"
