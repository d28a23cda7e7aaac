// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rdplab/channel.hpp"
#include "rdplab/discrete_rdp.hpp"
#include "rdplab/general_region.hpp"
#include "rdplab/io.hpp"
#include "rdplab/mc_codec.hpp"
#include "rdplab/numeric.hpp"
#include "rdplab/one_shot.hpp"
#include "rdplab/rdp_core.hpp"
#include "rdplab/refinement.hpp"
#include "rdplab/rng.hpp"
#include "rdplab/types.hpp"
#include "rdplab/universal_gaussian.hpp"
#include "rdplab/wasserstein.hpp"
