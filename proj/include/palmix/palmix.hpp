// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "palmix/config.hpp"
#include "palmix/errors.hpp"
#include "palmix/functional.hpp"
#include "palmix/geometry.hpp"
#include "palmix/model.hpp"
#include "palmix/models.hpp"
#include "palmix/oracle.hpp"
#include "palmix/parallel.hpp"
#include "palmix/pattern.hpp"
#include "palmix/pmf.hpp"
#include "palmix/rng.hpp"
#include "palmix/runner.hpp"
#include "palmix/stats.hpp"
#include "palmix/superposition.hpp"
