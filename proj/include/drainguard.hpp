#pragma once

#include "drainguard/errors.hpp"
#include "drainguard/extended_real.hpp"
#include "drainguard/model.hpp"
#include "drainguard/demand.hpp"
#include "drainguard/dynamics.hpp"
#include "drainguard/guardrail.hpp"
#include "drainguard/grid.hpp"
#include "drainguard/table.hpp"
#include "drainguard/solve.hpp"
#include "drainguard/random.hpp"
#include "drainguard/rollout.hpp"
#include "drainguard/rl.hpp"
#include "drainguard/checksum.hpp"
#include "drainguard/persist.hpp"
#include "drainguard/config.hpp"
#include "drainguard/csv.hpp"
#include "drainguard/experiments.hpp"
