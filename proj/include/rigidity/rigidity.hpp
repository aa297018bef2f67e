#pragma once

// Umbrella header.

#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"
#include "rigidity/rng.hpp"
#include "rigidity/sft.hpp"
#include "rigidity/window_table.hpp"
#include "rigidity/markov.hpp"
#include "rigidity/cocycle.hpp"
#include "rigidity/conformal.hpp"
#include "rigidity/mean_cycle.hpp"
#include "rigidity/holonomy.hpp"
#include "rigidity/shadowing.hpp"
#include "rigidity/analysis.hpp"
#include "rigidity/catalog.hpp"
