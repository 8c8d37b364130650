#pragma once

#include "chemotaxis/diagnostics.hpp"
#include "chemotaxis/error.hpp"
#include "chemotaxis/grid.hpp"
#include "chemotaxis/integrator.hpp"
#include "chemotaxis/operators.hpp"
#include "chemotaxis/params.hpp"
#include "chemotaxis/rng.hpp"
#include "chemotaxis/runner.hpp"
#include "chemotaxis/state.hpp"
