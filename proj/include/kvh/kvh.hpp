#pragma once
// Umbrella header for the semiclassical Koopman-van Hove library.

#include "kvh/errors.hpp"
#include "kvh/systems.hpp"
#include "kvh/quadrature.hpp"
#include "kvh/characteristics.hpp"
#include "kvh/eigen.hpp"
#include "kvh/grid.hpp"
#include "kvh/parallel.hpp"
#include "kvh/deltas.hpp"
#include "kvh/propagators.hpp"
#include "kvh/diagnostics.hpp"
#include "kvh/ridges.hpp"
