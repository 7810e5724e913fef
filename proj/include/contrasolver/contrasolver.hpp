#pragma once

#include "contrasolver/analysis.hpp"
#include "contrasolver/error.hpp"
#include "contrasolver/graph.hpp"
#include "contrasolver/io.hpp"
#include "contrasolver/selection.hpp"
#include "contrasolver/solver.hpp"
#include "contrasolver/synth.hpp"
