#pragma once

// Umbrella header: the whole library.

#include "nsp/error.hpp"
#include "nsp/grid.hpp"
#include "nsp/field.hpp"
#include "nsp/fft.hpp"
#include "nsp/spectral.hpp"
#include "nsp/norms.hpp"
#include "nsp/field_io.hpp"
#include "nsp/quadrature.hpp"
#include "nsp/thermo.hpp"
#include "nsp/doping.hpp"
#include "nsp/steady_state.hpp"
#include "nsp/mode_symbol.hpp"
#include "nsp/linear_decay.hpp"
#include "nsp/targets.hpp"
#include "nsp/perturbation.hpp"
#include "nsp/evolution.hpp"
#include "nsp/config.hpp"
#include "nsp/pipeline.hpp"
#include "nsp/oracles.hpp"
#include "nsp/acceptance.hpp"
