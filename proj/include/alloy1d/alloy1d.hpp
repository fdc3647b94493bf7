#pragma once

/// Umbrella header for the numerical library (the CLI lives in cli.hpp).

#include "alloy1d/errors.hpp"
#include "alloy1d/floquet.hpp"
#include "alloy1d/lyapunov.hpp"
#include "alloy1d/model.hpp"
#include "alloy1d/model_io.hpp"
#include "alloy1d/reference_models.hpp"
#include "alloy1d/scattering.hpp"
#include "alloy1d/solution.hpp"
#include "alloy1d/spectra.hpp"
#include "alloy1d/transfer.hpp"
#include "alloy1d/version.hpp"
