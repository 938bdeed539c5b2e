#pragma once

// Umbrella header for the fracbc library.

#include "fracbc/actuation.hpp"
#include "fracbc/boundary.hpp"
#include "fracbc/errors.hpp"
#include "fracbc/experiment.hpp"
#include "fracbc/fdm_oracle.hpp"
#include "fracbc/hum.hpp"
#include "fracbc/mittag_leffler.hpp"
#include "fracbc/quadrature.hpp"
#include "fracbc/spectral.hpp"
