#pragma once

#include "rmtail/csv.hpp"
#include "rmtail/errors.hpp"
#include "rmtail/grid.hpp"
#include "rmtail/montecarlo.hpp"
#include "rmtail/numeric_types.hpp"
#include "rmtail/orthopoly.hpp"
#include "rmtail/polynomial.hpp"
#include "rmtail/potentials.hpp"
#include "rmtail/rate_functions.hpp"
#include "rmtail/spectral_curve.hpp"
#include "rmtail/tail_result.hpp"
