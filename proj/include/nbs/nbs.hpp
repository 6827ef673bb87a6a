#pragma once

// Umbrella header for the negative binomial state toolkit.

#include "nbs/errors.hpp"
#include "nbs/summation.hpp"
#include "nbs/fock.hpp"
#include "nbs/states.hpp"
#include "nbs/propagate.hpp"
#include "nbs/su11.hpp"
#include "nbs/stats.hpp"
#include "nbs/amplifier.hpp"
