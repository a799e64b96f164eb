#pragma once

#include "sdwave/blowup.hpp"
#include "sdwave/common.hpp"
#include "sdwave/diagnostics.hpp"
#include "sdwave/evolver.hpp"
#include "sdwave/grid.hpp"
#include "sdwave/harmonic.hpp"
#include "sdwave/io.hpp"
#include "sdwave/nonlinearity.hpp"
#include "sdwave/picard.hpp"
#include "sdwave/profiles.hpp"
#include "sdwave/spatial.hpp"
#include "sdwave/sweep.hpp"
#include "sdwave/testfn.hpp"
#include "sdwave/theory.hpp"
