#pragma once

#include "complexity.hpp"
#include "continued_fraction.hpp"
#include "correlate.hpp"
#include "error.hpp"
#include "flows.hpp"
#include "fourier.hpp"
#include "heisenberg.hpp"
#include "mobius.hpp"
#include "numeric.hpp"
#include "observables.hpp"
#include "parallel.hpp"
