#pragma once

#include "distribution.hpp"
#include "error.hpp"
#include "kernels.hpp"
#include "manifest.hpp"
#include "optimize.hpp"
#include "quadrature.hpp"
#include "rankme.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "signal.hpp"
#include "simplex.hpp"
