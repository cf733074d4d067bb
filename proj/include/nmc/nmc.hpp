#pragma once

#include "nmc/common.hpp"
#include "nmc/rng.hpp"
#include "nmc/path.hpp"
#include "nmc/perturbation.hpp"
#include "nmc/functional.hpp"
#include "nmc/numerics.hpp"
#include "nmc/intensity.hpp"
#include "nmc/sampling.hpp"
#include "nmc/measure.hpp"
#include "nmc/variational.hpp"
#include "nmc/stats.hpp"
