#pragma once

#include "edgelat/archspace.hpp"
#include "edgelat/baselines.hpp"
#include "edgelat/config.hpp"
#include "edgelat/counters.hpp"
#include "edgelat/dataset.hpp"
#include "edgelat/errors.hpp"
#include "edgelat/harness.hpp"
#include "edgelat/random.hpp"
#include "edgelat/regressor.hpp"
#include "edgelat/sampler.hpp"
#include "edgelat/synthdev.hpp"
