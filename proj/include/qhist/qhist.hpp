// qhist.hpp
// Umbrella header.

#pragma once

#include "qhist/errors.hpp"
#include "qhist/tensor.hpp"
#include "qhist/random.hpp"
#include "qhist/history.hpp"
#include "qhist/observables.hpp"
#include "qhist/density.hpp"
#include "qhist/protocol.hpp"
#include "qhist/inequality.hpp"
#include "qhist/scenario.hpp"
