#pragma once

#include "thames/models/dirmult.hpp"
#include "thames/models/gaussian.hpp"
#include "thames/models/linreg.hpp"
#include "thames/models/prostate.hpp"
