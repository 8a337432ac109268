#pragma once

#include "thames/core.hpp"
#include "thames/correction.hpp"
#include "thames/error.hpp"
#include "thames/estimator.hpp"
#include "thames/models.hpp"
#include "thames/radius.hpp"
#include "thames/result.hpp"
#include "thames/rng.hpp"
