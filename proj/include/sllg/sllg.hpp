#pragma once

#include "sllg/anisotropy.hpp"
#include "sllg/brownian.hpp"
#include "sllg/diagnostics.hpp"
#include "sllg/ergodic.hpp"
#include "sllg/errors.hpp"
#include "sllg/field.hpp"
#include "sllg/gibbs.hpp"
#include "sllg/measures.hpp"
#include "sllg/noise_shape.hpp"
#include "sllg/parallel.hpp"
#include "sllg/rng.hpp"
#include "sllg/rotation.hpp"
#include "sllg/rough_driver.hpp"
#include "sllg/sde_sphere.hpp"
#include "sllg/spde.hpp"
#include "sllg/statistics.hpp"
#include "sllg/vec3.hpp"
