#pragma once

// Umbrella header for the Cl(3) nonlinear Dirac toolkit.

#include "cl3/algebra_suite.hpp"
#include "cl3/config.hpp"
#include "cl3/derivative.hpp"
#include "cl3/errors.hpp"
#include "cl3/evolution.hpp"
#include "cl3/field.hpp"
#include "cl3/grid.hpp"
#include "cl3/hydro.hpp"
#include "cl3/lorentz.hpp"
#include "cl3/matrix2.hpp"
#include "cl3/paravector.hpp"
#include "cl3/physics.hpp"
#include "cl3/random.hpp"
#include "cl3/runner.hpp"
#include "cl3/snapshot.hpp"
#include "cl3/study.hpp"
