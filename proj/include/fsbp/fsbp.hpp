#pragma once

#include "fsbp/basis.hpp"
#include "fsbp/construct.hpp"
#include "fsbp/error.hpp"
#include "fsbp/fixtures.hpp"
#include "fsbp/lbfgs.hpp"
#include "fsbp/objective.hpp"
#include "fsbp/operator.hpp"
#include "fsbp/parametrize.hpp"
#include "fsbp/pde.hpp"
#include "fsbp/verify.hpp"
