#pragma once

#include "mdsipm/errors.hpp"
#include "mdsipm/linalg/matrix.hpp"
#include "mdsipm/linalg/kernels.hpp"
#include "mdsipm/linalg/dump.hpp"
#include "mdsipm/ldl/bunch_kaufman.hpp"
#include "mdsipm/nlp/problem.hpp"
#include "mdsipm/nlp/quadratic.hpp"
#include "mdsipm/nlp/builtin.hpp"
#include "mdsipm/ipm/options.hpp"
#include "mdsipm/ipm/iterate.hpp"
#include "mdsipm/ipm/timing.hpp"
#include "mdsipm/ipm/kkt.hpp"
#include "mdsipm/ipm/filter.hpp"
#include "mdsipm/ipm/solver.hpp"
#include "mdsipm/bench/bench.hpp"
#include "mdsipm/verify/oracles.hpp"
#include "mdsipm/verify/verify.hpp"
