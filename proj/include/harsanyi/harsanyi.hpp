#pragma once

#include "harsanyi/axioms.hpp"
#include "harsanyi/bridge.hpp"
#include "harsanyi/error.hpp"
#include "harsanyi/experiments.hpp"
#include "harsanyi/lattice.hpp"
#include "harsanyi/metrics.hpp"
#include "harsanyi/mlp.hpp"
#include "harsanyi/parallel.hpp"
#include "harsanyi/salience.hpp"
#include "harsanyi/selfcheck.hpp"
#include "harsanyi/table_io.hpp"
#include "harsanyi/taylor.hpp"
