#pragma once

#include "lplasma/bathtub.hpp"
#include "lplasma/cli.hpp"
#include "lplasma/config.hpp"
#include "lplasma/correlation.hpp"
#include "lplasma/experiment.hpp"
#include "lplasma/gibbs.hpp"
#include "lplasma/ground_state.hpp"
#include "lplasma/hamiltonian.hpp"
#include "lplasma/io.hpp"
#include "lplasma/potential.hpp"
#include "lplasma/quadrature.hpp"
#include "lplasma/rng.hpp"
#include "lplasma/statistics.hpp"
#include "lplasma/types.hpp"
