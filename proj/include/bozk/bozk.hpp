#pragma once

#include "bozk/cli.hpp"
#include "bozk/evolve.hpp"
#include "bozk/field_io.hpp"
#include "bozk/functionals.hpp"
#include "bozk/kernel.hpp"
#include "bozk/params.hpp"
#include "bozk/solver.hpp"
#include "bozk/spectral.hpp"
