#pragma once

#include "scatterloc/analysis.hpp"
#include "scatterloc/commands.hpp"
#include "scatterloc/config.hpp"
#include "scatterloc/equivalence.hpp"
#include "scatterloc/errors.hpp"
#include "scatterloc/fock_lattice.hpp"
#include "scatterloc/io.hpp"
#include "scatterloc/rng.hpp"
#include "scatterloc/scattering_kernel.hpp"
#include "scatterloc/trajectory.hpp"
#include "scatterloc/version.hpp"
