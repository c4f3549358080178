#pragma once

#include "damgms/errors.hpp"
#include "damgms/grid.hpp"
#include "damgms/permeability.hpp"
#include "damgms/fem_assembly.hpp"
#include "damgms/numerics.hpp"
#include "damgms/duality.hpp"
#include "damgms/gmsfem.hpp"
#include "damgms/driver.hpp"
#include "damgms/config.hpp"
#include "damgms/io.hpp"
#include "damgms/checks.hpp"
