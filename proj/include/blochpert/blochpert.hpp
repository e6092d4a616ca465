#pragma once

#include "blochpert/common.hpp"
#include "blochpert/config.hpp"
#include "blochpert/geometry.hpp"
#include "blochpert/hill.hpp"
#include "blochpert/isosurface.hpp"
#include "blochpert/lattice.hpp"
#include "blochpert/linalg.hpp"
#include "blochpert/nonres.hpp"
#include "blochpert/oracle.hpp"
#include "blochpert/potential.hpp"
#include "blochpert/resblock.hpp"
#include "blochpert/rng.hpp"
#include "blochpert/simpleset.hpp"
#include "blochpert/version.hpp"
