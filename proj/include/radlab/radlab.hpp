#pragma once

#include "radlab/blocks.hpp"
#include "radlab/cocycle.hpp"
#include "radlab/ergodic.hpp"
#include "radlab/io.hpp"
#include "radlab/lyapunov.hpp"
#include "radlab/manifold.hpp"
#include "radlab/parallel.hpp"
#include "radlab/radii.hpp"
#include "radlab/rng.hpp"
#include "radlab/systems.hpp"
#include "radlab/types.hpp"
#include "radlab/version.hpp"
