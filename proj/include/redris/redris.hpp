#pragma once

#include "redris/baselines.hpp"
#include "redris/channel.hpp"
#include "redris/dft.hpp"
#include "redris/harness.hpp"
#include "redris/matching.hpp"
#include "redris/multicell.hpp"
#include "redris/perm_opt.hpp"
#include "redris/port_reduction.hpp"
#include "redris/precoding.hpp"
#include "redris/rng.hpp"
#include "redris/scenario.hpp"
#include "redris/single_cell.hpp"
#include "redris/types.hpp"
