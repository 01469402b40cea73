#pragma once

#include "arqmc/badic.hpp"
#include "arqmc/density.hpp"
#include "arqmc/discrepancy.hpp"
#include "arqmc/driver.hpp"
#include "arqmc/error.hpp"
#include "arqmc/harness.hpp"
#include "arqmc/io.hpp"
#include "arqmc/netgeom.hpp"
#include "arqmc/point_set.hpp"
#include "arqmc/rng.hpp"
#include "arqmc/sampler.hpp"
