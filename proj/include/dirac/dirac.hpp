#pragma once

// Umbrella header for the library (the command layer in cli.hpp is separate).

#include "dirac/bench.hpp"
#include "dirac/core.hpp"
#include "dirac/datr.hpp"
#include "dirac/deda.hpp"
#include "dirac/io.hpp"
#include "dirac/kernels.hpp"
#include "dirac/metrics.hpp"
#include "dirac/parallel.hpp"
#include "dirac/random.hpp"
#include "dirac/sampling.hpp"
#include "dirac/synth.hpp"
#include "dirac/transforms.hpp"
