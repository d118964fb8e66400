#pragma once

#include "kvstream/attention.hpp"
#include "kvstream/error.hpp"
#include "kvstream/experiment.hpp"
#include "kvstream/instance_io.hpp"
#include "kvstream/instances.hpp"
#include "kvstream/jl.hpp"
#include "kvstream/parallel.hpp"
#include "kvstream/rng.hpp"
#include "kvstream/sampling.hpp"
#include "kvstream/scalar_stream.hpp"
#include "kvstream/vector.hpp"
#include "kvstream/window.hpp"
