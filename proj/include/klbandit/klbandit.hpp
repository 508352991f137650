#pragma once

#include "klbandit/algorithms.hpp"
#include "klbandit/core.hpp"
#include "klbandit/experiments.hpp"
#include "klbandit/instances.hpp"
#include "klbandit/io.hpp"
#include "klbandit/objective.hpp"
#include "klbandit/oracle.hpp"
#include "klbandit/parallel.hpp"
#include "klbandit/simulator.hpp"
#include "klbandit/verify.hpp"
